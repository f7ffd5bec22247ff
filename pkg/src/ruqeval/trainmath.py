"""Mathematical kernels of the multi-label classifier recipe, as pure
numerics: asymmetric loss with its analytic gradient, gradient-surgery
projection, mixup, EMA hard-sample reweighting, inverse-frequency class
weights, attention pooling, and grid-search threshold fitting.

No trainer ships here; optimizer settings live in TRAIN_CONFIG_DEFAULTS
purely as documentation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "TRAIN_CONFIG_DEFAULTS",
    "AslParams",
    "ReweightState",
    "AttentionParams",
    "ThresholdSet",
    "MixupSampler",
    "asl_loss",
    "pcgrad_project",
    "pcgrad_surgery",
    "mixup",
    "reweight",
    "class_weights",
    "attention_pool",
    "fit_thresholds",
    "run_property_checks",
]

# Recorded for documentation; nothing in this package consumes them.
TRAIN_CONFIG_DEFAULTS = {
    "optimizer": "AdamW",
    "learning_rate": 1e-4,
    "scheduler": "reduce-on-plateau",
    "plateau_factor": 0.5,
    "plateau_patience": 10,
    "gradient_clip_norm": 5.0,
    "embedding_dim": 768,
}


@dataclass(frozen=True)
class AslParams:
    gamma_pos: float = 0.0
    gamma_neg: float = 4.0
    margin: float = 0.05

    def validate(self) -> None:
        if self.gamma_pos < 0 or self.gamma_neg < 0:
            raise InputError("focusing exponents must be >= 0")
        if not 0 <= self.margin < 1:
            raise InputError(f"margin must be in [0, 1), got {self.margin}")


def asl_loss(p, y, params: AslParams = AslParams()):
    """Asymmetric loss and its analytic gradient with respect to logits.

    Positive labels contribute -(1-p)^g+ log p; negative labels contribute
    -(p_m)^g- log(1-p_m) with the margin-shifted p_m = max(p - margin, 0),
    so easy negatives below the margin vanish. Loss is the mean over all
    entries; the gradient is d(loss)/d(logit) via dp/dz = p(1-p).
    """
    params.validate()
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.shape != y.shape:
        raise InputError(f"shape mismatch: {p.shape} vs {y.shape}")
    if p.size == 0:
        raise InputError("probability vector must be nonempty")
    if np.any(p <= 0) or np.any(p >= 1):
        raise InputError("probabilities must lie strictly inside (0, 1)")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("labels must be binary")

    gp, gn, margin = params.gamma_pos, params.gamma_neg, params.margin
    pm = np.maximum(p - margin, 0.0)
    active = pm > 0

    pos_loss = -((1.0 - p) ** gp) * np.log(p)
    neg_loss = np.where(active, -(pm**gn) * np.log1p(-pm), 0.0)
    loss = float(np.mean(y * pos_loss + (1.0 - y) * neg_loss))

    # d(pos)/dp = (1-p)^(g+-1) * [g+ * log p - (1-p)/p]  (bracket < 0 always)
    dpos = ((1.0 - p) ** (gp - 1.0)) * (gp * np.log(p) - (1.0 - p) / p)
    # d(neg)/dp_m = p_m^(g--1) * [-g- * log(1-p_m) + p_m/(1-p_m)]
    with np.errstate(divide="ignore", invalid="ignore"):
        dneg_raw = (pm ** (gn - 1.0)) * (-gn * np.log1p(-pm) + pm / (1.0 - pm))
    dneg = np.where(active, dneg_raw, 0.0)
    dloss_dp = y * dpos + (1.0 - y) * dneg
    grad = dloss_dp * p * (1.0 - p) / p.size
    return loss, grad


def pcgrad_project(g_i, g_j) -> np.ndarray:
    """Remove the conflicting component of g_i along g_j, if any."""
    g_i = np.asarray(g_i, dtype=np.float64).copy()
    g_j = np.asarray(g_j, dtype=np.float64)
    if g_i.shape != g_j.shape:
        raise InputError(f"gradient shape mismatch: {g_i.shape} vs {g_j.shape}")
    dot = float(g_i @ g_j)
    if dot < 0:
        g_i -= (dot / float(g_j @ g_j)) * g_j
    return g_i


def pcgrad_surgery(grads: Sequence, rng: np.random.Generator):
    """Project every task gradient against the others in random order.

    Each task's gradient is repaired against the *original* gradients of
    the other tasks, visited in a shuffled order drawn from `rng`. Returns
    the repaired gradients plus a log of (task, against, applied) triples
    so the order is auditable.
    """
    originals = [np.asarray(g, dtype=np.float64) for g in grads]
    repaired = []
    log = []
    for i, g in enumerate(originals):
        out = g.copy()
        others = [j for j in range(len(originals)) if j != i]
        rng.shuffle(others)
        for j in others:
            before = out
            out = pcgrad_project(before, originals[j])
            log.append((i, j, not np.array_equal(before, out)))
        repaired.append(out)
    return repaired, log


def mixup(sample_a, sample_b, lam: float):
    """Elementwise convex blend of two (features, labels) samples."""
    if not 0 <= lam <= 1:
        raise InputError(f"lambda must be in [0, 1], got {lam}")
    feats_a, labels_a = sample_a
    feats_b, labels_b = sample_b
    feats_a = np.asarray(feats_a, dtype=np.float64)
    feats_b = np.asarray(feats_b, dtype=np.float64)
    labels_a = np.asarray(labels_a, dtype=np.float64)
    labels_b = np.asarray(labels_b, dtype=np.float64)
    if feats_a.shape != feats_b.shape or labels_a.shape != labels_b.shape:
        raise InputError("mixup requires matching shapes")
    return (
        lam * feats_a + (1.0 - lam) * feats_b,
        lam * labels_a + (1.0 - lam) * labels_b,
    )


class MixupSampler:
    """Draws mixing coefficients Beta(alpha, alpha), applied with a coin flip.

    The generator is owned by the caller; this object never touches global
    random state.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        alpha: float = 0.4,
        apply_probability: float = 0.5,
    ):
        if alpha <= 0:
            raise InputError(f"alpha must be > 0, got {alpha}")
        if not 0 <= apply_probability <= 1:
            raise InputError("apply_probability must be in [0, 1]")
        self.rng = rng
        self.alpha = alpha
        self.apply_probability = apply_probability

    def draw(self):
        """(applied, lambda); lambda is 1.0 when mixup is skipped."""
        applied = bool(self.rng.random() < self.apply_probability)
        lam = float(self.rng.beta(self.alpha, self.alpha)) if applied else 1.0
        return applied, lam

    def apply(self, sample_a, sample_b):
        applied, lam = self.draw()
        return mixup(sample_a, sample_b, lam), lam, applied


@dataclass(frozen=True)
class ReweightState:
    """EMA of per-sample losses plus the hard-sample constants."""

    ema: Optional[np.ndarray] = None
    beta: float = 0.9
    top_fraction: float = 0.30
    hard_weight: float = 2.0
    warmup_epochs: int = 5


def reweight(losses, state: ReweightState, epoch: int):
    """Hard-sample weights for one epoch, plus the updated EMA state.

    The EMA seeds itself with the first observed losses. During warmup all
    weights are 1.0; afterwards samples whose EMA is strictly above the
    (1 - top_fraction) percentile get hard_weight.
    """
    losses = np.asarray(losses, dtype=np.float64)
    if losses.ndim != 1 or losses.size == 0:
        raise InputError("losses must be a nonempty 1-D vector")
    if np.any(losses < 0):
        raise InputError("losses must be >= 0")
    if state.ema is None:
        ema = losses.copy()
    else:
        if state.ema.shape != losses.shape:
            raise InputError(
                f"EMA shape {state.ema.shape} does not match losses {losses.shape}"
            )
        ema = state.beta * state.ema + (1.0 - state.beta) * losses
    new_state = replace(state, ema=ema)
    if epoch < state.warmup_epochs:
        return np.ones_like(losses), new_state
    cut = np.percentile(ema, 100.0 * (1.0 - state.top_fraction))
    weights = np.where(ema > cut, state.hard_weight, 1.0)
    return weights, new_state


def class_weights(prevalence) -> np.ndarray:
    """Inverse-frequency weights clamped to [1, 10]; the modal class gets 1."""
    prevalence = np.asarray(prevalence, dtype=np.float64)
    if prevalence.size == 0:
        raise InputError("prevalence vector must be nonempty")
    if np.any(prevalence <= 0) or np.any(prevalence > 1):
        raise InputError("prevalences must lie in (0, 1]; filter zero-prevalence labels first")
    return np.clip(prevalence.max() / prevalence, 1.0, 10.0)


@dataclass(frozen=True)
class AttentionParams:
    score_weights: np.ndarray
    temperature: float = 1.0


def attention_pool(frames, params: AttentionParams):
    """Softmax-weighted pooling of frame embeddings.

    Scores are scaled dot products against params.score_weights; the pooled
    vector is the weights' convex combination of the rows.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise InputError("frames must be a nonempty 2-D matrix")
    w = np.asarray(params.score_weights, dtype=np.float64)
    if w.shape != (frames.shape[1],):
        raise InputError(
            f"score_weights dimension {w.shape} does not match frames {frames.shape}"
        )
    if params.temperature <= 0:
        raise InputError(f"temperature must be > 0, got {params.temperature}")
    scores = frames @ w / params.temperature
    scores -= scores.max()  # stable softmax
    weights = np.exp(scores)
    weights /= weights.sum()
    return weights @ frames, weights


class ThresholdSet(NamedTuple):
    thresholds: dict[str, float]
    warnings: tuple[str, ...]


def _f1_counts(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def fit_thresholds(
    scores,
    truth,
    grid_step: float = 0.01,
    labels: Sequence[str] | None = None,
    objective: str = "f1",
) -> ThresholdSet:
    """Per-label decision thresholds by exhaustive grid search.

    The grid is i/n for i in 1..n-1 with n = 1/grid_step; predictions are
    score >= threshold; ties prefer the lowest threshold. Degenerate labels
    (single-class truth) get threshold 0.5 and a warning instead of an
    error.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth)
    if scores.ndim != 2 or scores.shape != truth.shape:
        raise InputError("scores and truth must be matching 2-D matrices")
    if objective not in {"f1", "youden"}:
        raise InputError(f"unknown objective: {objective!r}")
    n_steps = int(round(1.0 / grid_step))
    if n_steps < 2 or abs(n_steps * grid_step - 1.0) > 1e-9:
        raise InputError(f"grid_step must evenly divide 1, got {grid_step}")
    grid = [i / n_steps for i in range(1, n_steps)]
    if labels is None:
        labels = [str(i) for i in range(scores.shape[1])]
    elif len(labels) != scores.shape[1]:
        raise InputError("label list must match the score matrix width")

    thresholds = {}
    warnings = []
    for col, label in enumerate(labels):
        y = truth[:, col].astype(bool)
        s = scores[:, col]
        positives = int(y.sum())
        if positives == 0 or positives == y.size:
            warnings.append(
                f"label {label!r} has single-class truth; defaulting threshold to 0.5"
            )
            thresholds[label] = 0.5
            continue
        best_t, best_value = grid[0], -np.inf
        for t in grid:
            predicted = s >= t
            tp = int(np.sum(predicted & y))
            fp = int(np.sum(predicted & ~y))
            fn = int(np.sum(~predicted & y))
            if objective == "f1":
                value = _f1_counts(tp, fp, fn)
            else:
                tn = int(np.sum(~predicted & ~y))
                sensitivity = tp / (tp + fn)
                specificity = tn / (tn + fp)
                value = sensitivity + specificity - 1.0
            if value > best_value:
                best_value, best_t = value, t
        thresholds[label] = best_t
    return ThresholdSet(thresholds=thresholds, warnings=tuple(warnings))


# ------------------------------------------------------------- self checks


def _central_difference(fn, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(x)
    for i in range(x.size):
        left = x.copy()
        right = x.copy()
        left.flat[i] -= step
        right.flat[i] += step
        grad.flat[i] = (fn(right) - fn(left)) / (2.0 * step)
    return grad


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _draw_asl_case(rng: np.random.Generator):
    n = int(rng.integers(2, 9))
    params = AslParams(
        gamma_pos=float(rng.uniform(0.0, 3.0)),
        gamma_neg=float(rng.uniform(0.0, 4.0)),
        margin=float(rng.uniform(0.0, 0.1)),
    )
    y = rng.integers(0, 2, size=n).astype(float)
    # keep probabilities away from the margin kink and the (0,1) edges so
    # the finite-difference oracle is well conditioned
    p = np.where(
        y == 1,
        rng.uniform(0.15, 0.85, size=n),
        rng.uniform(params.margin + 0.2, 0.8, size=n),
    )
    return p, y, params


def check_asl_gradient(seed: int = 0, draws: int = 1000) -> float:
    """Worst relative error of the analytic gradient vs central differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        p, y, params = _draw_asl_case(rng)
        z = np.log(p / (1.0 - p))
        _, grad = asl_loss(p, y, params)
        numeric = _central_difference(
            lambda zz: asl_loss(_sigmoid(zz), y, params)[0], z
        )
        rel = np.abs(grad - numeric) / np.maximum(np.abs(numeric), np.abs(grad))
        worst = max(worst, float(rel.max()))
    return worst


def run_property_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Property suite behind the CLI mathcheck subcommand."""
    rng = np.random.default_rng(seed)
    results = []

    worst = check_asl_gradient(seed, draws=200)
    results.append(
        ("asl gradient vs central differences", worst < 1e-6, f"max rel err {worst:.3e}")
    )

    ok = True
    worst_dot = 0.0
    for _ in range(200):
        g_i = rng.normal(size=12)
        g_j = rng.normal(size=12)
        projected = pcgrad_project(g_i, g_j)
        dot = float(projected @ g_j)
        worst_dot = min(worst_dot, dot)
        if dot < -1e-10 or np.linalg.norm(projected) > np.linalg.norm(g_i) + 1e-12:
            ok = False
    results.append(("pcgrad projection invariants", ok, f"min dot {worst_dot:.3e}"))

    sampler = MixupSampler(np.random.default_rng(seed))
    lams = []
    applied_count = 0
    for _ in range(20_000):
        applied, lam = sampler.draw()
        applied_count += applied
        if applied:
            lams.append(lam)
    mean_lam = float(np.mean(lams))
    rate = applied_count / 20_000
    ok = abs(mean_lam - 0.5) < 0.02 and abs(rate - 0.5) < 0.02
    results.append(
        ("mixup sampler statistics", ok, f"mean lambda {mean_lam:.3f}, rate {rate:.3f}")
    )

    frames = rng.normal(size=(32, 16))
    params = AttentionParams(score_weights=rng.normal(size=16), temperature=0.7)
    _, weights = attention_pool(frames, params)
    ok = abs(float(weights.sum()) - 1.0) < 1e-12 and np.all(weights >= 0)
    results.append(("attention weights form a distribution", ok, f"sum {weights.sum():.15f}"))

    ok = True
    for _ in range(20):
        n = int(rng.integers(4, 30))
        scores = rng.random((n, 3))
        truth = rng.integers(0, 2, size=(n, 3))
        fitted = fit_thresholds(scores, truth).thresholds
        for col in range(3):
            y = truth[:, col].astype(bool)
            if y.all() or not y.any():
                continue
            best_t, best_f1 = None, -1.0
            for i in range(1, 100):
                t = i / 100
                predicted = scores[:, col] >= t
                tp = int(np.sum(predicted & y))
                fp = int(np.sum(predicted & ~y))
                fn = int(np.sum(~predicted & y))
                f1 = _f1_counts(tp, fp, fn)
                if f1 > best_f1:
                    best_f1, best_t = f1, t
            if fitted[str(col)] != best_t:
                ok = False
    results.append(("threshold grid search matches exhaustive scan", ok, ""))

    state = ReweightState()
    losses = rng.random(10)
    weights, state = reweight(losses, state, epoch=0)
    warm_ok = bool(np.all(weights == 1.0))
    for epoch in range(1, 7):
        weights, state = reweight(rng.random(10), state, epoch)
    hard = int(np.sum(weights == 2.0))
    ok = warm_ok and hard <= int(np.ceil(0.3 * 10)) and np.all(np.isin(weights, (1.0, 2.0)))
    results.append(("reweight warmup and hard-sample cap", ok, f"{hard} samples doubled"))

    return results
