"""Evaluation statistics: ranking metrics, confusion ratios, macro/micro
aggregation, correlation, bootstrap intervals, and paired tests.

Ranking metrics are computed from first principles (tie-averaged ranks,
documented tie order for average precision); distribution lookups use
scipy. The Wilcoxon test is exact for small n via a subset-sum count over
doubled ranks, which handles tied ranks exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import stats as sps

from .errors import DegenerateInputError, InputError, UndefinedMetricError

__all__ = [
    "ScoreMatrix",
    "CiResult",
    "TestResult",
    "auroc",
    "average_precision",
    "confusion_metrics",
    "macro_micro",
    "pearson",
    "bootstrap_ci",
    "paired_t_test",
    "wilcoxon_signed_rank",
    "BOOTSTRAP_STATISTICS",
]


@dataclass(frozen=True)
class ScoreMatrix:
    """Per-case per-label scores with aligned binary truth.

    An optional boolean mask marks present cells; masked-out cells are
    excluded from every metric (external-cohort label gaps).
    """

    case_ids: tuple[str, ...]
    label_ids: tuple[str, ...]
    scores: np.ndarray
    truth: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        truth = np.asarray(self.truth)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "truth", truth)
        expected = (len(self.case_ids), len(self.label_ids))
        if scores.shape != expected or truth.shape != expected:
            raise InputError(
                f"matrix shape {scores.shape} does not match ids {expected}"
            )
        if scores.size and (scores.min() < 0 or scores.max() > 1):
            raise InputError("scores must lie in [0, 1]")
        if not np.all((truth == 0) | (truth == 1)):
            raise InputError("truth must be binary")
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool)
            object.__setattr__(self, "mask", mask)
            if mask.shape != expected:
                raise InputError("mask shape must match the matrix")

    def column(self, label: str):
        """(scores, truth) for one label, mask applied."""
        j = self.label_ids.index(label)
        s = self.scores[:, j]
        t = self.truth[:, j]
        if self.mask is not None:
            keep = self.mask[:, j]
            return s[keep], t[keep]
        return s, t

    def pooled(self):
        """All (case, label) decisions flattened, mask applied."""
        if self.mask is not None:
            return self.scores[self.mask], self.truth[self.mask]
        return self.scores.ravel(), self.truth.ravel()


@dataclass(frozen=True)
class CiResult:
    point: float
    lower: float
    upper: float
    level: float
    replicates: int
    seed: int


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str  # paired_t | wilcoxon
    two_sided: bool = True


def _as_binary_pair(scores, truth):
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(truth)
    if s.ndim != 1 or s.shape != t.shape:
        raise InputError("scores and truth must be matching 1-D vectors")
    if not np.all((t == 0) | (t == 1)):
        raise InputError("truth must be binary")
    return s, t.astype(bool)


def auroc(scores, truth) -> float:
    """Probability a random positive outranks a random negative; ties 0.5."""
    s, t = _as_binary_pair(scores, truth)
    n_pos = int(t.sum())
    n_neg = int(t.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs at least one positive and one negative")
    ranks = sps.rankdata(s)  # tie-averaged, 1-based
    return float((ranks[t].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def average_precision(scores, truth) -> float:
    """Mean precision-at-rank over positives; ties ordered (score desc, index asc)."""
    s, t = _as_binary_pair(scores, truth)
    n_pos = int(t.sum())
    if n_pos == 0:
        raise UndefinedMetricError("average precision needs at least one positive")
    order = sorted(range(s.size), key=lambda i: (-s[i], i))
    hits = 0
    total = 0.0
    for rank, i in enumerate(order, start=1):
        if t[i]:
            hits += 1
            total += hits / rank
    return total / n_pos


def confusion_metrics(scores, truth, threshold: float) -> dict:
    """Contingency ratios at score >= threshold; 0/0 ratios come back None."""
    if not 0 <= threshold <= 1:
        raise InputError(f"threshold must be in [0, 1], got {threshold}")
    s, t = _as_binary_pair(scores, truth)
    predicted = s >= threshold
    tp = int(np.sum(predicted & t))
    fp = int(np.sum(predicted & ~t))
    fn = int(np.sum(~predicted & t))
    tn = int(np.sum(~predicted & ~t))

    def ratio(num, denom):
        return num / denom if denom else None

    sensitivity = ratio(tp, tp + fn)
    specificity = ratio(tn, tn + fp)
    ppv = ratio(tp, tp + fp)
    npv = ratio(tn, tn + fn)
    f1 = ratio(2 * tp, 2 * tp + fp + fn)
    return {
        "sensitivity": sensitivity,
        "specificity": specificity,
        "ppv": ppv,
        "npv": npv,
        "precision": ppv,
        "recall": sensitivity,
        "f1": f1,
        "counts": {"tp": tp, "fp": fp, "fn": fn, "tn": tn},
    }


def macro_micro(matrix: ScoreMatrix, thresholds: Optional[dict] = None) -> dict:
    """Per-label table plus macro (unweighted mean) and pooled micro AUROC.

    Single-class labels are skipped from the macro averages with a warning;
    their cells still participate in the pooled micro computation. F1 uses
    threshold 0.5 unless a per-label threshold is supplied.
    """
    thresholds = thresholds or {}
    per_label = {}
    warnings = []
    aurocs = []
    f1s = []
    for label in matrix.label_ids:
        s, t = matrix.column(label)
        n_pos = int(np.sum(t == 1))
        if t.size == 0 or n_pos == 0 or n_pos == t.size:
            warnings.append(f"label {label!r} has single-class truth; skipped")
            continue
        threshold = thresholds.get(label, 0.5)
        confusion = confusion_metrics(s, t, threshold)
        entry = {
            "auroc": auroc(s, t),
            "ap": average_precision(s, t),
            "f1": confusion["f1"] if confusion["f1"] is not None else 0.0,
            "threshold": threshold,
            "n": int(t.size),
            "n_pos": n_pos,
        }
        per_label[label] = entry
        aurocs.append(entry["auroc"])
        f1s.append(entry["f1"])
    if not aurocs:
        raise UndefinedMetricError("no label has both classes present")
    pooled_scores, pooled_truth = matrix.pooled()
    return {
        "macro_auroc": float(np.mean(aurocs)),
        "micro_auroc": auroc(pooled_scores, pooled_truth),
        "macro_f1": float(np.mean(f1s)),
        "per_label": per_label,
        "warnings": tuple(warnings),
    }


def pearson(x, y) -> tuple[float, float]:
    """Sample correlation with a two-sided t-distribution p (n-2 dof)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError("inputs must be matching 1-D vectors")
    n = x.size
    if n < 3:
        raise InputError("correlation needs at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0 or sy == 0:
        raise UndefinedMetricError("correlation undefined for zero-variance input")
    r = float(np.sum(dx * dy) / (sx * sy))
    r = max(-1.0, min(1.0, r))
    if 1.0 - abs(r) < 1e-14:  # collinear up to rounding
        return float(np.sign(r)), 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(sps.t.sf(abs(t), n - 2))
    return r, min(1.0, p)


def _statistic_mean(x):
    return float(np.mean(x))


def _statistic_median(x):
    return float(np.median(x))


def _statistic_std(x):
    return float(np.std(x, ddof=1))


def _statistic_accuracy(x):
    x = np.asarray(x)
    if not np.all((x == 0) | (x == 1)):
        raise InputError("accuracy statistic expects binary outcomes")
    return float(np.mean(x))


def _statistic_auroc(x):
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != 2:
        raise InputError("auroc statistic expects an (n, 2) score/truth table")
    return auroc(x[:, 0], x[:, 1])


BOOTSTRAP_STATISTICS: dict[str, Callable] = {
    "mean": _statistic_mean,
    "median": _statistic_median,
    "std": _statistic_std,
    "accuracy": _statistic_accuracy,
    "auroc": _statistic_auroc,
}


def _replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    # derived per replicate so results never depend on worker count
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, replicate)))


def bootstrap_ci(
    samples,
    statistic: Union[str, Callable] = "mean",
    replicates: int = 2000,
    seed: int = 0,
    level: float = 0.95,
    method: str = "percentile",
    axis: str = "rows",
) -> CiResult:
    """Bootstrap confidence interval for a statistic of the sample.

    Resamples rows of a vector or table with replacement (axis="cols"
    resamples table columns instead, e.g. raters rather than cases).
    Each replicate draws from its own (seed, replicate) generator, so the
    interval is reproducible and independent of any parallel scheduling.
    Percentile intervals by default; BCa behind method="bca".
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise InputError("samples must be a vector or a 2-D table")
    if axis not in ("rows", "cols"):
        raise InputError(f"axis must be rows or cols, got {axis!r}")
    if axis == "cols":
        if x.ndim != 2:
            raise InputError("axis='cols' requires a 2-D table")
        x = x.T
    n = x.shape[0]
    if n < 2:
        raise InputError("bootstrap needs at least 2 samples")
    if replicates < 100:
        raise InputError(f"replicates must be >= 100, got {replicates}")
    if not 0 < level < 1:
        raise InputError(f"level must be in (0, 1), got {level}")
    if method not in ("percentile", "bca"):
        raise InputError(f"unknown bootstrap method: {method!r}")
    if callable(statistic):
        fn = statistic
    else:
        try:
            fn = BOOTSTRAP_STATISTICS[statistic]
        except KeyError:
            raise InputError(
                f"unknown statistic {statistic!r}; "
                f"expected one of {sorted(BOOTSTRAP_STATISTICS)} or a callable"
            ) from None

    point = float(fn(x))
    values = np.empty(replicates)
    for r in range(replicates):
        rng = _replicate_rng(seed, r)
        indices = rng.integers(0, n, size=n)
        values[r] = float(fn(x[indices]))

    alpha = 1.0 - level
    if method == "percentile":
        lower, upper = np.percentile(values, [100 * alpha / 2, 100 * (1 - alpha / 2)])
    else:
        lower, upper = _bca_interval(x, values, point, fn, alpha)
    return CiResult(
        point=point,
        lower=float(lower),
        upper=float(upper),
        level=level,
        replicates=replicates,
        seed=seed,
    )


def _bca_interval(x, values, point, fn, alpha):
    if np.ptp(values) == 0:
        return values[0], values[0]
    # bias term, with the empirical fraction kept off 0 and 1
    frac = np.clip(
        np.mean(values < point), 1.0 / (len(values) + 1), len(values) / (len(values) + 1)
    )
    z0 = sps.norm.ppf(frac)
    n = x.shape[0]
    jackknife = np.array(
        [float(fn(np.delete(x, i, axis=0))) for i in range(n)]
    )
    centered = jackknife.mean() - jackknife
    denom = 6.0 * np.power(np.sum(centered**2), 1.5)
    acceleration = float(np.sum(centered**3) / denom) if denom else 0.0
    out = []
    for z_alpha in (sps.norm.ppf(alpha / 2), sps.norm.ppf(1 - alpha / 2)):
        adjusted = z0 + (z0 + z_alpha) / (1.0 - acceleration * (z0 + z_alpha))
        out.append(np.percentile(values, 100.0 * sps.norm.cdf(adjusted)))
    return out[0], out[1]


def paired_t_test(a, b) -> TestResult:
    """Two-sided paired t-test on elementwise differences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise InputError("paired test needs matching 1-D vectors")
    n = a.size
    if n < 2:
        raise InputError("paired test needs at least 2 pairs")
    d = a - b
    sd = float(np.std(d, ddof=1))
    if sd == 0:
        raise DegenerateInputError("differences have zero variance")
    t = float(d.mean() / (sd / np.sqrt(n)))
    p = 2.0 * float(sps.t.sf(abs(t), n - 1))
    return TestResult(statistic=t, p_value=min(1.0, p), method="paired_t")


DEFAULT_WILCOXON_EXACT_LIMIT = 25


def wilcoxon_signed_rank(
    a, b, exact_limit: int = DEFAULT_WILCOXON_EXACT_LIMIT
) -> TestResult:
    """Two-sided Wilcoxon signed-rank test.

    Zero differences are dropped; tied magnitudes get averaged ranks. The
    statistic is min(W+, W-). For n <= exact_limit the p-value is exact
    (subset-sum count over doubled ranks, valid under ties); beyond that a
    normal approximation with continuity and tie corrections is used.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise InputError("paired test needs matching 1-D vectors")
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateInputError("all differences are zero")
    ranks = sps.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    statistic = min(w_plus, w_minus)

    if n <= exact_limit:
        p = _wilcoxon_exact_p(ranks, w_plus)
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        variance = n * (n + 1) * (2 * n + 1) / 24.0 - float(
            np.sum(tie_counts**3 - tie_counts) / 48.0
        )
        # continuity correction pulls the min-side statistic toward the mean
        z = (statistic - mean + 0.5) / np.sqrt(variance)
        p = 2.0 * float(sps.norm.cdf(z))
    return TestResult(statistic=statistic, p_value=min(1.0, p), method="wilcoxon")


def _wilcoxon_exact_p(ranks: np.ndarray, w_plus: float) -> float:
    """Exact two-sided p: doubled ranks are integers even under ties."""
    doubled = [int(round(2 * r)) for r in ranks]
    total = sum(doubled)
    ways = np.zeros(total + 1, dtype=np.float64)
    ways[0] = 1.0
    for dr in doubled:  # dr >= 2 always, ranks start at 1
        ways[dr:] += ways[:-dr].copy()
    observed = int(round(2 * w_plus))
    count_all = 2.0 ** len(doubled)
    tail_low = float(ways[: observed + 1].sum()) / count_all
    tail_high = float(ways[observed:].sum()) / count_all
    return min(1.0, 2.0 * min(tail_low, tail_high))
