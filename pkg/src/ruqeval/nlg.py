"""Reference-based NLG metrics: BLEU, ROUGE-1, ROUGE-L and METEOR.

All functions take pre-tokenized candidate/reference sequences (lists,
tuples or TokenSequence); normalization happens upstream so every metric
sees exactly the same token stream.

Conventions pinned here:

- BLEU uses clipped n-gram precisions, an epsilon (1e-9) substituted for
  zero precisions before the geometric mean, and the brevity penalty
  exp(1 - r/c) when the candidate is shorter than the reference.
- ROUGE-1 is recall-oriented: clipped unigram overlap over reference count.
- ROUGE-L is the LCS F-measure with beta = 1.2 by default.
- METEOR aligns unigrams greedily in three passes (exact, stem, synonym),
  then applies the 10PR/(P+9R) harmonic mean and the fragmentation penalty
  0.5 * (chunks/matches)^3. A perfectly aligned m-token pair therefore
  scores 1 - 0.5/m^3, not 1.0; that is the formula's own fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError
from .textproc import TokenSequence, ngrams, lcs_length, stem

__all__ = [
    "NlgScores",
    "MeteorAlignment",
    "bleu",
    "rouge_n",
    "rouge_l",
    "meteor",
    "meteor_alignment",
    "nlg_scores",
    "corpus_bleu",
    "corpus_rouge_n",
    "corpus_rouge_l",
    "corpus_meteor",
]

BLEU_EPSILON = 1e-9
DEFAULT_ROUGE_L_BETA = 1.2


def _tokens(seq: "TokenSequence | Sequence[str]") -> tuple[str, ...]:
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return tuple(seq)


@dataclass(frozen=True)
class NlgScores:
    """One candidate/reference pair scored under every shipped NLG metric."""

    bleu1: float
    bleu4: float
    rouge1: float
    rougeL: float
    meteor: float

    def as_dict(self) -> dict[str, float]:
        return {
            "bleu1": self.bleu1,
            "bleu4": self.bleu4,
            "rouge1": self.rouge1,
            "rougeL": self.rougeL,
            "meteor": self.meteor,
        }


# ---------------------------------------------------------------------------
# BLEU


def _clipped_precision_counts(
    cand: tuple[str, ...], ref: tuple[str, ...], n: int
) -> tuple[int, int]:
    """(clipped matched n-grams, total candidate n-grams)."""
    total = max(0, len(cand) - n + 1)
    if total == 0:
        return 0, 0
    cand_counts = ngrams(cand, n)
    ref_counts = ngrams(ref, n)
    matched = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    return matched, total


def bleu(
    candidate: "TokenSequence | Sequence[str]",
    reference: "TokenSequence | Sequence[str]",
    max_n: int = 4,
) -> float:
    """Sentence BLEU with clipped precisions and brevity penalty."""
    if max_n not in (1, 4):
        raise InputError(f"max_n must be 1 or 4, got {max_n}")
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not ref:
        raise InputError("BLEU is undefined for an empty reference")
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        matched, total = _clipped_precision_counts(cand, ref, n)
        p = matched / total if total > 0 else 0.0
        if p == 0.0:
            p = BLEU_EPSILON
        log_sum += math.log(p)
    geo_mean = math.exp(log_sum / max_n)
    c, r = len(cand), len(ref)
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * geo_mean


# ---------------------------------------------------------------------------
# ROUGE


def rouge_n(
    candidate: "TokenSequence | Sequence[str]",
    reference: "TokenSequence | Sequence[str]",
    n: int = 1,
) -> float:
    """Recall-oriented n-gram overlap (clipped) against the reference."""
    if n < 1:
        raise InputError(f"n-gram order must be >= 1, got {n}")
    cand = _tokens(candidate)
    ref = _tokens(reference)
    ref_total = max(0, len(ref) - n + 1)
    if ref_total == 0:
        raise InputError(
            f"ROUGE-{n} is undefined: reference has fewer than {n} tokens"
        )
    cand_counts = ngrams(cand, n)
    ref_counts = ngrams(ref, n)
    matched = sum(min(c, cand_counts[g]) for g, c in ref_counts.items())
    return matched / ref_total


def _lcs_f_measure(lcs: int, cand_len: int, ref_len: int, beta: float) -> float:
    if lcs == 0:
        return 0.0
    p = lcs / cand_len
    r = lcs / ref_len
    b2 = beta * beta
    return (1.0 + b2) * p * r / (r + b2 * p)


def rouge_l(
    candidate: "TokenSequence | Sequence[str]",
    reference: "TokenSequence | Sequence[str]",
    beta: float = DEFAULT_ROUGE_L_BETA,
) -> float:
    """LCS-based F-measure; beta weights recall over precision."""
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not ref:
        raise InputError("ROUGE-L is undefined for an empty reference")
    if not cand:
        return 0.0
    return _lcs_f_measure(lcs_length(cand, ref), len(cand), len(ref), beta)


# ---------------------------------------------------------------------------
# METEOR


@dataclass(frozen=True)
class MeteorAlignment:
    """Greedy unigram alignment: (cand_idx, ref_idx, stage) triples."""

    pairs: tuple[tuple[int, int, str], ...]
    matches: int
    chunks: int


def _synonym_index(synonyms: Iterable[Iterable[str]]) -> dict[str, set[int]]:
    """token -> set of synonym-group ids; multi-word variants are skipped."""
    index: dict[str, set[int]] = {}
    for gid, group in enumerate(synonyms):
        for variant in group:
            if " " in variant:
                continue
            index.setdefault(variant, set()).add(gid)
    return index


def meteor_alignment(
    candidate: "TokenSequence | Sequence[str]",
    reference: "TokenSequence | Sequence[str]",
    synonyms: Iterable[Iterable[str]] = (),
) -> MeteorAlignment:
    """Align candidate to reference in exact, then stem, then synonym passes.

    Within a pass, candidate tokens are visited left to right and each takes
    the first still-unmatched reference token it can pair with.
    """
    cand = _tokens(candidate)
    ref = _tokens(reference)
    syn = _synonym_index(synonyms)
    cand_used = [False] * len(cand)
    ref_used = [False] * len(ref)
    pairs: list[tuple[int, int, str]] = []

    cand_stems = [stem(t) if t == t.lower() else t for t in cand]
    ref_stems = [stem(t) if t == t.lower() else t for t in ref]

    def run_stage(stage: str, match) -> None:
        for i in range(len(cand)):
            if cand_used[i]:
                continue
            for j in range(len(ref)):
                if ref_used[j]:
                    continue
                if match(i, j):
                    cand_used[i] = True
                    ref_used[j] = True
                    pairs.append((i, j, stage))
                    break

    run_stage("exact", lambda i, j: cand[i] == ref[j])
    run_stage("stem", lambda i, j: cand_stems[i] == ref_stems[j])
    run_stage(
        "synonym",
        lambda i, j: bool(syn.get(cand[i], set()) & syn.get(ref[j], set())),
    )

    ordered = sorted(pairs, key=lambda p: p[0])
    chunks = 0
    prev_i = prev_j = None
    for i, j, _ in ordered:
        if prev_i is None or i != prev_i + 1 or j != prev_j + 1:
            chunks += 1
        prev_i, prev_j = i, j
    return MeteorAlignment(tuple(ordered), len(ordered), chunks)


def _meteor_score(matches: int, chunks: int, cand_len: int, ref_len: int) -> float:
    """Score from alignment counts, in exact rational arithmetic.

    All inputs are integers and the formula is rational, so the score is
    computed exactly and rounded to float once at the end. This keeps
    hand-derived fixture values bit-reproducible.
    """
    if matches == 0:
        return 0.0
    precision = Fraction(matches, cand_len)
    recall = Fraction(matches, ref_len)
    f_mean = 10 * precision * recall / (precision + 9 * recall)
    penalty = Fraction(1, 2) * Fraction(chunks, matches) ** 3
    return float(f_mean * (1 - penalty))


def meteor(
    candidate: "TokenSequence | Sequence[str]",
    reference: "TokenSequence | Sequence[str]",
    synonyms: Iterable[Iterable[str]] = (),
) -> float:
    """Unigram-alignment METEOR score in [0, 1)."""
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not cand or not ref:
        return 0.0
    alignment = meteor_alignment(cand, ref, synonyms)
    return _meteor_score(alignment.matches, alignment.chunks, len(cand), len(ref))


# ---------------------------------------------------------------------------
# convenience and pooled (micro) variants


def nlg_scores(
    candidate: "TokenSequence | Sequence[str]",
    reference: "TokenSequence | Sequence[str]",
    synonyms: Iterable[Iterable[str]] = (),
    rouge_l_beta: float = DEFAULT_ROUGE_L_BETA,
) -> NlgScores:
    """All five metrics for one tokenized pair."""
    return NlgScores(
        bleu1=bleu(candidate, reference, max_n=1),
        bleu4=bleu(candidate, reference, max_n=4),
        rouge1=rouge_n(candidate, reference, n=1),
        rougeL=rouge_l(candidate, reference, beta=rouge_l_beta),
        meteor=meteor(candidate, reference, synonyms),
    )


def corpus_bleu(
    pairs: Iterable[tuple[Sequence[str], Sequence[str]]], max_n: int = 4
) -> float:
    """Corpus-level BLEU: n-gram counts pooled over pairs, one global BP."""
    if max_n not in (1, 4):
        raise InputError(f"max_n must be 1 or 4, got {max_n}")
    matched = [0] * max_n
    totals = [0] * max_n
    c_len = r_len = 0
    for cand, ref in pairs:
        cand = _tokens(cand)
        ref = _tokens(ref)
        c_len += len(cand)
        r_len += len(ref)
        for n in range(1, max_n + 1):
            m, t = _clipped_precision_counts(cand, ref, n)
            matched[n - 1] += m
            totals[n - 1] += t
    if c_len == 0:
        return 0.0
    log_sum = 0.0
    for m, t in zip(matched, totals):
        p = m / t if t > 0 else 0.0
        if p == 0.0:
            p = BLEU_EPSILON
        log_sum += math.log(p)
    geo_mean = math.exp(log_sum / max_n)
    brevity = 1.0 if c_len >= r_len else math.exp(1.0 - r_len / c_len)
    return brevity * geo_mean


def corpus_rouge_n(
    pairs: Iterable[tuple[Sequence[str], Sequence[str]]], n: int = 1
) -> float:
    """Pooled clipped overlap over pooled reference n-gram count."""
    num = den = 0
    for cand, ref in pairs:
        cand = _tokens(cand)
        ref = _tokens(ref)
        ref_total = max(0, len(ref) - n + 1)
        den += ref_total
        if ref_total == 0:
            continue
        cand_counts = ngrams(cand, n)
        ref_counts = ngrams(ref, n)
        num += sum(min(c, cand_counts[g]) for g, c in ref_counts.items())
    if den == 0:
        raise InputError(f"pooled ROUGE-{n} is undefined: no reference n-grams")
    return num / den


def corpus_rouge_l(
    pairs: Iterable[tuple[Sequence[str], Sequence[str]]],
    beta: float = DEFAULT_ROUGE_L_BETA,
) -> float:
    """LCS F-measure over pooled LCS length and pooled token counts."""
    lcs_sum = c_len = r_len = 0
    for cand, ref in pairs:
        cand = _tokens(cand)
        ref = _tokens(ref)
        lcs_sum += lcs_length(cand, ref)
        c_len += len(cand)
        r_len += len(ref)
    if c_len == 0 or r_len == 0 or lcs_sum == 0:
        return 0.0
    return _lcs_f_measure(lcs_sum, c_len, r_len, beta)


def corpus_meteor(
    pairs: Iterable[tuple[Sequence[str], Sequence[str]]],
    synonyms: Iterable[Iterable[str]] = (),
) -> float:
    """METEOR over pooled matches, chunks and token counts."""
    synonyms = tuple(tuple(g) for g in synonyms)
    m_sum = chunk_sum = c_len = r_len = 0
    for cand, ref in pairs:
        cand = _tokens(cand)
        ref = _tokens(ref)
        c_len += len(cand)
        r_len += len(ref)
        if not cand or not ref:
            continue
        alignment = meteor_alignment(cand, ref, synonyms)
        m_sum += alignment.matches
        chunk_sum += alignment.chunks
    if m_sum == 0 or c_len == 0 or r_len == 0:
        return 0.0
    return _meteor_score(m_sum, chunk_sum, c_len, r_len)
