"""Keyword-lexicon report scoring over four clinical dimensions.

A lexicon groups interchangeable surface forms ("dilation/distended/...")
under four categories: Degree, Landmark, Feature, Impression. Scoring
extracts the canonical term of every group whose variant occurs in a report
as a contiguous token phrase, then compares generated-vs-reference term sets
per category with precision/recall/F1 and averages the four F1 values.

Negation is deliberately not modeled: negators like "no"/"not" are ordinary
Degree keywords, so "no gallstones" and "gallstones" both surface the same
Impression term. This mirrors how the lexicon is built.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Mapping

from .errors import InputError, LexiconError
from .textproc import DEFAULT_NORMALIZATION, NormalizationConfig, normalize, tokenize

__all__ = [
    "FORTE_CATEGORIES",
    "SynonymGroup",
    "KeywordLexicon",
    "CategoryScore",
    "ForteScores",
    "parse_lexicon",
    "parse_lexicon_text",
    "load_default_lexicon",
    "extract_keywords",
    "extract_keyword_counts",
    "forte_f1",
]

FORTE_CATEGORIES = ("Degree", "Landmark", "Feature", "Impression")


@dataclass(frozen=True)
class SynonymGroup:
    """One interchangeable set of surface forms; canonical is the first variant."""

    canonical: str
    variants: tuple[str, ...]


@dataclass(frozen=True)
class KeywordLexicon:
    """Synonym groups per category, with matching indexes built lazily."""

    categories: Mapping[str, tuple[SynonymGroup, ...]]

    def group_counts(self) -> dict[str, int]:
        return {cat: len(groups) for cat, groups in self.categories.items()}

    def synonym_sets(self) -> tuple[tuple[str, ...], ...]:
        """All groups with >= 2 variants, for the METEOR synonym stage."""
        out = []
        for groups in self.categories.values():
            for g in groups:
                if len(g.variants) >= 2:
                    out.append(g.variants)
        return tuple(out)

    def phrase_index(self) -> dict[str, dict[tuple[str, ...], tuple[str, ...]]]:
        """category -> token-phrase -> canonical terms carrying that phrase."""
        index: dict[str, dict[tuple[str, ...], tuple[str, ...]]] = {}
        for cat, groups in self.categories.items():
            cat_index: dict[tuple[str, ...], list[str]] = {}
            for g in groups:
                for variant in g.variants:
                    phrase = tuple(variant.split(" "))
                    cat_index.setdefault(phrase, [])
                    if g.canonical not in cat_index[phrase]:
                        cat_index[phrase].append(g.canonical)
            index[cat] = {p: tuple(cs) for p, cs in cat_index.items()}
        return index


def parse_lexicon_text(
    text: str,
    strict: bool = True,
    source_name: str = "<string>",
    config: NormalizationConfig = DEFAULT_NORMALIZATION,
) -> KeywordLexicon:
    """Parse lexicon content: [Category] headers, one slash-joined group per line.

    strict=True refuses a variant that appears in two groups of the same
    category; strict=False lets the duplicate stand for every group that
    lists it (needed by the shipped lexicon, which contains two such
    duplicates in its source table).
    """
    categories: dict[str, list[SynonymGroup]] = {}
    seen_variants: dict[str, dict[str, int]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in FORTE_CATEGORIES:
                raise LexiconError(
                    f"{source_name}:{lineno}: unknown category {name!r}; "
                    f"expected one of {', '.join(FORTE_CATEGORIES)}"
                )
            if name in categories:
                raise LexiconError(f"{source_name}:{lineno}: duplicate category section {name!r}")
            categories[name] = []
            seen_variants[name] = {}
            current = name
            continue
        if current is None:
            raise LexiconError(f"{source_name}:{lineno}: group line before any [Category] header")
        variants: list[str] = []
        for piece in line.split("/"):
            v = normalize(piece, config)
            if not v:
                raise LexiconError(f"{source_name}:{lineno}: empty variant in group {line!r}")
            if v in variants:
                raise LexiconError(f"{source_name}:{lineno}: variant {v!r} repeated inside one group")
            variants.append(v)
        for v in variants:
            if v in seen_variants[current]:
                if strict:
                    raise LexiconError(
                        f"{source_name}:{lineno}: variant {v!r} already used in "
                        f"{current} group on line {seen_variants[current][v]}"
                    )
            else:
                seen_variants[current][v] = lineno
        categories[current].append(SynonymGroup(variants[0], tuple(variants)))
    missing = [c for c in FORTE_CATEGORIES if c not in categories or not categories[c]]
    if missing:
        raise LexiconError(
            f"{source_name}: missing or empty categories: {', '.join(missing)}"
        )
    return KeywordLexicon({c: tuple(categories[c]) for c in FORTE_CATEGORIES})


def parse_lexicon(
    path: "str | Path | IO[str]",
    strict: bool = True,
    config: NormalizationConfig = DEFAULT_NORMALIZATION,
) -> KeywordLexicon:
    """Parse a lexicon file (path or open text handle)."""
    if hasattr(path, "read"):
        return parse_lexicon_text(path.read(), strict=strict, config=config)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read lexicon file {p}: {exc}") from exc
    return parse_lexicon_text(text, strict=strict, source_name=str(p), config=config)


def load_default_lexicon() -> KeywordLexicon:
    """The shipped RUQ ultrasound lexicon (178 groups across four categories)."""
    text = (
        resources.files("ruqeval").joinpath("data/forte_ruq_lexicon.txt").read_text("utf-8")
    )
    return parse_lexicon_text(text, strict=False, source_name="forte_ruq_lexicon.txt")


def extract_keyword_counts(
    report: str,
    lexicon: KeywordLexicon,
    config: NormalizationConfig = DEFAULT_NORMALIZATION,
) -> dict[str, Counter]:
    """Occurrence counts of canonical terms per category.

    Every (position, variant) phrase hit counts once; overlapping hits are
    all kept (matching consumes nothing).
    """
    tokens = tokenize(normalize(report, config)).tokens
    out: dict[str, Counter] = {}
    for cat, cat_index in lexicon.phrase_index().items():
        lengths = sorted({len(p) for p in cat_index})
        counts: Counter = Counter()
        for i in range(len(tokens)):
            for L in lengths:
                if i + L > len(tokens):
                    break
                hit = cat_index.get(tuple(tokens[i : i + L]))
                if hit:
                    for canonical in hit:
                        counts[canonical] += 1
        out[cat] = counts
    return out


def extract_keywords(
    report: str,
    lexicon: KeywordLexicon,
    config: NormalizationConfig = DEFAULT_NORMALIZATION,
) -> dict[str, frozenset[str]]:
    """Set of matched canonical terms per category."""
    return {
        cat: frozenset(counts)
        for cat, counts in extract_keyword_counts(report, lexicon, config).items()
    }


@dataclass(frozen=True)
class CategoryScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ForteScores:
    per_category: Mapping[str, CategoryScore]
    average_f1: float

    def as_dict(self) -> dict:
        return {
            "per_category": {
                cat: {"precision": s.precision, "recall": s.recall, "f1": s.f1}
                for cat, s in self.per_category.items()
            },
            "average_f1": self.average_f1,
        }


def _score_multisets(gen: Counter, ref: Counter, both_empty_score: float) -> CategoryScore:
    gen_total = sum(gen.values())
    ref_total = sum(ref.values())
    if gen_total == 0 and ref_total == 0:
        s = both_empty_score
        return CategoryScore(s, s, s)
    if gen_total == 0 or ref_total == 0:
        return CategoryScore(0.0, 0.0, 0.0)
    inter = sum((gen & ref).values())
    precision = inter / gen_total
    recall = inter / ref_total
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return CategoryScore(precision, recall, f1)


def forte_f1(
    generated: str,
    reference: str,
    lexicon: KeywordLexicon | None = None,
    config: NormalizationConfig = DEFAULT_NORMALIZATION,
    both_empty_score: float = 1.0,
    multiset: bool = False,
) -> ForteScores:
    """Score a generated report against its reference, category by category.

    Set semantics by default (each canonical term counts once per report);
    multiset=True keeps occurrence counts. When both reports miss a category
    entirely the category scores both_empty_score; when exactly one side is
    empty it scores 0.
    """
    if lexicon is None:
        lexicon = load_default_lexicon()
    gen_counts = extract_keyword_counts(generated, lexicon, config)
    ref_counts = extract_keyword_counts(reference, lexicon, config)
    per_category: dict[str, CategoryScore] = {}
    for cat in FORTE_CATEGORIES:
        g = gen_counts.get(cat, Counter())
        r = ref_counts.get(cat, Counter())
        if not multiset:
            g = Counter(dict.fromkeys(g, 1))
            r = Counter(dict.fromkeys(r, 1))
        per_category[cat] = _score_multisets(g, r, both_empty_score)
    avg = sum(s.f1 for s in per_category.values()) / len(FORTE_CATEGORIES)
    return ForteScores(per_category, avg)
