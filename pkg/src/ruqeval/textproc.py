"""Text normalization, tokenization and n-gram utilities.

Every metric in the package funnels text through this module so that
candidate and reference strings are compared under one deterministic
preprocessing pipeline.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InputError
from .stemming import stem

__all__ = [
    "NormalizationConfig",
    "DEFAULT_NORMALIZATION",
    "TokenSequence",
    "normalize",
    "tokenize",
    "ngrams",
    "lcs_length",
    "split_sentences",
    "stem",
    "stem_tokens",
]


@dataclass(frozen=True)
class NormalizationConfig:
    """Switches for the text normalization pipeline.

    Passes run in a fixed order: Unicode NFKC, lowercasing, punctuation
    stripping, whitespace collapsing. Punctuation means Unicode category P*;
    symbols (category S*) survive, so measurement glyphs are preserved.
    """

    lowercase: bool = True
    strip_punctuation: bool = True
    collapse_whitespace: bool = True
    unicode_nfkc: bool = True


DEFAULT_NORMALIZATION = NormalizationConfig()

_WS_RE = re.compile(r"\s+")
_NONSPACE_RE = re.compile(r"\S+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?\n]+")


def _strip_punct(text: str) -> str:
    return "".join(
        " " if unicodedata.category(c).startswith("P") else c for c in text
    )


def normalize(text: str, config: NormalizationConfig = DEFAULT_NORMALIZATION) -> str:
    """Normalize free text; idempotent for any config combination."""
    if config.unicode_nfkc:
        text = unicodedata.normalize("NFKC", text)
    if config.lowercase:
        text = text.lower()
    if config.strip_punctuation:
        text = _strip_punct(text)
    if config.collapse_whitespace:
        text = _WS_RE.sub(" ", text).strip()
    return text


@dataclass(frozen=True)
class TokenSequence:
    """Whitespace tokens plus their (start, end) offsets into the source string."""

    tokens: tuple[str, ...]
    source_spans: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)


def tokenize(text: str) -> TokenSequence:
    """Split text on whitespace, keeping character offsets for each token."""
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    for m in _NONSPACE_RE.finditer(text):
        tokens.append(m.group())
        spans.append(m.span())
    return TokenSequence(tuple(tokens), tuple(spans))


def _as_tokens(tokens: "TokenSequence | Sequence[str]") -> tuple[str, ...]:
    if isinstance(tokens, TokenSequence):
        return tokens.tokens
    return tuple(tokens)


def ngrams(tokens: "TokenSequence | Sequence[str]", n: int) -> Counter:
    """Multiset of contiguous n-grams as a Counter keyed by token tuples."""
    if n < 1:
        raise InputError(f"n-gram order must be >= 1, got {n}")
    toks = _as_tokens(tokens)
    return Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1))


def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence of two sequences.

    Two-row dynamic program; O(len(a)*len(b)) time, O(len(b)) space.
    """
    xs = _as_tokens(a) if isinstance(a, TokenSequence) else list(a)
    ys = _as_tokens(b) if isinstance(b, TokenSequence) else list(b)
    if not xs or not ys:
        return 0
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0]
        for j, y in enumerate(ys, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def split_sentences(text: str) -> list[str]:
    """Naive sentence split on periods, question/exclamation marks and newlines.

    Deliberately simple: abbreviations and decimal points also split. Callers
    that need more should segment upstream and feed sentences directly.
    """
    return [s.strip() for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]


def stem_tokens(tokens: "TokenSequence | Iterable[str]") -> tuple[str, ...]:
    """Stem every token; convenience wrapper used by METEOR and claim checks."""
    return tuple(stem(t) for t in tokens)
