"""Normalization, tokenization, n-gram and LCS behavior."""

from __future__ import annotations

import itertools
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruqeval.errors import InputError
from ruqeval.textproc import (
    DEFAULT_NORMALIZATION,
    NormalizationConfig,
    lcs_length,
    ngrams,
    normalize,
    split_sentences,
    tokenize,
)

import oracles

ALL_CONFIGS = [
    NormalizationConfig(
        lowercase=lc,
        strip_punctuation=sp,
        collapse_whitespace=cw,
        unicode_nfkc=nf,
    )
    for lc, sp, cw, nf in itertools.product([True, False], repeat=4)
]


def test_normalize_golden_sentence() -> None:
    assert normalize("The  Liver is NORMAL.") == "the liver is normal"


def test_normalize_keeps_measurement_symbols() -> None:
    # x (multiplication sign) is category Sm, not punctuation
    assert normalize("3.2 × 4.1 cm") == "3 2 × 4 1 cm"


def test_normalize_collapses_tabs_and_newlines() -> None:
    assert normalize("no\tfocal\nlesion") == "no focal lesion"


def test_normalize_strips_unicode_punctuation_classes() -> None:
    out = normalize("wall—thickening “mild”")
    assert out == "wall thickening mild"
    assert all(not unicodedata.category(c).startswith("P") for c in out)


@pytest.mark.parametrize("config", ALL_CONFIGS)
@given(text=st.text(max_size=80))
@settings(max_examples=30, deadline=None)
def test_normalize_is_idempotent(config: NormalizationConfig, text: str) -> None:
    once = normalize(text, config)
    assert normalize(once, config) == once


@given(text=st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_normalize_default_output_charclasses(text: str) -> None:
    out = normalize(text)
    for c in out:
        assert not unicodedata.category(c).startswith("P")
        assert c == c.lower()
    assert "  " not in out
    assert out == out.strip()


_TOKEN_TEXT = st.text(
    alphabet=st.characters(categories=("Lu", "Ll", "Nd", "Po"), include_characters=" \t\n"),
    max_size=120,
)


@given(text=_TOKEN_TEXT)
@settings(max_examples=150, deadline=None)
def test_tokenize_matches_str_split(text: str) -> None:
    assert list(tokenize(text).tokens) == text.split()


@given(text=_TOKEN_TEXT)
@settings(max_examples=150, deadline=None)
def test_tokenize_span_invariants(text: str) -> None:
    seq = tokenize(text)
    assert len(seq.tokens) == len(seq.source_spans)
    prev_end = -1
    for token, (start, end) in zip(seq.tokens, seq.source_spans):
        assert token != ""
        assert start > prev_end
        assert text[start:end] == token
        prev_end = end


def test_tokenize_empty_string() -> None:
    seq = tokenize("")
    assert seq.tokens == ()
    assert len(seq) == 0


@given(
    tokens=st.lists(st.sampled_from("abcde"), max_size=12),
    n=st.integers(min_value=1, max_value=4),
)
@settings(max_examples=150, deadline=None)
def test_ngrams_match_window_oracle(tokens: list[str], n: int) -> None:
    counted = ngrams(tokens, n)
    windows = oracles.ngram_windows(tokens, n)
    assert sum(counted.values()) == max(0, len(tokens) - n + 1)
    assert sum(counted.values()) == len(windows)
    for gram in set(windows):
        assert counted[gram] == windows.count(gram)


def test_ngrams_rejects_nonpositive_order() -> None:
    with pytest.raises(InputError):
        ngrams(["a", "b"], 0)


def test_ngrams_accepts_token_sequence() -> None:
    seq = tokenize("the liver is normal")
    assert ngrams(seq, 2)[("liver", "is")] == 1


@given(
    a=st.lists(st.sampled_from("abcd"), max_size=14),
    b=st.lists(st.sampled_from("abcd"), max_size=14),
)
@settings(max_examples=200, deadline=None)
def test_lcs_matches_full_table_oracle(a: list[str], b: list[str]) -> None:
    got = lcs_length(a, b)
    assert got == oracles.lcs_full_table(a, b)
    assert got == lcs_length(b, a)
    assert got <= min(len(a), len(b))


@given(a=st.lists(st.sampled_from("abcd"), max_size=20))
@settings(max_examples=60, deadline=None)
def test_lcs_of_sequence_with_itself(a: list[str]) -> None:
    assert lcs_length(a, a) == len(a)


def test_lcs_known_value() -> None:
    assert lcs_length("gallbladder", "bladder") == 7
    assert lcs_length(["no", "free", "fluid"], ["free", "fluid", "seen"]) == 2


def test_split_sentences_periods_and_newlines() -> None:
    text = "The liver is normal. No gallstones.\nMild ascites"
    assert split_sentences(text) == [
        "The liver is normal",
        "No gallstones",
        "Mild ascites",
    ]


def test_split_sentences_drops_empty_segments() -> None:
    assert split_sentences("..  .\n\n") == []


def test_default_config_is_all_on() -> None:
    assert DEFAULT_NORMALIZATION == NormalizationConfig(True, True, True, True)
