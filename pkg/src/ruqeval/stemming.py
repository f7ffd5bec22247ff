"""Porter-style suffix stripping for English tokens.

Classic rule-based stemmer: within each step the longest matching suffix is
selected, its condition is evaluated against the remaining stem, and the
rewrite is applied or the whole step is skipped. There is no fallthrough to
shorter suffixes once a longer one has matched. Tokens shorter than three
characters, and tokens that are not pure ASCII letters, are returned
unchanged.
"""

from __future__ import annotations

from .errors import InputError

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        # y is a vowel when preceded by a consonant, a consonant otherwise
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-consonant spans in [C](VC)^m[V]."""
    m = 0
    i = 0
    n = len(stem)
    while i < n and _is_consonant(stem, i):
        i += 1
    while i < n:
        while i < n and not _is_consonant(stem, i):
            i += 1
        if i >= n:
            break
        m += 1
        while i < n and _is_consonant(stem, i):
            i += 1
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    """consonant-vowel-consonant ending where the final consonant is not w, x or y."""
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _apply_first(word: str, rules: tuple[tuple[str, str, int], ...]) -> str:
    """Apply the longest-suffix rule of a step.

    ``rules`` are (suffix, replacement, min_measure) triples ordered longest
    suffix first. Once a suffix matches, its measure condition decides the
    step's outcome; shorter suffixes are not consulted.
    """
    for suffix, repl, min_m in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > min_m:
                return stem + repl
            return word
    return word


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        stem = word[:-3]
        if _measure(stem) > 0:
            return stem + "ee"
        return word
    applied = False
    if word.endswith("ed"):
        stem = word[:-2]
        if _contains_vowel(stem):
            word = stem
            applied = True
    elif word.endswith("ing"):
        stem = word[:-3]
        if _contains_vowel(stem):
            word = stem
            applied = True
    if applied:
        if word.endswith(("at", "bl", "iz")):
            return word + "e"
        if _ends_double_consonant(word) and word[-1] not in "lsz":
            return word[:-1]
        if _measure(word) == 1 and _ends_cvc(word):
            return word + "e"
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_STEP2_RULES = (
    ("ational", "ate", 0),
    ("ization", "ize", 0),
    ("iveness", "ive", 0),
    ("fulness", "ful", 0),
    ("ousness", "ous", 0),
    ("tional", "tion", 0),
    ("biliti", "ble", 0),
    ("entli", "ent", 0),
    ("ousli", "ous", 0),
    ("ation", "ate", 0),
    ("alism", "al", 0),
    ("aliti", "al", 0),
    ("iviti", "ive", 0),
    ("enci", "ence", 0),
    ("anci", "ance", 0),
    ("izer", "ize", 0),
    ("abli", "able", 0),
    ("alli", "al", 0),
    ("ator", "ate", 0),
    ("eli", "e", 0),
)

_STEP3_RULES = (
    ("icate", "ic", 0),
    ("ative", "", 0),
    ("alize", "al", 0),
    ("iciti", "ic", 0),
    ("ical", "ic", 0),
    ("ness", "", 0),
    ("ful", "", 0),
)

_STEP4_RULES = (
    ("ement", "", 1),
    ("ance", "", 1),
    ("ence", "", 1),
    ("able", "", 1),
    ("ible", "", 1),
    ("ment", "", 1),
    ("ant", "", 1),
    ("ent", "", 1),
    ("ism", "", 1),
    ("ate", "", 1),
    ("iti", "", 1),
    ("ous", "", 1),
    ("ive", "", 1),
    ("ize", "", 1),
    ("al", "", 1),
    ("er", "", 1),
    ("ic", "", 1),
    ("ou", "", 1),
)


def _step4(word: str) -> str:
    # "ion" carries an extra stem condition (ends s or t) so it lives outside
    # the shared rule table; no table suffix can co-match a word ending "ion".
    for suffix, repl, min_m in _STEP4_RULES:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > min_m:
                return stem + repl
            return word
    if word.endswith("ion"):
        stem = word[:-3]
        if stem.endswith(("s", "t")) and _measure(stem) > 1:
            return stem
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return word


def _step5b(word: str) -> str:
    if word.endswith("ll") and _measure(word) > 1:
        return word[:-1]
    return word


def stem(token: str) -> str:
    """Stem one lowercase token.

    Tokens shorter than 3 characters, or containing anything other than
    ASCII letters, pass through unchanged.
    """
    if not token:
        raise InputError("cannot stem an empty token")
    if token != token.lower():
        raise InputError(f"stem() expects lowercase input, got {token!r}")
    if len(token) < 3 or not (token.isascii() and token.isalpha()):
        return token
    word = _step1a(token)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_first(word, _STEP2_RULES)
    word = _apply_first(word, _STEP3_RULES)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word
