"""Claim extraction and claim-level precision for generated reports.

A claim is a contentful sentence of the generated report. Claims are
verified against the reference report either by a deterministic token
criterion or by an LLM judge speaking the chat-completion protocol.

The deterministic verifier checks token support only: every stemmed
content token of the claim must occur somewhere in the stemmed reference.
It does not model negation, so "cholelithiasis present" is counted as
supported by "no cholelithiasis". Use the llm judge when polarity matters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .errors import InputError, ProtocolError
from .judge import JudgeClient
from .stemming import stem
from .textproc import DEFAULT_NORMALIZATION, normalize, split_sentences, tokenize

__all__ = [
    "STOPWORDS",
    "Claim",
    "ClaimVerdict",
    "ClaimPrecision",
    "EXTRACTION_PROMPT_VERSION",
    "VERIFICATION_PROMPT_VERSION",
    "EXTRACTION_SYSTEM_PROMPT",
    "EXTRACTION_USER_TEMPLATE",
    "VERIFICATION_SYSTEM_PROMPT",
    "VERIFICATION_USER_TEMPLATE",
    "content_tokens",
    "extract_claims",
    "verify_claims",
    "claim_precision",
]

# Function words, bare negators, existence verbs, and cross-reference
# boilerplate. Negators are deliberately dropped so that deterministic
# verification stays a pure token-support check (see the polarity caveat
# in the module docstring). This list doubles as the content filter for
# sentence-level claim extraction: a sentence with only these tokens
# carries no assertion.
STOPWORDS = frozenset(
    """
    a an the and or nor but of in on at by for with within to from as into
    is are was were be been being am has have had having do does did
    it its this that these those there here which who whose whom what
    when where why how than then so such if while during per
    both each any all some few more most other one two
    above below again also please see refer
    no not without non
    present presents seen noted noting visualized visualised demonstrated
    demonstrates identified appears appear appearing evident shows shown
    """.split()
)

EXTRACTION_PROMPT_VERSION = "claims-extract/1"
VERIFICATION_PROMPT_VERSION = "claims-verify/1"

EXTRACTION_SYSTEM_PROMPT = (
    "You split a right-upper-quadrant ultrasound report into atomic factual "
    "claims. Respond with a JSON array of strings, one claim per element, in "
    "reading order. Output only the JSON array, with no commentary."
)

EXTRACTION_USER_TEMPLATE = "Report:\n{report}\n\nJSON array of claims:"

VERIFICATION_SYSTEM_PROMPT = (
    "You check claims from a generated ultrasound report against a reference "
    "report. For each claim decide whether the reference supports it, "
    "including polarity. Respond with a JSON array, one element per claim, "
    'each of the form {"supported": true|false, "rationale": "..."} in the '
    "same order as the claims. Output only the JSON array."
)

VERIFICATION_USER_TEMPLATE = (
    "Reference report:\n{reference}\n\nClaims:\n{claims}\n\nJSON array of verdicts:"
)


@dataclass(frozen=True)
class Claim:
    """One checkable statement lifted from a generated report."""

    text: str
    source_sentence_index: int
    content_tokens: tuple[str, ...]


@dataclass(frozen=True)
class ClaimVerdict:
    claim: Claim
    supported: bool
    judge: str  # "deterministic" or "llm"
    rationale: Optional[str] = None


class ClaimPrecision(NamedTuple):
    value: float
    no_claims: bool


def content_tokens(text: str) -> tuple[str, ...]:
    """Normalized tokens of `text` with stopwords removed, in order."""
    return tuple(
        t for t in tokenize(normalize(text, DEFAULT_NORMALIZATION)) if t not in STOPWORDS
    )


def _build_claim(text: str, index: int) -> Claim:
    return Claim(text=text, source_sentence_index=index, content_tokens=content_tokens(text))


def extract_claims(
    report: str,
    mode: str = "deterministic",
    client: JudgeClient | None = None,
) -> list[Claim]:
    """Split a report into claims.

    Deterministic mode keeps each sentence with at least one content token;
    `source_sentence_index` is the sentence's position in the full sentence
    list, so discarded sentences leave gaps. LLM mode asks the judge for a
    JSON array of claim strings and indexes them by array position.
    """
    if mode == "deterministic":
        claims = []
        for i, sentence in enumerate(split_sentences(report)):
            if content_tokens(sentence):
                claims.append(_build_claim(sentence, i))
        return claims
    if mode == "llm":
        if client is None:
            raise InputError("llm claim extraction requires a judge client")
        raw = client.chat_json(
            EXTRACTION_SYSTEM_PROMPT,
            EXTRACTION_USER_TEMPLATE.format(report=report),
        )
        if not isinstance(raw, list) or not all(
            isinstance(c, str) and c.strip() for c in raw
        ):
            raise ProtocolError(
                "claim extraction expects a JSON array of nonempty strings",
                payload=raw,
            )
        return [_build_claim(text.strip(), i) for i, text in enumerate(raw)]
    raise InputError(f"unknown claim extraction mode: {mode!r}")


def _stem_if_lower(token: str) -> str:
    return stem(token) if token == token.lower() else token


def verify_claims(
    claims: Sequence[Claim],
    reference: str,
    mode: str = "deterministic",
    client: JudgeClient | None = None,
) -> list[ClaimVerdict]:
    """Judge each claim against the reference; verdicts align with `claims`.

    Deterministic mode marks a claim supported when every stemmed content
    token occurs in the stemmed reference token set; an empty reference
    supports nothing. LLM mode sends all claims in one request and requires
    a structured verdict list with a rationale per claim.
    """
    if mode == "deterministic":
        ref_tokens = tokenize(normalize(reference, DEFAULT_NORMALIZATION))
        ref_stems = {_stem_if_lower(t) for t in ref_tokens}
        verdicts = []
        for claim in claims:
            stems = [_stem_if_lower(t) for t in claim.content_tokens]
            missing = sorted({s for s in stems if s not in ref_stems})
            supported = bool(ref_stems) and not missing
            if supported:
                rationale = "all content tokens occur in the reference"
            elif not ref_stems:
                rationale = "reference is empty"
            else:
                rationale = "tokens missing from reference: " + ", ".join(missing)
            verdicts.append(
                ClaimVerdict(
                    claim=claim,
                    supported=supported,
                    judge="deterministic",
                    rationale=rationale,
                )
            )
        return verdicts
    if mode == "llm":
        if client is None:
            raise InputError("llm claim verification requires a judge client")
        if not claims:
            return []
        raw = client.chat_json(
            VERIFICATION_SYSTEM_PROMPT,
            VERIFICATION_USER_TEMPLATE.format(
                reference=reference,
                claims=json.dumps([c.text for c in claims]),
            ),
        )
        if not isinstance(raw, list) or len(raw) != len(claims):
            raise ProtocolError(
                f"claim verification expects a JSON array of {len(claims)} verdicts",
                payload=raw,
            )
        verdicts = []
        for claim, item in zip(claims, raw):
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("supported"), bool)
                or not isinstance(item.get("rationale"), str)
                or not item["rationale"].strip()
            ):
                raise ProtocolError(
                    'each verdict must be {"supported": bool, "rationale": '
                    "nonempty str}",
                    payload=raw,
                )
            verdicts.append(
                ClaimVerdict(
                    claim=claim,
                    supported=item["supported"],
                    judge="llm",
                    rationale=item["rationale"],
                )
            )
        return verdicts
    raise InputError(f"unknown claim verification mode: {mode!r}")


def claim_precision(verdicts: Sequence[ClaimVerdict]) -> ClaimPrecision:
    """Fraction of supported claims; an empty claim set scores 1.0, flagged."""
    if not verdicts:
        return ClaimPrecision(1.0, True)
    supported = sum(1 for v in verdicts if v.supported)
    return ClaimPrecision(supported / len(verdicts), False)
