"""Diagnostic-label extraction, prevalence selection, cohort filtering,
and decision-prompt construction.

The 42-category table ships as a versioned data file with per-category
rule patterns. Rule-mode extraction is a token-phrase matcher over those
patterns; it is a documented approximation of LLM-based extraction, kept
deterministic so the suite runs with no model available.
"""

from __future__ import annotations

import csv
import datetime
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import NamedTuple, Optional, Sequence

from .errors import InputError, ProtocolError
from .judge import JudgeClient
from .textproc import DEFAULT_NORMALIZATION, normalize, tokenize

__all__ = [
    "ORGAN_SYSTEMS",
    "TOKYO_ICD_CODES",
    "ABLATION_CONFIGS",
    "LABELS_PROMPT_VERSION",
    "DiagnosticCategory",
    "LabelVector",
    "EncounterRecord",
    "PromptFeatures",
    "Exemplar",
    "PrevalenceTable",
    "FindingTotals",
    "CohortDecision",
    "load_categories",
    "extract_labels",
    "prevalence_filter",
    "total_findings",
    "parse_date",
    "read_encounter_table",
    "tokyo_cohort_filter",
    "load_decision_template",
    "load_exemplars",
    "build_decision_prompt",
    "parse_yes_no",
]

ORGAN_SYSTEMS = frozenset(
    {"hepatic", "biliary", "renal", "pancreatic", "vascular", "other"}
)

# Billing codes that admit a case into the cholecystectomy-decision cohort.
TOKYO_ICD_CODES = (
    "K81.0",
    "K81.9",
    "K80.20",
    "R10.811",
    "R10.819",
    "R19.00",
    "R50.9",
    "R79.82",
    "D72.829",
)

COHORT_WINDOW_DAYS = 15

ABLATION_CONFIGS = ("V", "V+ICD", "V+R", "V+ICD+R")

LABELS_PROMPT_VERSION = "labels-extract/1"

LABELS_SYSTEM_PROMPT = (
    "You extract binary diagnostic labels from a right-upper-quadrant "
    "ultrasound report. For every category id listed, answer whether the "
    "finding is asserted in the report. Respond with one JSON object "
    "mapping every category id to true or false. Output only the JSON "
    "object."
)

LABELS_USER_TEMPLATE = "Report:\n{report}\n\nCategory ids:\n{category_ids}\n\nJSON object:"


@dataclass(frozen=True)
class DiagnosticCategory:
    id: str
    display_name: str
    organ_system: str
    case_count: int
    reference_prevalence: float
    rule_patterns: tuple[str, ...]


@dataclass(frozen=True)
class LabelVector:
    """Binary findings for one case; values cover every category id."""

    case_id: str
    values: dict[str, bool]
    provenance: dict[str, str] = field(default_factory=dict)

    def positive_ids(self) -> tuple[str, ...]:
        return tuple(cid for cid, flag in self.values.items() if flag)


def _category_source() -> str:
    return (
        resources.files("ruqeval.data")
        .joinpath("diagnostic_categories.json")
        .read_text(encoding="utf-8")
    )


@lru_cache(maxsize=1)
def load_categories() -> tuple[DiagnosticCategory, ...]:
    """The shipped 42-category table, in prevalence-rank order."""
    doc = json.loads(_category_source())
    categories = []
    for entry in doc["categories"]:
        if entry["organ_system"] not in ORGAN_SYSTEMS:
            raise InputError(
                f"category {entry['id']}: unknown organ system {entry['organ_system']!r}"
            )
        categories.append(
            DiagnosticCategory(
                id=entry["id"],
                display_name=entry["display_name"],
                organ_system=entry["organ_system"],
                case_count=entry["case_count"],
                reference_prevalence=entry["reference_prevalence"],
                rule_patterns=tuple(entry["rule_patterns"]),
            )
        )
    ids = [c.id for c in categories]
    if len(categories) != 42 or len(set(ids)) != 42:
        raise InputError("category table must hold 42 unique ids")
    return tuple(categories)


@lru_cache(maxsize=1)
def _pattern_index() -> dict[str, tuple[tuple[str, ...], ...]]:
    # patterns are normalized through the same pipeline as reports, so
    # "positive murphy's sign" matches its punctuation-stripped form
    index = {}
    for category in load_categories():
        phrases = []
        for pattern in category.rule_patterns:
            tokens = tuple(tokenize(normalize(pattern, DEFAULT_NORMALIZATION)))
            if not tokens:
                raise InputError(f"category {category.id}: empty rule pattern")
            phrases.append(tokens)
        index[category.id] = tuple(phrases)
    return index


def _contains_phrase(tokens: Sequence[str], phrase: tuple[str, ...]) -> bool:
    width = len(phrase)
    return any(
        tuple(tokens[start : start + width]) == phrase
        for start in range(len(tokens) - width + 1)
    )


def extract_labels(
    report: str,
    mode: str = "rule",
    client: JudgeClient | None = None,
    case_id: str = "",
) -> LabelVector:
    """Binary labels over all 42 categories for one report.

    Rule mode marks a category positive when any of its patterns occurs as
    a contiguous token phrase in the normalized report. LLM mode asks the
    judge for one JSON object covering every category id.
    """
    categories = load_categories()
    if mode == "rule":
        tokens = list(tokenize(normalize(report, DEFAULT_NORMALIZATION)))
        index = _pattern_index()
        values = {
            c.id: any(_contains_phrase(tokens, p) for p in index[c.id])
            for c in categories
        }
        return LabelVector(
            case_id=case_id,
            values=values,
            provenance={cid: "rule" for cid in values},
        )
    if mode == "llm":
        if client is None:
            raise InputError("llm label extraction requires a judge client")
        ids = [c.id for c in categories]
        raw = client.chat_json(
            LABELS_SYSTEM_PROMPT,
            LABELS_USER_TEMPLATE.format(report=report, category_ids="\n".join(ids)),
        )
        if not isinstance(raw, dict) or set(raw) != set(ids):
            raise ProtocolError(
                "label extraction expects a JSON object covering all 42 category ids",
                payload=raw,
            )
        if not all(isinstance(v, bool) for v in raw.values()):
            raise ProtocolError("label answers must be JSON booleans", payload=raw)
        return LabelVector(
            case_id=case_id,
            values={cid: raw[cid] for cid in ids},
            provenance={cid: "llm" for cid in ids},
        )
    raise InputError(f"unknown label extraction mode: {mode!r}")


class PrevalenceTable(NamedTuple):
    retained: tuple[str, ...]
    prevalence: dict[str, float]


def prevalence_filter(
    corpus: Sequence[LabelVector], threshold: float = 0.05
) -> PrevalenceTable:
    """Categories whose positive fraction is strictly above `threshold`.

    Retained ids keep the category-table order. Every vector must cover
    the full category id set.
    """
    if not corpus:
        raise InputError("prevalence_filter requires a nonempty corpus")
    categories = load_categories()
    prevalence = {}
    for category in categories:
        positives = 0
        for vector in corpus:
            if category.id not in vector.values:
                raise InputError(
                    f"case {vector.case_id!r} is missing category {category.id}"
                )
            positives += bool(vector.values[category.id])
        prevalence[category.id] = positives / len(corpus)
    retained = tuple(
        c.id for c in categories if prevalence[c.id] > threshold
    )
    return PrevalenceTable(retained=retained, prevalence=prevalence)


class FindingTotals(NamedTuple):
    total: int
    mean_per_case: float


def total_findings(corpus: Sequence[LabelVector]) -> FindingTotals:
    """Total positive findings and the arithmetic mean per case."""
    if not corpus:
        raise InputError("total_findings requires a nonempty corpus")
    per_case = [sum(bool(v) for v in vector.values.values()) for vector in corpus]
    total = sum(per_case)
    return FindingTotals(total=total, mean_per_case=total / len(corpus))


# ------------------------------------------------------------------ cohort


def parse_date(text: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text.strip())
    except (ValueError, AttributeError) as exc:
        raise InputError(f"unparsable ISO-8601 date: {text!r}") from exc


@dataclass(frozen=True)
class EncounterRecord:
    patient_id: str
    icd_code: str
    encounter_date: datetime.date

    def __post_init__(self):
        if not self.icd_code:
            raise InputError("encounter icd_code must be nonempty")
        if not isinstance(self.encounter_date, datetime.date):
            raise InputError("encounter_date must be a calendar date")

    @classmethod
    def from_strings(cls, patient_id: str, icd_code: str, encounter_date: str):
        return cls(patient_id, icd_code, parse_date(encounter_date))


def read_encounter_table(lines) -> list[EncounterRecord]:
    """Parse a delimited table with columns patient_id, icd_code, encounter_date."""
    reader = csv.DictReader(lines)
    required = {"patient_id", "icd_code", "encounter_date"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise InputError(
            "encounter table must have columns patient_id, icd_code, encounter_date"
        )
    records = []
    for row_number, row in enumerate(reader, start=2):
        try:
            records.append(
                EncounterRecord.from_strings(
                    row["patient_id"], row["icd_code"], row["encounter_date"]
                )
            )
        except InputError as exc:
            raise InputError(f"encounter table line {row_number}: {exc}") from exc
    return records


class CohortDecision(NamedTuple):
    eligible: bool
    matched_codes: tuple[str, ...]


def tokyo_cohort_filter(
    encounters: Sequence[EncounterRecord],
    exam_date,
    code_set: Sequence[str] | None = None,
) -> CohortDecision:
    """Eligibility for the cholecystectomy cohort.

    True when at least one encounter carries a qualifying code dated within
    15 days of the exam, inclusive at both endpoints. Returns the sorted
    set of codes that matched.
    """
    if isinstance(exam_date, str):
        exam_date = parse_date(exam_date)
    if code_set is None:
        code_set = TOKYO_ICD_CODES
    codes = set(code_set)
    matched = {
        e.icd_code
        for e in encounters
        if e.icd_code in codes
        and abs((e.encounter_date - exam_date).days) <= COHORT_WINDOW_DAYS
    }
    return CohortDecision(eligible=bool(matched), matched_codes=tuple(sorted(matched)))


# --------------------------------------------------------- decision prompts


@dataclass(frozen=True)
class PromptFeatures:
    """Feature block for one case, gated by the ablation configuration."""

    variables: dict[str, str]
    icd_codes: tuple[str, ...] = ()
    report_text: Optional[str] = None
    ablation_config: str = "V"

    def validate(self) -> None:
        if self.ablation_config not in ABLATION_CONFIGS:
            raise InputError(
                f"ablation_config must be one of {ABLATION_CONFIGS}, "
                f"got {self.ablation_config!r}"
            )
        if not self.variables:
            raise InputError("patient variables must be nonempty")
        wants_icd = "ICD" in self.ablation_config.split("+")
        wants_report = "R" in self.ablation_config.split("+")
        if wants_icd and not self.icd_codes:
            raise InputError(f"{self.ablation_config} requires icd_codes")
        if not wants_icd and self.icd_codes:
            raise InputError(f"{self.ablation_config} forbids icd_codes")
        if wants_report and not self.report_text:
            raise InputError(f"{self.ablation_config} requires report_text")
        if not wants_report and self.report_text is not None:
            raise InputError(f"{self.ablation_config} forbids report_text")


class Exemplar(NamedTuple):
    features: PromptFeatures
    answer: bool


@lru_cache(maxsize=1)
def load_decision_template() -> dict:
    text = (
        resources.files("ruqeval.data")
        .joinpath("decision_prompt.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


def _parse_exemplar(entry: dict) -> Exemplar:
    features = PromptFeatures(
        variables=dict(entry["variables"]),
        icd_codes=tuple(entry.get("icd_codes") or ()),
        report_text=entry.get("report_text"),
        ablation_config=entry["ablation_config"],
    )
    features.validate()
    answer = str(entry["answer"]).strip().lower()
    if answer not in {"yes", "no"}:
        raise InputError(f"exemplar answer must be Yes or No, got {entry['answer']!r}")
    return Exemplar(features=features, answer=answer == "yes")


def load_exemplars(source=None) -> list[Exemplar]:
    """Few-shot exemplars from a JSON file; defaults to the shipped set."""
    if source is None:
        text = (
            resources.files("ruqeval.data")
            .joinpath("decision_exemplars.json")
            .read_text(encoding="utf-8")
        )
    elif hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
        return [_parse_exemplar(entry) for entry in doc["exemplars"]]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed exemplar file: {exc}") from exc


def _feature_block(features: PromptFeatures) -> str:
    parts = ["Patient variables:"]
    for key in sorted(features.variables):
        parts.append(f"- {key}: {features.variables[key]}")
    if "ICD" in features.ablation_config.split("+"):
        parts.append("ICD codes: " + ", ".join(features.icd_codes))
    if "R" in features.ablation_config.split("+"):
        parts.append("Report:")
        parts.append(features.report_text.strip())
    return "\n".join(parts)


def build_decision_prompt(
    features: PromptFeatures, exemplars: Sequence[Exemplar] = ()
) -> str:
    """Deterministic cholecystectomy-decision prompt for one case.

    Layout: system instruction, numbered exemplars, then the case block
    and the final question. Exemplars must share the case's ablation
    config so no forbidden section leaks into the prompt.
    """
    features.validate()
    template = load_decision_template()
    sections = [template["system_instruction"]]
    for i, exemplar in enumerate(exemplars, start=1):
        exemplar.features.validate()
        if exemplar.features.ablation_config != features.ablation_config:
            raise InputError(
                "exemplar ablation_config must match the case "
                f"({exemplar.features.ablation_config!r} != {features.ablation_config!r})"
            )
        answer = "Yes" if exemplar.answer else "No"
        sections.append(
            f"Example {i}:\n{_feature_block(exemplar.features)}\nAnswer: {answer}"
        )
    sections.append(
        f"Case:\n{_feature_block(features)}\n{template['question']}\nAnswer:"
    )
    return "\n\n".join(sections)


def parse_yes_no(response: str) -> bool:
    """Leading-token yes/no, case-insensitive; anything else is an error."""
    match = re.match(r"\s*([A-Za-z]+)", response or "")
    if match:
        token = match.group(1).lower()
        if token == "yes":
            return True
        if token == "no":
            return False
    raise ProtocolError(
        f"expected a Yes/No answer, got {response!r}", payload=response
    )
