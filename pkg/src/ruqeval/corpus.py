"""Corpus ingestion: line-delimited report pairs and score-matrix tables.

A corpus file holds one JSON object per line with fields id, generated,
reference, and an optional meta map. A score matrix is a CSV whose first
column is the case id and whose remaining columns come in score/truth
pairs, the truth column carrying a ``__truth`` suffix.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .errors import InputError
from .stats import ScoreMatrix

__all__ = ["CorpusRecord", "load_corpus", "load_score_matrix", "TRUTH_SUFFIX"]

TRUTH_SUFFIX = "__truth"

_RECORD_KEYS = {"id", "generated", "reference", "meta"}


@dataclass(frozen=True)
class CorpusRecord:
    """One generated/reference report pair plus free-form metadata."""

    id: str
    generated: str
    reference: str
    meta: Mapping[str, object] = field(default_factory=dict)


def _parse_record(obj: object, line_number: int) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise InputError(f"line {line_number}: record must be a JSON object")
    unknown = set(obj) - _RECORD_KEYS
    if unknown:
        raise InputError(
            f"line {line_number}: unknown fields {sorted(unknown)}; "
            f"expected {sorted(_RECORD_KEYS)}"
        )
    for key in ("id", "generated", "reference"):
        if key not in obj:
            raise InputError(f"line {line_number}: missing field {key!r}")
        if not isinstance(obj[key], str):
            raise InputError(f"line {line_number}: field {key!r} must be a string")
    if not obj["id"]:
        raise InputError(f"line {line_number}: id must be nonempty")
    meta = obj.get("meta", {})
    if not isinstance(meta, dict):
        raise InputError(f"line {line_number}: meta must be an object")
    return CorpusRecord(
        id=obj["id"], generated=obj["generated"], reference=obj["reference"], meta=meta
    )


def load_corpus(source: Union[str, Path, io.TextIOBase]) -> list[CorpusRecord]:
    """Read a line-delimited corpus, preserving file order.

    Blank lines are permitted and skipped; any other unparseable line is an
    error citing its line number. Duplicate record ids are rejected.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as handle:
                return load_corpus(handle)
        except OSError as exc:
            raise InputError(f"cannot read corpus {source}: {exc}") from None
    records: list[CorpusRecord] = []
    seen: set[str] = set()
    for line_number, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"line {line_number}: invalid JSON ({exc.msg})") from None
        record = _parse_record(obj, line_number)
        if record.id in seen:
            raise InputError(f"line {line_number}: duplicate record id {record.id!r}")
        seen.add(record.id)
        records.append(record)
    return records


def _parse_cell(value: str, line_number: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise InputError(
            f"line {line_number}: column {column!r} has non-numeric value {value!r}"
        ) from None


def load_score_matrix(source: Union[str, Path, io.TextIOBase]) -> ScoreMatrix:
    """Read a score/truth CSV into a ScoreMatrix.

    Header layout: case-id column first, then one score column per label
    and a matching ``<label>__truth`` column (any order). A cell pair may
    be left blank on both sides to mark the cell absent; blank on exactly
    one side is an error.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8", newline="") as handle:
                return load_score_matrix(handle)
        except OSError as exc:
            raise InputError(f"cannot read score matrix {source}: {exc}") from None
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("score matrix is empty") from None
    if len(header) < 3:
        raise InputError("score matrix needs a case-id column and a score/truth pair")
    columns = header[1:]
    if len(set(columns)) != len(columns):
        raise InputError("duplicate column names in score matrix header")
    score_cols = [c for c in columns if not c.endswith(TRUTH_SUFFIX)]
    truth_cols = {c[: -len(TRUTH_SUFFIX)] for c in columns if c.endswith(TRUTH_SUFFIX)}
    if set(score_cols) != truth_cols:
        missing_truth = sorted(set(score_cols) - truth_cols)
        missing_score = sorted(truth_cols - set(score_cols))
        raise InputError(
            "score/truth columns must pair up: "
            f"labels without truth {missing_truth}, truth without scores {missing_score}"
        )
    position = {name: i + 1 for i, name in enumerate(columns)}

    case_ids: list[str] = []
    rows_scores: list[list[float]] = []
    rows_truth: list[list[float]] = []
    rows_mask: list[list[bool]] = []
    seen: set[str] = set()
    any_masked = False
    for line_number, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise InputError(
                f"line {line_number}: expected {len(header)} cells, got {len(row)}"
            )
        case_id = row[0].strip()
        if not case_id:
            raise InputError(f"line {line_number}: empty case id")
        if case_id in seen:
            raise InputError(f"line {line_number}: duplicate case id {case_id!r}")
        seen.add(case_id)
        case_ids.append(case_id)
        s_row: list[float] = []
        t_row: list[float] = []
        m_row: list[bool] = []
        for label in score_cols:
            raw_s = row[position[label]].strip()
            raw_t = row[position[label + TRUTH_SUFFIX]].strip()
            if not raw_s and not raw_t:
                s_row.append(0.0)
                t_row.append(0.0)
                m_row.append(False)
                any_masked = True
                continue
            if not raw_s or not raw_t:
                raise InputError(
                    f"line {line_number}: label {label!r} has a blank score or "
                    "truth cell; blank both to mark the cell absent"
                )
            s_row.append(_parse_cell(raw_s, line_number, label))
            t_value = _parse_cell(raw_t, line_number, label + TRUTH_SUFFIX)
            if t_value not in (0.0, 1.0):
                raise InputError(
                    f"line {line_number}: truth for {label!r} must be 0 or 1"
                )
            t_row.append(t_value)
            m_row.append(True)
        rows_scores.append(s_row)
        rows_truth.append(t_row)
        rows_mask.append(m_row)
    if not case_ids:
        raise InputError("score matrix has no data rows")
    return ScoreMatrix(
        case_ids=tuple(case_ids),
        label_ids=tuple(score_cols),
        scores=np.array(rows_scores, dtype=np.float64),
        truth=np.array(rows_truth, dtype=np.float64),
        mask=np.array(rows_mask, dtype=bool) if any_masked else None,
    )
