"""Corpus-level evaluation: run configuration, metric orchestration, and the
serialized report document.

evaluate_corpus fans per-record scoring out to a bounded thread pool and
reassembles results in input order, so the emitted document is identical
for any pool size. Judge failures in llm mode are recorded as nulls on the
affected record and counted at the document level; they are never dropped
silently.
"""

from __future__ import annotations

import csv
import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from . import __version__
from .claims import (
    EXTRACTION_PROMPT_VERSION,
    VERIFICATION_PROMPT_VERSION,
    claim_precision,
    extract_claims,
    verify_claims,
)
from .corpus import CorpusRecord
from .errors import (
    DegenerateInputError,
    InputError,
    InternalError,
    ProtocolError,
    TransportError,
)
from .forte import KeywordLexicon, forte_f1, load_default_lexicon, parse_lexicon
from .judge import JudgeClient, JudgeConfig
from .nlg import corpus_bleu, corpus_meteor, corpus_rouge_l, corpus_rouge_n, nlg_scores
from .stats import bootstrap_ci, paired_t_test, wilcoxon_signed_rank
from .textproc import DEFAULT_NORMALIZATION, NormalizationConfig, normalize, tokenize

__all__ = [
    "RunConfig",
    "MetricReportDoc",
    "evaluate_corpus",
    "verify_report",
    "compare_systems",
    "write_flat_table",
    "METRIC_TOGGLES",
    "NLG_METRIC_NAMES",
]

METRIC_TOGGLES = ("nlg", "forte", "claims")
NLG_METRIC_NAMES = ("bleu1", "bleu4", "rouge1", "rougeL", "meteor")
CLAIMS_MODES = ("deterministic", "llm")
DEFAULT_CI_LEVEL = 0.95


@dataclass(frozen=True)
class RunConfig:
    """Everything an evaluation run depends on; echoed verbatim into output.

    Worker-pool size is deliberately NOT part of the config: it may not
    influence results, so it may not appear in the echoed document either.
    """

    normalization: NormalizationConfig = DEFAULT_NORMALIZATION
    lexicon_path: Optional[str] = None
    judge: Optional[JudgeConfig] = None
    metrics: tuple[str, ...] = METRIC_TOGGLES
    claims_mode: str = "deterministic"
    seed: int = 0
    output_path: Optional[str] = None
    bootstrap_replicates: int = 2000

    def validate(self) -> None:
        if not self.metrics:
            raise InputError("at least one metric family must be enabled")
        unknown = set(self.metrics) - set(METRIC_TOGGLES)
        if unknown:
            raise InputError(
                f"unknown metric toggles {sorted(unknown)}; "
                f"expected a subset of {list(METRIC_TOGGLES)}"
            )
        if len(set(self.metrics)) != len(self.metrics):
            raise InputError("duplicate metric toggles")
        if self.claims_mode not in CLAIMS_MODES:
            raise InputError(
                f"claims_mode must be one of {list(CLAIMS_MODES)}, "
                f"got {self.claims_mode!r}"
            )
        if "claims" in self.metrics and self.claims_mode == "llm" and self.judge is None:
            raise InputError("llm claims mode requires a judge config")
        if self.judge is not None:
            self.judge.validate()
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.bootstrap_replicates < 100:
            raise InputError(
                f"bootstrap_replicates must be >= 100, got {self.bootstrap_replicates}"
            )

    def echo(self) -> dict:
        """Stable dict form for the report's config section. No secrets:
        judge credentials live in the environment, never in the config."""
        judge = None
        if self.judge is not None:
            judge = {
                "endpoint": self.judge.endpoint,
                "model_name": self.judge.model_name,
                "timeout": self.judge.timeout,
                "max_retries": self.judge.max_retries,
                "temperature": self.judge.temperature,
            }
        return {
            "normalization": {
                "lowercase": self.normalization.lowercase,
                "strip_punctuation": self.normalization.strip_punctuation,
                "collapse_whitespace": self.normalization.collapse_whitespace,
                "unicode_nfkc": self.normalization.unicode_nfkc,
            },
            "lexicon_path": self.lexicon_path,
            "judge": judge,
            "metrics": list(self.metrics),
            "claims_mode": self.claims_mode,
            "seed": self.seed,
            "output_path": self.output_path,
            "bootstrap_replicates": self.bootstrap_replicates,
        }


@dataclass(frozen=True)
class MetricReportDoc:
    """One evaluation run, serialized with stable key order and floats."""

    config: dict
    seed: int
    n_records: int
    judge_failures: int
    per_record: tuple[dict, ...]
    aggregates: dict
    corpus_level: Optional[dict]
    prompt_versions: dict
    tool_name: str = "ruqeval"
    tool_version: str = __version__
    comparisons: Optional[dict] = None

    def as_dict(self) -> dict:
        return {
            "tool": {"name": self.tool_name, "version": self.tool_version},
            "seed": self.seed,
            "config": self.config,
            "prompt_versions": self.prompt_versions,
            "n_records": self.n_records,
            "judge_failures": self.judge_failures,
            "per_record": list(self.per_record),
            "aggregates": self.aggregates,
            "corpus_level": self.corpus_level,
            "comparisons": self.comparisons,
        }

    def to_json_bytes(self) -> bytes:
        return (
            json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"
        ).encode("utf-8")

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_json_bytes())

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricReportDoc":
        try:
            return cls(
                config=doc["config"],
                seed=doc["seed"],
                n_records=doc["n_records"],
                judge_failures=doc["judge_failures"],
                per_record=tuple(doc["per_record"]),
                aggregates=doc["aggregates"],
                corpus_level=doc.get("corpus_level"),
                prompt_versions=doc.get("prompt_versions", {}),
                tool_name=doc.get("tool", {}).get("name", "ruqeval"),
                tool_version=doc.get("tool", {}).get("version", "unknown"),
                comparisons=doc.get("comparisons"),
            )
        except KeyError as exc:
            raise InputError(f"report document missing field {exc.args[0]!r}") from None

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MetricReportDoc":
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read report document {path}: {exc}") from None
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not a valid report document ({exc.msg})") from None
        if not isinstance(doc, dict):
            raise InputError(f"{path}: report document must be a JSON object")
        return cls.from_dict(doc)


def _load_lexicon(cfg: RunConfig) -> KeywordLexicon:
    if cfg.lexicon_path is None:
        return load_default_lexicon()
    return parse_lexicon(cfg.lexicon_path)


def _evaluate_record(
    record: CorpusRecord,
    cfg: RunConfig,
    lexicon: KeywordLexicon,
    synonyms: tuple[tuple[str, ...], ...],
    client: Optional[JudgeClient],
) -> dict:
    row: dict = {"id": record.id}
    if record.meta:
        row["meta"] = dict(record.meta)
    gen_tokens = tokenize(normalize(record.generated, cfg.normalization))
    ref_tokens = tokenize(normalize(record.reference, cfg.normalization))
    if "nlg" in cfg.metrics:
        row["nlg"] = nlg_scores(gen_tokens, ref_tokens, synonyms).as_dict()
    if "forte" in cfg.metrics:
        scores = forte_f1(record.generated, record.reference, lexicon, cfg.normalization)
        row["forte"] = scores.as_dict()
    if "claims" in cfg.metrics:
        try:
            claims = extract_claims(record.generated, mode=cfg.claims_mode, client=client)
            verdicts = verify_claims(
                claims, record.reference, mode=cfg.claims_mode, client=client
            )
            precision = claim_precision(verdicts)
            row["claims"] = {
                "precision": precision.value,
                "no_claims": precision.no_claims,
                "n_claims": len(verdicts),
                "n_supported": sum(1 for v in verdicts if v.supported),
                "error": None,
            }
        except (TransportError, ProtocolError) as exc:
            row["claims"] = {
                "precision": None,
                "no_claims": None,
                "n_claims": None,
                "n_supported": None,
                "error": f"{type(exc).__name__}: {exc}",
            }
    return row


# per-record scalar series summarized in the aggregates section
def _metric_series(per_record: Sequence[dict], cfg: RunConfig) -> dict[str, list]:
    series: dict[str, list] = {}
    if "nlg" in cfg.metrics:
        for name in NLG_METRIC_NAMES:
            series[name] = [row["nlg"][name] for row in per_record]
    if "forte" in cfg.metrics:
        series["forte_avg"] = [row["forte"]["average_f1"] for row in per_record]
    if "claims" in cfg.metrics:
        series["claim_precision"] = [row["claims"]["precision"] for row in per_record]
    return series


def _aggregate_series(values: Sequence, replicates: int, seed: int) -> dict:
    present = [v for v in values if v is not None]
    n = len(present)
    if n == 0:
        return {
            "n": 0, "mean": None, "std": None,
            "ci_lower": None, "ci_upper": None, "ci_level": DEFAULT_CI_LEVEL,
        }
    mean = statistics.fmean(present)
    std = statistics.stdev(present) if n > 1 else 0.0
    if n > 1:
        ci = bootstrap_ci(
            present, "mean", replicates=replicates, seed=seed, level=DEFAULT_CI_LEVEL
        )
        lower, upper = ci.lower, ci.upper
    else:
        lower = upper = mean
    return {
        "n": n, "mean": mean, "std": std,
        "ci_lower": lower, "ci_upper": upper, "ci_level": DEFAULT_CI_LEVEL,
    }


def _corpus_level(corpus: Sequence[CorpusRecord], cfg: RunConfig, synonyms) -> dict:
    pairs = [
        (
            tokenize(normalize(r.generated, cfg.normalization)),
            tokenize(normalize(r.reference, cfg.normalization)),
        )
        for r in corpus
    ]
    return {
        "bleu1": corpus_bleu(pairs, max_n=1),
        "bleu4": corpus_bleu(pairs, max_n=4),
        "rouge1": corpus_rouge_n(pairs, n=1),
        "rougeL": corpus_rouge_l(pairs),
        "meteor": corpus_meteor(pairs, synonyms),
    }


def evaluate_corpus(
    corpus: Sequence[CorpusRecord],
    cfg: RunConfig,
    workers: int = 1,
    client: Optional[JudgeClient] = None,
) -> MetricReportDoc:
    """Score every record, then fold the rows into aggregates and CIs.

    Results are deterministic for a given corpus, config, and seed when the
    judge is deterministic; the pool size only changes the wall clock.
    """
    cfg.validate()
    if not corpus:
        raise InputError("corpus is empty")
    if workers < 1:
        raise InputError(f"workers must be >= 1, got {workers}")
    ids = [r.id for r in corpus]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise InputError(f"duplicate record ids in corpus: {dupes}")

    lexicon = _load_lexicon(cfg)
    synonyms = lexicon.synonym_sets()
    if (
        "claims" in cfg.metrics
        and cfg.claims_mode == "llm"
        and client is None
    ):
        client = JudgeClient(cfg.judge)

    def one(record: CorpusRecord) -> dict:
        return _evaluate_record(record, cfg, lexicon, synonyms, client)

    if workers == 1:
        per_record = [one(r) for r in corpus]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_record = list(pool.map(one, corpus))

    judge_failures = sum(
        1
        for row in per_record
        if "claims" in row and row["claims"]["error"] is not None
    )
    aggregates = {
        name: _aggregate_series(values, cfg.bootstrap_replicates, cfg.seed)
        for name, values in _metric_series(per_record, cfg).items()
    }
    corpus_level = _corpus_level(corpus, cfg, synonyms) if "nlg" in cfg.metrics else None
    prompt_versions = {}
    if "claims" in cfg.metrics:
        prompt_versions = {
            "claims_extraction": EXTRACTION_PROMPT_VERSION,
            "claims_verification": VERIFICATION_PROMPT_VERSION,
        }
    return MetricReportDoc(
        config=cfg.echo(),
        seed=cfg.seed,
        n_records=len(corpus),
        judge_failures=judge_failures,
        per_record=tuple(per_record),
        aggregates=aggregates,
        corpus_level=corpus_level,
        prompt_versions=prompt_versions,
    )


def verify_report(doc: MetricReportDoc) -> None:
    """Recompute every aggregate from the per-record section; raise on drift.

    The fold is re-run with the document's own replicate count and seed, so
    any mismatch means the document was edited or the tool has a bug.
    """
    replicates = doc.config.get("bootstrap_replicates")
    seed = doc.config.get("seed")
    if replicates is None or seed is None:
        raise InputError("report config lacks bootstrap_replicates or seed")
    for name, summary in doc.aggregates.items():
        values = [_lookup_metric(row, name) for row in doc.per_record]
        recomputed = _aggregate_series(values, replicates, seed)
        if recomputed != summary:
            raise InternalError(
                f"aggregate {name!r} does not match its per-record section: "
                f"stored {summary}, recomputed {recomputed}"
            )
    failures = sum(
        1
        for row in doc.per_record
        if "claims" in row and row["claims"].get("error") is not None
    )
    if failures != doc.judge_failures:
        raise InternalError(
            f"judge_failures is {doc.judge_failures} but per-record section "
            f"records {failures}"
        )


def _lookup_metric(row: dict, name: str):
    if name in NLG_METRIC_NAMES:
        return row["nlg"][name]
    if name == "forte_avg":
        return row["forte"]["average_f1"]
    if name == "claim_precision":
        return row["claims"]["precision"]
    raise InputError(f"unknown aggregate metric {name!r}")


COMPARISON_TESTS = ("paired_t", "wilcoxon")


def compare_systems(
    report_a: MetricReportDoc,
    report_b: MetricReportDoc,
    test: str = "wilcoxon",
) -> dict:
    """Paired significance tests between two runs over the same record ids.

    Returns one entry per shared aggregate metric. Identical per-record
    values surface as the string "identical systems" rather than an error;
    metrics with fewer than two complete pairs are marked insufficient.
    """
    if test not in COMPARISON_TESTS:
        raise InputError(f"test must be one of {list(COMPARISON_TESTS)}, got {test!r}")
    ids_a = [row["id"] for row in report_a.per_record]
    ids_b = [row["id"] for row in report_b.per_record]
    only_a = sorted(set(ids_a) - set(ids_b))
    only_b = sorted(set(ids_b) - set(ids_a))
    if only_a or only_b:
        raise InputError(
            f"record id sets differ: only in first {only_a}, only in second {only_b}"
        )
    rows_b = {row["id"]: row for row in report_b.per_record}
    run_test = paired_t_test if test == "paired_t" else wilcoxon_signed_rank

    results: dict[str, dict] = {}
    for name in sorted(set(report_a.aggregates) & set(report_b.aggregates)):
        pairs = []
        for row_a in report_a.per_record:
            va = _lookup_metric(row_a, name)
            vb = _lookup_metric(rows_b[row_a["id"]], name)
            if va is not None and vb is not None:
                pairs.append((va, vb))
        if len(pairs) < 2:
            results[name] = {"note": "insufficient paired data", "n": len(pairs)}
            continue
        a_values = [p[0] for p in pairs]
        b_values = [p[1] for p in pairs]
        try:
            outcome = run_test(a_values, b_values)
        except DegenerateInputError:
            results[name] = {"note": "identical systems", "n": len(pairs)}
            continue
        results[name] = {
            "statistic": outcome.statistic,
            "p_value": outcome.p_value,
            "method": outcome.method,
            "n": len(pairs),
        }
    if not results:
        raise InputError("the two reports share no aggregate metrics")
    return results


def write_flat_table(doc: MetricReportDoc, path: Union[str, Path]) -> None:
    """Per-record scalar metrics as CSV for spreadsheet import."""
    names = list(doc.aggregates)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", *names])
        for row in doc.per_record:
            values = [_lookup_metric(row, name) for name in names]
            writer.writerow(
                [row["id"], *["" if v is None else repr(v) for v in values]]
            )
