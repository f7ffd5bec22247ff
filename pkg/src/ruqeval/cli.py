"""Command-line front end.

Subcommands cover corpus evaluation (eval), single-pair scoring (forte,
claims), label extraction (labels), cohort screening (cohort), sampling
plans (cine-plan), score-matrix summaries (stats), the training-math
property suite (mathcheck), and report comparison (compare).

Exit codes: 0 success, 1 input error, 2 judge transport/protocol error,
3 internal invariant violation. Judge credentials are read only from the
environment (see ruqeval.judge.JUDGE_TOKEN_ENV), never from flags or
config files, so they can never leak into report config echoes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .claims import claim_precision, extract_claims, verify_claims
from .cine import DEFAULT_TARGET_LENGTH, plan_to_json, sampling_indices
from .corpus import load_corpus, load_score_matrix
from .errors import (
    InputError,
    InternalError,
    ProtocolError,
    RuqevalError,
    TransportError,
)
from .forte import forte_f1, load_default_lexicon, parse_lexicon
from .judge import JUDGE_TOKEN_ENV, JudgeClient, JudgeConfig
from .labels import extract_labels, read_encounter_table, tokyo_cohort_filter
from .report import (
    METRIC_TOGGLES,
    MetricReportDoc,
    RunConfig,
    compare_systems,
    evaluate_corpus,
    verify_report,
    write_flat_table,
)
from .stats import macro_micro
from .textproc import NormalizationConfig
from .trainmath import run_property_checks

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; bad usage is an input error here."""

    def error(self, message):
        raise InputError(message)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_text_arg(inline: str | None, file_path: str | None, name: str) -> str:
    if (inline is None) == (file_path is None):
        raise InputError(f"provide exactly one of --{name} or --{name}-file")
    if inline is not None:
        return inline
    try:
        return Path(file_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {file_path}: {exc}") from None


def _add_judge_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--judge-endpoint", help="judge API base URL")
    parser.add_argument("--judge-model", help="judge model name")
    parser.add_argument("--judge-timeout", type=float, default=None)
    parser.add_argument("--judge-retries", type=int, default=None)
    parser.add_argument("--judge-temperature", type=float, default=None)


def _judge_config_from(args, base: dict | None = None) -> JudgeConfig | None:
    base = base or {}
    endpoint = args.judge_endpoint or base.get("endpoint")
    model = args.judge_model or base.get("model_name")
    if endpoint is None and model is None:
        return None
    if endpoint is None or model is None:
        raise InputError("judge config needs both an endpoint and a model name")
    kwargs = {}
    for flag, key in (
        ("judge_timeout", "timeout"),
        ("judge_retries", "max_retries"),
        ("judge_temperature", "temperature"),
    ):
        value = getattr(args, flag)
        if value is None:
            value = base.get(key)
        if value is not None:
            kwargs[key] = value
    return JudgeConfig(endpoint=endpoint, model_name=model, **kwargs)


def _judge_client_for_mode(args) -> JudgeClient | None:
    if args.mode != "llm":
        return None
    judge = _judge_config_from(args)
    if judge is None:
        raise InputError("llm mode requires --judge-endpoint and --judge-model")
    return JudgeClient(judge)


def _lexicon_from(path: str | None):
    return parse_lexicon(path) if path else load_default_lexicon()


# ---------------------------------------------------------------------------
# eval


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise InputError(f"config file {path} must hold a JSON object")
    return obj


def _normalization_from(base: dict) -> NormalizationConfig:
    section = base.get("normalization")
    if section is None:
        return NormalizationConfig()
    if not isinstance(section, dict):
        raise InputError("config normalization section must be an object")
    allowed = {"lowercase", "strip_punctuation", "collapse_whitespace", "unicode_nfkc"}
    unknown = set(section) - allowed
    if unknown:
        raise InputError(f"unknown normalization keys {sorted(unknown)}")
    return NormalizationConfig(**section)


def _run_config_from(args) -> RunConfig:
    """Config file values first, command-line flags winning."""
    base = _load_config_file(args.config)
    judge_base = base.get("judge")
    if judge_base is not None and not isinstance(judge_base, dict):
        raise InputError("config judge section must be an object")
    metrics = args.metrics if args.metrics is not None else base.get("metrics")
    if metrics is None:
        metrics_tuple = METRIC_TOGGLES
    elif isinstance(metrics, str):
        metrics_tuple = tuple(m.strip() for m in metrics.split(",") if m.strip())
    else:
        metrics_tuple = tuple(metrics)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        value = base.get(key)
        return default if value is None else value

    return RunConfig(
        normalization=_normalization_from(base),
        lexicon_path=pick(args.lexicon, "lexicon_path", None),
        judge=_judge_config_from(args, judge_base),
        metrics=metrics_tuple,
        claims_mode=pick(args.claims_mode, "claims_mode", "deterministic"),
        seed=pick(args.seed, "seed", 0),
        output_path=pick(args.out, "output_path", None),
        bootstrap_replicates=pick(args.replicates, "bootstrap_replicates", 2000),
    )


def _cmd_eval(args) -> int:
    cfg = _run_config_from(args)
    corpus = load_corpus(args.corpus)
    doc = evaluate_corpus(corpus, cfg, workers=args.workers)
    if not args.no_self_check:
        verify_report(doc)
    if cfg.output_path:
        doc.save(cfg.output_path)
    else:
        sys.stdout.buffer.write(doc.to_json_bytes())
    if args.flat_table:
        write_flat_table(doc, args.flat_table)
    return 0


# ---------------------------------------------------------------------------
# single-pair and single-report commands


def _cmd_forte(args) -> int:
    generated = _read_text_arg(args.generated, args.generated_file, "generated")
    reference = _read_text_arg(args.reference, args.reference_file, "reference")
    scores = forte_f1(generated, reference, _lexicon_from(args.lexicon))
    _emit(scores.as_dict(), args.out)
    return 0


def _cmd_claims(args) -> int:
    generated = _read_text_arg(args.generated, args.generated_file, "generated")
    reference = _read_text_arg(args.reference, args.reference_file, "reference")
    client = _judge_client_for_mode(args)
    claims = extract_claims(generated, mode=args.mode, client=client)
    verdicts = verify_claims(claims, reference, mode=args.mode, client=client)
    precision = claim_precision(verdicts)
    _emit(
        {
            "precision": precision.value,
            "no_claims": precision.no_claims,
            "n_claims": len(verdicts),
            "n_supported": sum(1 for v in verdicts if v.supported),
            "verdicts": [
                {
                    "claim": v.claim.text,
                    "supported": v.supported,
                    "judge": v.judge,
                    "rationale": v.rationale,
                }
                for v in verdicts
            ],
        },
        args.out,
    )
    return 0


def _cmd_labels(args) -> int:
    report = _read_text_arg(args.report, args.report_file, "report")
    client = _judge_client_for_mode(args)
    vector = extract_labels(
        report, mode=args.mode, client=client, case_id=args.case_id
    )
    _emit(
        {
            "case_id": vector.case_id,
            "positive_ids": list(vector.positive_ids()),
            "values": vector.values,
        },
        args.out,
    )
    return 0


def _cmd_cohort(args) -> int:
    try:
        with open(args.table, "r", encoding="utf-8", newline="") as handle:
            encounters = read_encounter_table(handle)
    except OSError as exc:
        raise InputError(f"cannot read {args.table}: {exc}") from None
    codes = None
    if args.codes:
        codes = tuple(c.strip() for c in args.codes.split(",") if c.strip())
    by_patient: dict[str, list] = {}
    for record in encounters:
        by_patient.setdefault(record.patient_id, []).append(record)
    decisions = {}
    for patient_id in sorted(by_patient):
        decision = tokyo_cohort_filter(by_patient[patient_id], args.exam_date, codes)
        decisions[patient_id] = {
            "eligible": decision.eligible,
            "matched_codes": list(decision.matched_codes),
        }
    _emit({"exam_date": args.exam_date, "patients": decisions}, args.out)
    return 0


def _cmd_cine_plan(args) -> int:
    plan = sampling_indices(args.frames, args.target)
    sys.stdout.write(plan_to_json(plan) + "\n")
    return 0


def _cmd_stats(args) -> int:
    matrix = load_score_matrix(args.scores)
    thresholds = None
    if args.thresholds:
        obj = _load_config_file(args.thresholds)
        thresholds = {str(k): float(v) for k, v in obj.items()}
    _emit(macro_micro(matrix, thresholds), args.out)
    return 0


def _cmd_mathcheck(args) -> int:
    results = run_property_checks(args.seed)
    failed = []
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
        if not ok:
            failed.append(name)
    if failed:
        raise InternalError(f"property checks failed: {', '.join(failed)}")
    return 0


def _cmd_compare(args) -> int:
    report_a = MetricReportDoc.load(args.a)
    report_b = MetricReportDoc.load(args.b)
    _emit(compare_systems(report_a, report_b, test=args.test), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ruqeval",
        description="Report evaluation and study-analysis toolkit for RUQ "
        "ultrasound report generation.",
    )
    parser.add_argument("--version", action="version", version=f"ruqeval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score a corpus and emit a report document")
    p.add_argument("--corpus", required=True, help="line-delimited corpus file")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--out", help="report output path (default stdout)")
    p.add_argument("--flat-table", help="also write per-record metrics as CSV")
    p.add_argument("--metrics", help="comma list from nlg,forte,claims")
    p.add_argument("--claims-mode", choices=["deterministic", "llm"])
    p.add_argument("--lexicon", help="keyword lexicon path (default shipped)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None, help="bootstrap replicates")
    p.add_argument("--workers", type=int, default=1, help="worker pool size")
    p.add_argument(
        "--no-self-check",
        action="store_true",
        help="skip recomputing aggregates from the per-record section",
    )
    _add_judge_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("forte", help="keyword-lexicon scores for one pair")
    p.add_argument("--generated")
    p.add_argument("--generated-file")
    p.add_argument("--reference")
    p.add_argument("--reference-file")
    p.add_argument("--lexicon")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_forte)

    p = sub.add_parser("claims", help="claim precision for one pair")
    p.add_argument("--generated")
    p.add_argument("--generated-file")
    p.add_argument("--reference")
    p.add_argument("--reference-file")
    p.add_argument("--mode", choices=["deterministic", "llm"], default="deterministic")
    p.add_argument("--out")
    _add_judge_flags(p)
    p.set_defaults(func=_cmd_claims)

    p = sub.add_parser("labels", help="diagnostic labels for one report")
    p.add_argument("--report")
    p.add_argument("--report-file")
    p.add_argument("--mode", choices=["rule", "llm"], default="rule")
    p.add_argument("--case-id", default="")
    p.add_argument("--out")
    _add_judge_flags(p)
    p.set_defaults(func=_cmd_labels)

    p = sub.add_parser("cohort", help="cohort eligibility from an encounter table")
    p.add_argument("--table", required=True, help="CSV of patient encounters")
    p.add_argument("--exam-date", required=True, help="ISO date of the exam")
    p.add_argument("--codes", help="comma list of qualifying ICD codes")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cohort)

    p = sub.add_parser("cine-plan", help="temporal sampling plan for a loop")
    p.add_argument("--frames", type=int, required=True, help="source frame count")
    p.add_argument("--target", type=int, default=DEFAULT_TARGET_LENGTH)
    p.set_defaults(func=_cmd_cine_plan)

    p = sub.add_parser("stats", help="macro/micro summary of a score matrix")
    p.add_argument("--scores", required=True, help="score/truth CSV")
    p.add_argument("--thresholds", help="JSON file of per-label thresholds")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("mathcheck", help="run the training-math property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_mathcheck)

    p = sub.add_parser("compare", help="paired significance tests between two runs")
    p.add_argument("--a", required=True, help="first report document")
    p.add_argument("--b", required=True, help="second report document")
    p.add_argument("--test", choices=["paired_t", "wilcoxon"], default="wilcoxon")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"ruqeval: input error: {exc}", file=sys.stderr)
        return 1
    except (TransportError, ProtocolError) as exc:
        print(f"ruqeval: judge error: {exc}", file=sys.stderr)
        print(
            f"(judge credentials are read from ${JUDGE_TOKEN_ENV})", file=sys.stderr
        )
        return 2
    except InternalError as exc:
        print(f"ruqeval: internal error: {exc}", file=sys.stderr)
        return 3
    except RuqevalError as exc:  # base-class fallback: treat as internal
        print(f"ruqeval: internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
