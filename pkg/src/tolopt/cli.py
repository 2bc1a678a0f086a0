"""Batch command-line entry points for the full pipeline.

Every command is a pure function of its inputs, flags, and seed; tables
written to standard output are key-sorted so runs can be diffed. Exit
codes: 0 success, 2 schema or file error, 3 parameter error, 4 holdout
defects escaped during validation.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from .errors import EmptySample, ParameterError, SchemaError, SpecError, TolOptError
from .ingest import build_part_datasets, datasets_to_csv, parse_records
from .optimizer import SafetyMargin, optimize_all, proposals_from_jsonl, proposals_to_jsonl
from .quantile import PercentileSpec
from .simulate import (
    DEFAULT_SWEEP_GRID,
    SyntheticSpec,
    aggregate_report,
    generate_synthetic,
    sweep,
    sweep_to_jsonl,
)
from .validation import SplitPolicy, run_validation_protocol, validation_report_to_csv

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PARAMETER = 3
EXIT_ESCAPES = 4


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_datasets(path: str):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        records, rejects = parse_records(fh)
    datasets, quarantine = build_part_datasets(records)
    return datasets, records, rejects, quarantine


def _parse_percentiles(text: str) -> list[float]:
    """Accepts 'a,b,c' and 'start:stop:step' tokens, freely mixed."""
    values: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            pieces = token.split(":")
            if len(pieces) != 3:
                raise ParameterError(f"range must be start:stop:step, got {token!r}")
            try:
                start, stop, step = (float(x) for x in pieces)
            except ValueError as exc:
                raise ParameterError(f"cannot parse percentile range {token!r}") from exc
            if step <= 0:
                raise ParameterError(f"range step must be positive, got {step}")
            v = start
            while v <= stop + 1e-9:
                values.append(round(v, 10))
                v += step
        else:
            try:
                values.append(float(token))
            except ValueError as exc:
                raise ParameterError(f"cannot parse percentile {token!r}") from exc
    if not values:
        raise ParameterError("no percentiles given")
    for v in values:
        PercentileSpec(v)
    return values


def _summary_table(proposals, datasets) -> str:
    summary = aggregate_report(proposals, datasets)
    lines = [
        "model,part_number,inspection_type,current_tolerance,false_calls_before,"
        "defects_total,final_tolerance,false_calls_after,defects_flagged_after"
    ]
    for row in summary.breakdown:
        lines.append(
            f"{row.model},{row.key.part_number},{row.key.inspection_type},"
            f"{row.current_tolerance!r},{row.false_calls_before},{row.defects_total},"
            f"{row.final_tolerance!r},{row.false_calls_after},{row.defects_flagged_after}"
        )
    lines.append(
        f"# totals: false_calls {summary.total_false_calls_before} -> "
        f"{summary.total_false_calls_after} "
        f"(reduction {summary.reduction_fraction:.1%}), "
        f"defects {summary.defects_flagged}/{summary.defects_total} flagged, "
        f"guard_activations {summary.guard_activations}, "
        f"exceeds_current {summary.parts_exceeding_current}"
    )
    return "\n".join(lines) + "\n"


def cmd_ingest(args: argparse.Namespace) -> int:
    datasets, records, rejects, quarantine = _load_datasets(args.input)
    print(
        f"accepted {len(records)} rejected {len(rejects)} quarantined {len(quarantine)} "
        f"parts {len(datasets)}"
    )
    for reason, count in sorted({**rejects.counts(), **quarantine.counts()}.items()):
        print(f"  {reason}: {count}")
    if args.out:
        Path(args.out).write_text(datasets_to_csv(datasets), encoding="utf-8")
        print(f"canonical export written to {args.out}")
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    margin = SafetyMargin.parse(args.margin)
    PercentileSpec(args.percentile)
    datasets, _, _, _ = _load_datasets(args.input)
    proposals, errors = optimize_all(datasets, args.percentile, margin)
    sys.stdout.write(_summary_table(proposals, datasets))
    for error in errors:
        print(f"# error {error.key}: {error.message}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(proposals_to_jsonl(proposals), encoding="utf-8")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    margin = SafetyMargin.parse(args.margin)
    PercentileSpec(args.percentile)
    datasets, _, _, _ = _load_datasets(args.input)
    report = run_validation_protocol(
        datasets,
        args.percentile,
        margin,
        k=args.top_k,
        ratio=args.ratio,
        policy=SplitPolicy(kind=args.policy, seed=args.seed),
    )
    sys.stdout.write(validation_report_to_csv(report))
    for message in report.errors:
        print(f"# error {message}", file=sys.stderr)
    if report.overall.fn > 0:
        return _fail(f"{report.overall.fn} holdout defect(s) escaped", EXIT_ESCAPES)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    margin = SafetyMargin.parse(args.margin)
    percentiles = _parse_percentiles(args.percentiles)
    datasets, _, _, _ = _load_datasets(args.input)
    points = sweep(datasets, percentiles, margin)
    lines = [
        "p,total_false_calls_before,total_false_calls_after,reduction_fraction,"
        "defects_total,defects_flagged,guard_activations,parts_exceeding_current"
    ]
    for point in points:
        lines.append(
            f"{point.p:g},{point.total_false_calls_before},{point.total_false_calls_after},"
            f"{point.reduction_fraction!r},{point.defects_total},{point.defects_flagged},"
            f"{point.guard_activations},{point.parts_exceeding_current}"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        Path(args.out).write_text(sweep_to_jsonl(points), encoding="utf-8")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = SyntheticSpec.from_dict(json.load(fh))
    else:
        spec = SyntheticSpec()
    if args.seed is not None:
        spec = SyntheticSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    datasets = generate_synthetic(spec)
    text = datasets_to_csv(datasets)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(datasets)} parts to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    with open(args.proposals, "r", encoding="utf-8") as fh:
        proposals = proposals_from_jsonl(fh.read())
    sys.stdout.write(_summary_table(proposals, None))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import EventStore, create_app

    app = create_app(EventStore(args.store))
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((args.host, args.port))
    print(f"listening on {args.host}:{sock.getsockname()[1]}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="info"))
    server.run(sockets=[sock])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tolopt",
        description="Percentile-rank tolerance optimisation for AOI inspection data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a CSV export and report dataset counts")
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="write the canonical re-export here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("optimize", help="propose per-part tolerances")
    p.add_argument("--input", required=True)
    p.add_argument("--percentile", type=float, default=80.0)
    p.add_argument("--margin", default="1%", help="safety margin: '1%%' relative or absolute value")
    p.add_argument("--out", help="write proposals as JSON lines here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("validate", help="hold out 30%% of defects and check recall")
    p.add_argument("--input", required=True)
    p.add_argument("--percentile", type=float, default=80.0)
    p.add_argument("--margin", default="1%")
    p.add_argument("--ratio", type=float, default=0.7)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=["chronological", "shuffle"], default="chronological")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="simulate several percentiles side by side")
    p.add_argument("--input", required=True)
    p.add_argument(
        "--percentiles",
        default=",".join(f"{v:g}" for v in DEFAULT_SWEEP_GRID),
        help="comma list and/or start:stop:step ranges",
    )
    p.add_argument("--margin", default="1%")
    p.add_argument("--out", help="write sweep points as JSON lines here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="generate a seeded synthetic dataset")
    p.add_argument("--spec", help="JSON file describing the synthetic dataset")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report", help="summarise a proposals JSONL file")
    p.add_argument("--proposals", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", help="path to the append-only event log")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, OSError) as exc:
        return _fail(str(exc), EXIT_SCHEMA)
    except (ParameterError, SpecError, EmptySample) as exc:
        return _fail(str(exc), EXIT_PARAMETER)
    except TolOptError as exc:
        return _fail(str(exc), EXIT_PARAMETER)


if __name__ == "__main__":
    sys.exit(main())
