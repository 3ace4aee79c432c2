"""Command-line entry point: run, gallery, report.

Exit codes: 0 expected outcome, 1 unexpected outcome, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import load_config
from .crypto import SUITES
from .errors import SeapError
from .gallery import format_matrix, run_gallery
from .perf import GEO_ONE_WAY_MS, LEO_ONE_WAY_MS, ORBIT_PERIOD_MS, bandwidth_model, cert_time_model, latency_model
from .report import build_report
from .simnet.runner import run_scenario
from .simnet.scenarios import EXTRA, GALLERY_NAMES, gallery_config

EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE = 0, 1, 2
REPORT_KINDS = ("latency", "bandwidth", "cert-time")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_run(args) -> int:
    overrides = {"seed": args.seed, "deadline_ms": args.deadline_ms}
    if args.config:
        cfg = load_config(args.config, **overrides)
    else:
        from dataclasses import replace

        cfg = replace(gallery_config(args.scenario), **{k: v for k, v in overrides.items() if v is not None})
        cfg.validate()
    result = run_scenario(cfg)
    report = build_report(result)
    if args.report_out:
        Path(args.report_out).write_text(_dump(report) + "\n", encoding="utf-8")
    if args.trace_out:
        result.trace.write(args.trace_out)
    if args.json:
        print(_dump(report))
    else:
        print(f"scenario {cfg.name} seed {cfg.seed}: {result.outcome} (expected {result.expected})")
        if report["time_to_cert_ms"] is not None:
            print(f"  certified after {report['time_to_cert_ms']} ms ({report['hours_to_cert']} h, orbit {report['orbits_to_cert']})")
        stats = report["bytes_per_exchange"]["all"]
        if stats["count"]:
            print(f"  {stats['count']} exchanges, {stats['min']}-{stats['max']} bytes each")
        if report["drop_reasons"]:
            print("  drops: " + ", ".join(f"{k}={v}" for k, v in report["drop_reasons"].items()))
        print(f"  trace digest {report['trace_digest']}")
    return EXIT_OK if result.as_expected else EXIT_UNEXPECTED


def cmd_gallery(args) -> int:
    names = args.scenario or list(GALLERY_NAMES)
    seeds = [None] if args.seed is None and args.sweep == 1 else [(args.seed or 0) + i for i in range(args.sweep)]
    rows = run_gallery(names, seeds, args.workers)
    if args.json:
        print(_dump([r.to_dict() for r in rows]))
    else:
        print(format_matrix(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_UNEXPECTED


def report_tables(kind: str, suite: str, parallel: bool = False, t_gs: int = 2, t_ch: int = 2,
                  contacts: Sequence[int] = (1, 2), orbit_period_ms: int = ORBIT_PERIOD_MS) -> dict:
    """Structured model output behind ``seap report``."""
    if kind == "latency":
        return {
            "kind": kind,
            "suite": suite,
            "leo": latency_model(suite, parallel, LEO_ONE_WAY_MS).to_dict(),
            "geo": latency_model(suite, parallel, GEO_ONE_WAY_MS).to_dict(),
        }
    if kind == "bandwidth":
        return {"kind": kind, **bandwidth_model(suite).to_dict()}
    if kind == "cert-time":
        return {"kind": kind, **cert_time_model(t_gs, t_ch, tuple(contacts), orbit_period_ms).to_dict()}
    raise SeapError(f"unknown report kind {kind!r}; expected one of {REPORT_KINDS}")


def _print_table(table: dict) -> None:
    def rows(prefix, d):
        for k, v in d.items():
            if isinstance(v, dict):
                yield from rows(f"{prefix}{k}.", v)
            else:
                yield f"{prefix}{k}", v

    items = list(rows("", table))
    width = max(len(k) for k, _ in items)
    for k, v in items:
        if isinstance(v, list):
            v = "-".join(str(x) for x in v)
        print(f"{k:<{width}}  {v}")


def cmd_report(args) -> int:
    table = report_tables(args.kind, args.suite, args.parallel, args.t_gs, args.t_ch, args.contacts)
    if args.json:
        print(_dump(table))
    else:
        _print_table(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seap", description="Satellite key endorsement protocol simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write a JSON report")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="scenario YAML file")
    source.add_argument("--scenario", choices=list(GALLERY_NAMES) + sorted(EXTRA), help="named scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--deadline-ms", type=int)
    run.add_argument("--json", action="store_true", help="print the full report as JSON")
    run.add_argument("--report-out", help="write the JSON report to this path")
    run.add_argument("--trace-out", help="write the event trace (NDJSON) to this path")
    run.set_defaults(func=cmd_run)

    gal = sub.add_parser("gallery", help="run the attack gallery and print a pass/fail matrix")
    gal.add_argument("--scenario", action="append", choices=list(GALLERY_NAMES) + sorted(EXTRA),
                     help="run only this scenario (repeatable)")
    gal.add_argument("--seed", type=int, help="first seed (default: each scenario's own)")
    gal.add_argument("--sweep", type=int, default=1, help="number of consecutive seeds")
    gal.add_argument("--workers", type=int, default=1)
    gal.add_argument("--json", action="store_true")
    gal.set_defaults(func=cmd_gallery)

    rep = sub.add_parser("report", help="print closed-form model tables")
    rep.add_argument("kind", choices=REPORT_KINDS)
    rep.add_argument("--suite", default="ecc-p256-class", choices=sorted(SUITES))
    rep.add_argument("--parallel", action="store_true", help="independent buses per secure element")
    rep.add_argument("--t-gs", type=int, default=2)
    rep.add_argument("--t-ch", type=int, default=2)
    rep.add_argument("--contacts", type=int, nargs=2, default=(1, 2), metavar=("LO", "HI"))
    rep.add_argument("--json", action="store_true")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "sweep", 1) < 1:
        print("seap: --sweep must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (SeapError, ValueError, KeyError) as exc:
        print(f"seap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
