"""Command line front end: verify suites, summarize reports, dump plot data.

Exit codes: 0 success, 1 at least one failed check, 2 usage or config
errors.  Output directory precedence: --out flag, then the OULAB_OUT
environment variable, then the config's "out" entry.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .report import (
    SUITE_NAMES,
    RunConfig,
    emit_plot_data,
    load_report,
    run_suites,
    summarize,
    write_report,
)

__all__ = ["main"]


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="PATH", help="JSON run configuration")
    sp.add_argument("--seed", type=int, metavar="N", help="override the run seed")
    sp.add_argument("--out", metavar="DIR", help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oulab",
        description="numerical verification of smoothing-operator calculus "
                    "on Gaussian spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites, write report.json")
    v.add_argument("suites", nargs="*", metavar="SUITE",
                   help=f"suites to run (subset of {', '.join(SUITE_NAMES)}; "
                        "default comes from the config)")
    _add_common(v)

    r = sub.add_parser("report", help="summarize an existing report.json")
    _add_common(r)

    p = sub.add_parser("plot-data", help="write plot-ready CSV files")
    p.add_argument("kind", choices=["kernel-curves", "ratio-tables", "lusin-mass"])
    _add_common(p)
    return parser


def _load_config(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_file(args.config)
    else:
        cfg = RunConfig.from_dict({})
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("OULAB_OUT")
    if env:
        return Path(env)
    return Path(cfg.out)


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    if args.suites:
        for s in args.suites:
            if s not in SUITE_NAMES:
                raise ValueError(f"unknown suite {s!r}")
        cfg = replace(cfg, suites=tuple(args.suites))
    report = run_suites(cfg)
    out = _out_dir(args, cfg)
    path = write_report(report, out / "report.json")
    print(summarize(report))
    print(f"report: {path}")
    return 1 if report["summary"]["fail"] > 0 else 0


def _cmd_report(args) -> int:
    cfg = _load_config(args)
    path = _out_dir(args, cfg) / "report.json"
    if not path.exists():
        raise FileNotFoundError(f"no report at {path}")
    report = load_report(path)
    print(summarize(report))
    return 1 if report["summary"]["fail"] > 0 else 0


def _cmd_plot_data(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    report = None
    report_path = out / "report.json"
    if report_path.exists():
        report = load_report(report_path)
    path = emit_plot_data(args.kind, out, report)
    print(f"wrote: {path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"verify": _cmd_verify, "report": _cmd_report,
                "plot-data": _cmd_plot_data}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
