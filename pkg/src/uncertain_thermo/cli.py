"""Command-line front end: ``uthermo --config job.json [--out report.json]``.

Exit codes: 0 success, 2 schema error, 3 solver failure, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import ENV_PROFILE, PROFILES
from .errors import BadParameter, SchemaError
from .reporting import EXIT_SCHEMA, load_config, run_job, run_sweep


def _tol(text: str) -> float | str:
    if text in PROFILES:
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tol takes a number or one of {sorted(PROFILES)}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uthermo",
        description="Certified work extraction and formation under uncertain equilibrium.",
        epilog=f"The default interior-point tolerance profile can be set with {ENV_PROFILE} "
        f"({', '.join(sorted(PROFILES))}).",
    )
    parser.add_argument("--config", type=Path, required=True, help="JSON job config")
    parser.add_argument("--out", type=Path, help="report path (JSON, or CSV for sweeps); default stdout")
    parser.add_argument("--jobs", type=int, default=1, help="parallel rows for sweeps")
    parser.add_argument("--m-cap", type=float, help="override params.m_cap")
    parser.add_argument("--grid", type=int, help="override params.grid and sampler grids")
    parser.add_argument("--tol", type=_tol, help="interior-point tolerance or profile name")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        cfg = load_config(args.config, m_cap=args.m_cap, grid=args.grid)
        if cfg.command == "sweep":
            report = run_sweep(cfg, jobs=args.jobs, tol=args.tol)
        else:
            report = run_job(cfg, tol=args.tol)
    except (SchemaError, BadParameter) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    out = args.out or (Path(cfg.output) if cfg.output else None)
    if out is not None:
        report.write(out)
    else:
        sys.stdout.write(report.csv if report.csv is not None else report.to_json())
    if report.exit_code:
        err = report.payload.get("error") or {}
        print(f"{err.get('type', 'error')}: {err.get('message', '')}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
