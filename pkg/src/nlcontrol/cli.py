"""Command-line front end.

Exit codes: 0 success, 1 failed self-check, 2 configuration or input format
error, 3 solver non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .checks import run_checks
from .config import ExperimentConfig, load_config
from .errors import ConfigError, FormatError, InvalidArgumentError, NonConvergenceError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NONCONV, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("nlcontrol")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment configuration")
    common.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    common.add_argument("--workers", type=int, help="parallel sweep cells")
    common.add_argument("--method", choices=["cg", "gd"], help="iterative solver")
    common.add_argument("--tol", type=float, help="relative residual tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="nlcontrol",
        description="Optimal and low-regret control of a 1-D nonlocal heat equation")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("uncontrolled", parents=[common], help="free evolution from the initial datum")
    sub.add_parser("optimal", parents=[common], help="optimal control for each beta")
    sub.add_parser("low-regret", parents=[common], help="low-regret control over beta x gamma")
    p = sub.add_parser("evaluate", parents=[common],
                       help="apply a stored control to every configured initial datum")
    p.add_argument("--control", type=Path, required=True, help="control CSV (M rows x N nodes)")
    sub.add_parser("tables", parents=[common], help="low-regret sweep and cross-datum tables")
    sub.add_parser("check", parents=[common], help="adjoint, dense-oracle and gradient self-tests")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(**{
        "workers": args.workers,
        "solver.method": args.method,
        "solver.tol": args.tol,
    })


def _run(args) -> int:
    if args.command == "check":
        results = run_checks()
        for r in results:
            print(r.line())
        return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK

    cfg = _resolve_config(args)
    out = args.out if args.out is not None else Path(cfg.output_dir)
    if args.command == "uncontrolled":
        result = ex.cmd_uncontrolled(cfg, out)
    elif args.command == "optimal":
        result = ex.cmd_optimal(cfg, out)
    elif args.command == "low-regret":
        result = ex.cmd_low_regret(cfg, out)
    elif args.command == "evaluate":
        result = ex.cmd_evaluate(cfg, args.control, out)
    else:
        result = ex.cmd_tables(cfg, out)
    print(f"wrote results to {out}")
    return EXIT_OK if result.ok else EXIT_NONCONV


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, FormatError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
