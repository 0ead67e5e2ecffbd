"""Command-line entry point.

Exit codes: 0 when everything passed, 1 when a check failed, 2 for usage
errors and for runs that left the chart domain.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from ..examples import SUITE_NAMES
from ..numcore import DomainError
from ..reconstruction import ReconstructionError
from .commands import EXIT_USAGE, run
from .config import Command, ConfigError, RunConfig, parse_point, parse_tolerance


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scaling-reduction",
        description="Scaling and standard reduction of Hamiltonian systems: simulation, reduction tables, "
                    "reconstruction and the verification battery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        p = sub.add_parser(command.value)
        p.add_argument("suite_positional", nargs="?", choices=SUITE_NAMES, metavar="SUITE",
                       help=f"example suite ({', '.join(SUITE_NAMES)})")
        p.add_argument("--suite", choices=SUITE_NAMES, help="example suite (alternative to the positional form)")
        p.add_argument("--dt", type=float, default=1e-3)
        p.add_argument("--t0", type=float, default=0.0)
        p.add_argument("--t1", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="CSV output path (stdout when omitted; verify prints its table regardless)")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                       help="tolerance override; NAME may be a glob over check keys, repeatable")
        p.add_argument("--reduced", action="store_true", help="simulate the final reduced field")
        p.add_argument("--pipeline", choices=("A", "B"), default="A",
                       help="A: standard then scaling; B: scaling then standard")
        p.add_argument("--x0", help="comma-separated initial point (total chart; so(3)* for so3 reconstruct)")
        p.add_argument("--route", help="reconstruction route (reconstruct only)")
        p.add_argument("--points", type=int, default=20, help="sample points per check / table rows")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.suite and args.suite_positional and args.suite != args.suite_positional:
        raise ConfigError(f"conflicting suites {args.suite_positional!r} and {args.suite!r}")
    suite = args.suite or args.suite_positional
    if suite is None:
        raise ConfigError("a suite is required")
    return RunConfig(
        suite=suite,
        command=Command(args.command),
        dt=args.dt,
        t0=args.t0,
        t1=args.t1,
        seed=args.seed,
        out=args.out,
        tolerances=dict(parse_tolerance(t) for t in args.tol),
        reduced=args.reduced,
        pipeline=args.pipeline,
        x0=None if args.x0 is None else parse_point(args.x0),
        route=args.route,
        points=args.points,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = run(cfg)
    except (ConfigError, KeyError) as exc:
        parser.error(str(exc).strip("'\""))
    except (DomainError, ReconstructionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(result.summary, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
