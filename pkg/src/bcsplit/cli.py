"""Command-line entry point: ``bcsplit {run,reproduce,verify}``.

Exit status is 0 on success, 1 on a numerical failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .harness import AGGREGATIONS, ERROR_KINDS, ExperimentPlan, emit_report, run_plan
from .integrate import METHODS
from .matfun import KrylovConvergenceError
from .problems import ALIASES, CATALOG
from .tables import TABLES, get_table
from .verify import run_all

NUMERIC_FAILURES = (RuntimeError, ArithmeticError, np.linalg.LinAlgError, KrylovConvergenceError)


class UsageError(Exception):
    pass


def _ladder(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--error", choices=ERROR_KINDS, default="both")
    p.add_argument("--aggregation", choices=AGGREGATIONS, default="first",
                   help="how one-step errors combine into the local error")
    p.add_argument("--format", choices=("csv", "pretty"), default="csv")
    p.add_argument("--out", metavar="FILE", help="write the report here instead of standard output")
    p.add_argument("--workers", type=int, default=1, help="threads for independent ladder entries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcsplit",
        description="Boundary-corrected exponential splitting for reaction-diffusion problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a convergence study")
    run.add_argument("--problem", required=True, choices=sorted(CATALOG) + sorted(ALIASES))
    run.add_argument("--method", required=True, choices=METHODS)
    run.add_argument("--h", type=float, required=True, help="grid spacing")
    run.add_argument("--k", type=_ladder, required=True, help="dyadic ladder, e.g. 0.01,0.005,0.0025")
    run.add_argument("--T", type=float, required=True, help="final time")
    run.add_argument("--backend", choices=("auto", "dense", "krylov"), default="auto")
    run.add_argument("--trace", choices=("numeric", "exact"), default="numeric")
    run.add_argument("--split-display", choices=("chained", "literal"), default="chained")
    _add_output_flags(run)

    rep = sub.add_parser("reproduce", help="run the configuration of a benchmark table")
    rep.add_argument("--table", type=int, required=True, choices=sorted(TABLES))
    rep.add_argument("--full-h", action="store_true",
                     help="use h=2.5e-4 with the Krylov backend for tables 2 and 4")
    rep.add_argument("--backend", choices=("auto", "dense", "krylov"))
    rep.add_argument("--trace", choices=("numeric", "exact"))
    rep.add_argument("--split-display", choices=("chained", "literal"))
    _add_output_flags(rep)

    sub.add_parser("verify", help="check stability, consistency and equivalence properties")
    return parser


def _plan_from_args(args) -> ExperimentPlan:
    common = dict(error=args.error, aggregation=args.aggregation)
    try:
        if args.command == "run":
            return ExperimentPlan(
                args.problem, args.method, args.h, args.k, args.T, backend=args.backend,
                trace=args.trace, split_display=args.split_display, **common,
            )
        plan = get_table(args.table).plan_for(args.full_h)
        overrides = {
            name: getattr(args, name)
            for name in ("backend", "trace", "split_display")
            if getattr(args, name) is not None
        }
        return dataclasses.replace(plan, **overrides, **common)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None


def _reference_lines(n: int) -> str:
    spec = get_table(n)
    loc = "  ".join(f"{x:.4e}" for x in spec.local_ref)
    glo = "  ".join(f"{x:.4e}" for x in spec.global_ref)
    return f"reference local error  {loc}\nreference global error {glo}\n"


def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        results = run_all()
        for r in results:
            print(r.line())
        return 0 if all(r.passed for r in results) else 1
    try:
        plan = _plan_from_args(args)
    except UsageError as exc:
        parser.error(str(exc))
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        report = run_plan(plan, workers=args.workers)
    except NUMERIC_FAILURES as exc:
        print(f"bcsplit: numerical failure: {exc}", file=sys.stderr)
        return 1
    text = emit_report(report, args.format)
    if args.command == "reproduce" and args.format == "pretty":
        text += _reference_lines(args.table)
    _write(text, args.out)
    return 0
