"""Local- and global-error studies over step-size ladders.

A study fixes the problem, the method and the grid, and measures max-norm
errors against the exact solution for every ``k`` of a dyadic ladder.
Convergence orders are ``log2`` ratios of adjacent errors.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discretize import build_1d, build_2d_5pt, build_2d_split, n_hat_from_h
from .integrate import SPLIT_METHODS, IntegratorConfig, integrate, make_context, step
from .matfun import KrylovConfig
from .problems import Problem, get_problem, project_exact

ERROR_KINDS = ("local", "global", "both")
AGGREGATIONS = ("first", "max", "mean")
CSV_HEADER = ("k", "local_error", "local_order", "global_error", "global_order")


class OrderWarning(UserWarning):
    """An order estimate was skipped because an error was zero or negative."""


@dataclass(frozen=True)
class ExperimentPlan:
    """One convergence study.

    ``ks`` is a dyadic ladder (each entry half the previous one).
    ``aggregation`` says how one-step errors become the local error of a
    ladder entry: the error of the step from ``t = 0`` (``"first"``) or the
    maximum or mean over all steps in ``[0, T)``.
    """

    problem: str
    method: str
    h: float
    ks: tuple[float, ...]
    T: float
    backend: str = "auto"
    error: str = "both"
    trace: str = "numeric"
    split_display: str = "chained"
    aggregation: str = "first"
    krylov: KrylovConfig = field(default_factory=KrylovConfig)

    def __post_init__(self):
        ks = tuple(float(k) for k in self.ks)
        object.__setattr__(self, "ks", ks)
        if len(ks) < 2:
            raise ValueError("a ladder needs at least two step sizes")
        for a, b in zip(ks, ks[1:]):
            if not b < a:
                raise ValueError("step sizes must be strictly decreasing")
            if abs(a / b - 2.0) > 1e-9:
                raise ValueError(f"ladder is not dyadic: {a} -> {b}")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.error not in ERROR_KINDS:
            raise ValueError(f"error kind must be one of {ERROR_KINDS}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
        # Fail on bad names and incompatible combinations before any work is done.
        self.integrator(ks[0])
        problem = get_problem(self.problem)
        if self.method in SPLIT_METHODS and problem.dim != 2:
            raise ValueError(f"method {self.method} needs a 2-D problem")
        n_hat_from_h(self.h)

    def integrator(self, k: float) -> IntegratorConfig:
        return IntegratorConfig(
            self.method, k, self.backend, self.krylov, self.trace, self.split_display
        )


@dataclass(frozen=True)
class ErrorReport:
    """Errors per ladder entry; ``None`` marks a kind that was not measured."""

    ks: tuple[float, ...]
    local_errors: tuple[float, ...] | None = None
    global_errors: tuple[float, ...] | None = None

    def __post_init__(self):
        for errs in (self.local_errors, self.global_errors):
            if errs is None:
                continue
            if len(errs) != len(self.ks):
                raise ValueError("one error per step size is required")
            if any(not e >= 0 for e in errs):
                raise ValueError("errors must be non-negative")

    @property
    def local_orders(self) -> list[float | None] | None:
        return None if self.local_errors is None else estimate_orders(self.local_errors)

    @property
    def global_orders(self) -> list[float | None] | None:
        return None if self.global_errors is None else estimate_orders(self.global_errors)


def build_operator(problem: Problem, method: str, h: float):
    n_hat = n_hat_from_h(h)
    if problem.dim == 1:
        return build_1d(n_hat, problem.bc_right)
    if method in SPLIT_METHODS:
        return build_2d_split(n_hat)
    return build_2d_5pt(n_hat)


def run_global(problem: Problem, op, cfg: IntegratorConfig, T: float) -> float:
    """``||P_h u(T) - U_n||_inf`` after stepping from ``P_h u(0)``."""
    if T == 0:
        return 0.0
    ctx = make_context(problem, op, cfg)
    t, u = integrate(ctx, project_exact(problem, op.grid, 0.0), T)
    return float(np.max(np.abs(u - project_exact(problem, op.grid, t))))


def run_local(problem: Problem, op, cfg: IntegratorConfig, T: float, aggregation: str = "first") -> float:
    """One-step errors from the exact solution, aggregated over ``[0, T)``.

    Each step starts at ``P_h u(t_n)`` and is compared with ``P_h u(t_{n+1})``.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
    ctx = make_context(problem, op, cfg)
    k = cfg.k
    n_steps = 1 if aggregation == "first" else max(1, int(math.floor(T / k + 1e-9)))
    errs = []
    for n in range(n_steps):
        t = n * k
        try:
            u = step(ctx, t, project_exact(problem, op.grid, t))
        except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise RuntimeError(f"step {n} at t={t:g} failed: {exc}") from exc
        errs.append(float(np.max(np.abs(u - project_exact(problem, op.grid, t + k)))))
    return max(errs) if aggregation != "mean" else float(np.mean(errs))


def estimate_orders(errors) -> list[float | None]:
    """``log2(e_i / e_{i+1})`` for adjacent entries of a dyadic ladder.

    Pairs with a zero or negative error give ``None`` and an
    :class:`OrderWarning`.
    """
    out: list[float | None] = []
    for a, b in zip(errors, errors[1:]):
        if a > 0 and b > 0:
            out.append(math.log2(a) - math.log2(b))
        else:
            warnings.warn(f"order skipped for errors ({a}, {b})", OrderWarning, stacklevel=2)
            out.append(None)
    return out


def run_plan(plan: ExperimentPlan, workers: int = 1) -> ErrorReport:
    """Run every ladder entry of ``plan``; entries may run in worker threads."""
    problem = get_problem(plan.problem)
    op = build_operator(problem, plan.method, plan.h)

    def one(k):
        cfg = plan.integrator(k)
        loc = run_local(problem, op, cfg, plan.T, plan.aggregation) if plan.error != "global" else None
        glo = run_global(problem, op, cfg, plan.T) if plan.error != "local" else None
        return loc, glo

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, plan.ks))
    else:
        results = [one(k) for k in plan.ks]
    loc = tuple(r[0] for r in results) if plan.error != "global" else None
    glo = tuple(r[1] for r in results) if plan.error != "local" else None
    return ErrorReport(plan.ks, loc, glo)


def _cell(x, fmt: str) -> str:
    return "" if x is None else format(x, fmt)


def _columns(report: ErrorReport):
    n = len(report.ks)
    loc = report.local_errors or (None,) * n
    glo = report.global_errors or (None,) * n
    lo = [None] + (report.local_orders or [None] * max(n - 1, 0))
    go = [None] + (report.global_orders or [None] * max(n - 1, 0))
    return loc, lo[:n], glo, go[:n]


def emit_report(report: ErrorReport, fmt: str = "csv") -> str:
    """Render a report as CSV (17 significant digits) or as a table
    with one column per step size (5 significant digits).

    Orders sit with the finer step size of the pair they compare.
    """
    loc, lo, glo, go = _columns(report)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        e17 = ".16e"
        for row in zip(report.ks, loc, lo, glo, go):
            writer.writerow([_cell(x, e17) for x in row])
        return buf.getvalue()
    if fmt != "pretty":
        raise ValueError("format must be 'csv' or 'pretty'")
    head = ["", *(f"k={k:.4g}" for k in report.ks)]
    rows = [head]
    if report.local_errors is not None:
        rows.append(["local error", *(_cell(x, ".4e") for x in loc)])
        rows.append(["order", *(_cell(x, ".4f") for x in lo)])
    if report.global_errors is not None:
        rows.append(["global error", *(_cell(x, ".4e") for x in glo)])
        rows.append(["order", *(_cell(x, ".4f") for x in go)])
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> ErrorReport:
    """Inverse of ``emit_report(..., "csv")``; orders are recomputed."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"expected CSV header {','.join(CSV_HEADER)}")
    ks, loc, glo = [], [], []
    for row in reader:
        if not row:
            continue
        ks.append(float(row[0]))
        loc.append(float(row[1]) if row[1] else None)
        glo.append(float(row[3]) if row[3] else None)

    def column(vals):
        return None if not vals or any(v is None for v in vals) else tuple(vals)
    return ErrorReport(tuple(ks), column(loc), column(glo))
