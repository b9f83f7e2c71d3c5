"""Executable checks of the structural properties the schemes rely on.

Each check returns a :class:`CheckResult`; ``run_all`` runs the set used by
``bcsplit verify``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import build_1d, build_2d_5pt, build_2d_split, consistency_errors, log_norm_inf
from .integrate import IntegratorConfig, integrate, make_context, step
from .linalg import induced_norm_max
from .matfun import expm_dense
from .problems import boundary_values, get_problem, project_exact


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def check_stability(n_hat: int = 999, ks=(1e-3, 5e-4, 2.5e-4, 1.25e-4), tol: float = 1e-12) -> CheckResult:
    """``||e^{kA}||_inf <= 1 + tol`` for the 1-D Dirichlet and Neumann operators."""
    worst = 0.0
    for bc in ("dirichlet", "neumann"):
        a = build_1d(n_hat, bc).A.to_dense()
        for k in ks:
            worst = max(worst, induced_norm_max(expm_dense(k * a)))
    return CheckResult("exponential contractivity", worst <= 1 + tol, f"max ||e^(kA)||_inf = {worst:.15f}")


def check_log_norm(n_hats=(99, 999)) -> CheckResult:
    """The logarithmic max-norm of every operator build is exactly zero."""
    values = []
    for n in n_hats:
        values.append(log_norm_inf(build_1d(n).A))
        values.append(log_norm_inf(build_1d(n, "neumann").A))
    values.append(log_norm_inf(build_2d_5pt(49).A))
    split = build_2d_split(49)
    values += [log_norm_inf(split.A1), log_norm_inf(split.A2)]
    return CheckResult("logarithmic norm", all(v == 0.0 for v in values), f"values {sorted(set(values))}")


def fitted_slope(hs, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def consistency_errors_for(problem_name: str, n_hats=(49, 99, 199), t: float = 0.0):
    """``(hs, eps_h, eta_h)`` of the exact solution of a catalog problem."""
    problem = get_problem(problem_name)
    hs, eps, eta = [], [], []
    for n in n_hats:
        op = build_1d(n, problem.bc_right) if problem.dim == 1 else build_2d_5pt(n)
        nodes = op.grid.nodes
        e1, e2 = consistency_errors(
            op,
            problem.exact(t, *nodes),
            problem.exact_lap(t, *nodes),
            boundary_values(problem, op.grid, t, "g"),
        )
        hs.append(op.grid.h)
        eps.append(e1)
        eta.append(e2)
    return hs, eps, eta


# The 2-D field is still pre-asymptotic at h = 1/50, so its ladder starts at 1/100.
CONSISTENCY_LADDERS = {
    "p1_dirichlet": ((49, 99, 199), (1.9, 2.1)),
    "p1_neumann": ((49, 99, 199), (0.9, 1.1)),
    "p2_dirichlet": ((99, 199, 399), (1.9, 2.1)),
}


def check_consistency() -> CheckResult:
    ok = True
    parts = []
    for name, (n_hats, eps_range) in CONSISTENCY_LADDERS.items():
        hs, eps, eta = consistency_errors_for(name, n_hats)
        s_eps, s_eta = fitted_slope(hs, eps), fitted_slope(hs, eta)
        ok &= eps_range[0] <= s_eps <= eps_range[1] and 1.9 <= s_eta <= 2.1
        parts.append(f"{name} eps {s_eps:.3f} eta {s_eta:.3f}")
    return CheckResult("consistency slopes", ok, "; ".join(parts))


def homogeneous_gap(method: str, n_hat: int = 99, k: float = 1e-3, steps: int = 5) -> float:
    """Largest per-step difference between a corrected scheme and its standard counterpart
    on the problem with vanishing boundary data."""
    problem = get_problem("homogeneous")
    op = build_1d(n_hat)
    corrected = make_context(problem, op, IntegratorConfig(method, k, "dense"))
    standard = make_context(problem, op, IntegratorConfig(f"{method}-standard", k, "dense"))
    gap = 0.0
    for n in range(steps):
        u = project_exact(problem, op.grid, n * k)
        gap = max(gap, float(np.max(np.abs(step(corrected, n * k, u) - step(standard, n * k, u)))))
    return gap


def check_homogeneous(tol: float = 1e-12) -> CheckResult:
    gaps = [homogeneous_gap(m) for m in ("lie", "strang")]
    return CheckResult("homogeneous reduction", max(gaps) <= tol, f"max gap {max(gaps):.3e}")


def backend_gap(method: str = "lie", n_hat: int = 999, k: float = 5e-4, T: float = 0.2) -> float:
    """Max-norm distance between dense and Krylov trajectories at ``T``."""
    problem = get_problem("p1_dirichlet")
    op = build_1d(n_hat)
    u0 = project_exact(problem, op.grid, 0.0)
    out = []
    for backend in ("dense", "krylov"):
        ctx = make_context(problem, op, IntegratorConfig(method, k, backend))
        out.append(integrate(ctx, u0, T)[1])
    return float(np.max(np.abs(out[0] - out[1])))


def check_backends(tol: float = 1e-7) -> CheckResult:
    gap = backend_gap()
    return CheckResult("dense/krylov agreement", gap <= tol, f"gap {gap:.3e}")


def run_all() -> list[CheckResult]:
    return [
        check_log_norm(),
        check_stability(),
        check_consistency(),
        check_homogeneous(),
        check_backends(),
    ]
