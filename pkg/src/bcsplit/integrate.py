"""One-step maps of boundary-corrected and standard exponential splittings.

Every linear substep has the form

    v -> e^{tau A} v + tau phi_1(tau A) C b1 + tau^2 phi_2(tau A) C b2,

i.e. the exact flow of ``V' = A V + C (b1 + s b2)``; the schemes differ only in
which boundary polynomials ``b1 + s b2`` they feed it. The nonlinear substeps
are one classical RK4 step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import BoundaryMap, DiscreteOperator, SplitOperator2D
from .matfun import KrylovConfig, PhiTable, phi_combination
from .problems import Problem, ReactionEvaluator, boundary_f_trace, boundary_values

METHODS = ("lie", "strang", "lie-standard", "strang-standard", "lie-split2d", "strang-split2d")
SPLIT_METHODS = ("lie-split2d", "strang-split2d")
DENSE_MAX_SIZE = 1500


def rk4_step(fun, t0: float, y0: np.ndarray, tau: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``y' = fun(t, y)`` over ``[t0, t0 + tau]``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    # overflow shows up as a non-finite stage and is reported below
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = fun(t0, y0)
        k2 = fun(t0 + tau / 2, y0 + tau / 2 * k1)
        k3 = fun(t0 + tau / 2, y0 + tau / 2 * k2)
        k4 = fun(t0 + tau, y0 + tau * k3)
    for stage in (k1, k2, k3, k4):
        if not np.all(np.isfinite(stage)):
            raise FloatingPointError(f"non-finite RK4 stage at t={t0:g}")
    return y0 + tau / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class DenseFlow:
    """Linear substep from a precomputed :class:`PhiTable`.

    Only the columns of ``phi_j`` hit by ``C`` are kept, so boundary terms cost
    ``O(N * n_boundary)``.
    """

    def __init__(self, a, cmap: BoundaryMap, tau: float):
        self.tau = tau
        table = PhiTable.build(a, tau)
        cd = cmap.to_dense()
        self.E = table.E
        self.P1C = table.P1 @ cd
        self.P2C = table.P2 @ cd
        self.table = table

    def __call__(self, v, b1=None, b2=None):
        out = self.E @ v
        if b1 is not None:
            out += self.tau * (self.P1C @ b1)
        if b2 is not None:
            out += self.tau**2 * (self.P2C @ b2)
        return out


class KrylovFlow:
    def __init__(self, a, cmap: BoundaryMap, tau: float, cfg: KrylovConfig):
        self.a, self.cmap, self.tau, self.cfg = a, cmap, tau, cfg

    def __call__(self, v, b1=None, b2=None):
        w1 = None if b1 is None else self.cmap.apply(b1)
        w2 = None if b2 is None else self.cmap.apply(b2)
        return phi_combination(self.a, [v, w1, w2], self.tau, self.cfg)


class LineFlow:
    """Direction-split substep applied block by block.

    ``axis`` 1 runs along x (rows of the ``[j_y, i_x]`` state), 0 along y. The
    boundary vector is the full 2-D one; only the faces normal to ``axis`` are
    read.
    """

    def __init__(self, line: DiscreteOperator, n_hat: int, axis: int, tau: float, faces: tuple[slice, slice]):
        self.inner = DenseFlow(line.A, line.C, tau)
        self.n_hat, self.axis, self.tau = n_hat, axis, tau
        self.lo, self.hi = faces

    def __call__(self, v, b1=None, b2=None):
        n = self.n_hat
        u = v.reshape(n, n)
        fl = self.inner
        out = u @ fl.E.T if self.axis == 1 else fl.E @ u
        for coef, pc, b in ((self.tau, fl.P1C, b1), (self.tau**2, fl.P2C, b2)):
            if b is None:
                continue
            lo, hi = b[self.lo], b[self.hi]
            if self.axis == 1:
                out += coef * (np.outer(lo, pc[:, 0]) + np.outer(hi, pc[:, 1]))
            else:
                out += coef * (np.outer(pc[:, 0], lo) + np.outer(pc[:, 1], hi))
        return out.ravel()


@dataclass(frozen=True)
class IntegratorConfig:
    """``backend`` is ``"dense"`` (precomputed tables), ``"krylov"`` or
    ``"auto"`` (dense up to ``DENSE_MAX_SIZE`` unknowns). ``trace`` picks the
    numerical or exact boundary value of ``u`` in Robin/Neumann traces;
    ``split_display="literal"`` starts the second direction-split stage from
    ``U_n`` instead of the first stage's result."""

    method: str
    k: float
    backend: str = "auto"
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    trace: str = "numeric"
    split_display: str = "chained"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.backend not in ("auto", "dense", "krylov"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.trace not in ("numeric", "exact"):
            raise ValueError(f"unknown trace mode {self.trace!r}")
        if self.split_display not in ("chained", "literal"):
            raise ValueError(f"unknown split display {self.split_display!r}")


@dataclass(eq=False)
class StepContext:
    problem: Problem
    op: DiscreteOperator | SplitOperator2D
    cfg: IntegratorConfig
    reaction: ReactionEvaluator
    flows: dict[str, object]

    @property
    def k(self) -> float:
        return self.cfg.k

    @property
    def grid(self):
        return self.op.grid


def _flow(a, cmap, tau, cfg: IntegratorConfig):
    backend = cfg.backend
    if backend == "auto":
        backend = "dense" if a.n <= DENSE_MAX_SIZE else "krylov"
    if backend == "dense":
        return DenseFlow(a, cmap, tau)
    return KrylovFlow(a, cmap, tau, cfg.krylov)


def make_context(problem: Problem, op, cfg: IntegratorConfig) -> StepContext:
    split = cfg.method in SPLIT_METHODS
    if split != isinstance(op, SplitOperator2D):
        raise ValueError(f"method {cfg.method} needs {'a split' if split else 'an unsplit'} operator")
    for face in op.grid.faces:
        if face.name not in problem.faces:
            raise ValueError(f"problem {problem.name} has no data for face {face.name}")
        if problem.faces[face.name].bc != op.bcs[face.name]:
            raise ValueError(f"boundary condition mismatch on face {face.name}")
    k = cfg.k
    flows: dict[str, object] = {}
    if not split:
        flows["k"] = _flow(op.A, op.C, k, cfg)
    else:
        n = op.grid.n_hat
        g = op.grid
        xf = (g.face_slice("x0"), g.face_slice("x1"))
        yf = (g.face_slice("y0"), g.face_slice("y1"))
        taus = (k,) if cfg.method == "lie-split2d" else (k / 2, k)
        for tau in taus:
            if cfg.backend == "krylov":
                flows[("x", tau)] = _flow(op.A1, op.C1, tau, cfg)
                flows[("y", tau)] = _flow(op.A2, op.C2, tau, cfg)
            else:
                flows[("x", tau)] = LineFlow(op.line, n, 1, tau, xf)
                flows[("y", tau)] = LineFlow(op.line, n, 0, tau, yf)
    return StepContext(problem, op, cfg, ReactionEvaluator(problem, op.grid), flows)


def _trace(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    return boundary_f_trace(ctx.problem, ctx.grid, t, u, exact=ctx.cfg.trace == "exact")


def lie_corrected_step(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    k = ctx.k
    g = boundary_values(ctx.problem, ctx.grid, t, "g")
    dg = boundary_values(ctx.problem, ctx.grid, t, "dg")
    v = ctx.flows["k"](u, g, dg - _trace(ctx, t, u))
    return rk4_step(ctx.reaction, t, v, k)


def strang_corrected_step(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    k = ctx.k
    g = boundary_values(ctx.problem, ctx.grid, t, "g")
    dg = boundary_values(ctx.problem, ctx.grid, t, "dg")
    tr = _trace(ctx, t, u)
    v = rk4_step(ctx.reaction, t, u, k / 2)
    w = ctx.flows["k"](v, g + k / 2 * tr, dg - tr)
    return rk4_step(ctx.reaction, t + k / 2, w, k / 2)


def standard_step(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    """Plain Lie or Strang step for ``U' = A U + [C g(t) + f(t, U)]``."""
    k = ctx.k
    cmap = ctx.op.C

    def forced(s, y):
        return cmap.apply(boundary_values(ctx.problem, ctx.grid, s, "g")) + ctx.reaction(s, y)

    if ctx.cfg.method == "lie-standard":
        return rk4_step(forced, t, ctx.flows["k"](u), k)
    v = rk4_step(forced, t, u, k / 2)
    return rk4_step(forced, t + k / 2, ctx.flows["k"](v), k / 2)


def _split_traces(ctx: StepContext, t: float):
    """Boundary data, ``f`` on the boundary and ``A1 u``, ``A2 u`` on every face.

    On a face the second derivative normal to it follows from the equation,
    ``u_nn = g_t - g_ss - f``, and the one along it is the data's ``g_ss``.
    """
    p, grid = ctx.problem, ctx.grid
    g = boundary_values(p, grid, t, "g")
    dg = boundary_values(p, grid, t, "dg")
    d2g = boundary_values(p, grid, t, "d2g")
    fb = boundary_f_trace(p, grid, t)
    normal = dg - d2g - fb
    xs = np.r_[grid.face_slice("x0"), grid.face_slice("x1")]
    a1u = d2g.copy()
    a1u[xs] = normal[xs]
    a2u = normal.copy()
    a2u[xs] = d2g[xs]
    return g, fb, a1u, a2u


def lie_split2d_step(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    k = ctx.k
    g, _, a1u, a2u = _split_traces(ctx, t)
    z = ctx.flows[("x", k)](u, g, a1u)
    start = z if ctx.cfg.split_display == "chained" else u
    r = ctx.flows[("y", k)](start, g + k * a1u, a2u)
    return rk4_step(ctx.reaction, t, r, k)


def strang_split2d_step(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    k = ctx.k
    g, fb, a1u, a2u = _split_traces(ctx, t)
    base = g + k / 2 * fb
    v = rk4_step(ctx.reaction, t, u, k / 2)
    r = ctx.flows[("x", k / 2)](v, base, a1u)
    phi = ctx.flows[("y", k)](r, base + k / 2 * a1u, a2u)
    mu = ctx.flows[("x", k / 2)](phi, base + k / 2 * a1u + k * a2u, a1u)
    return rk4_step(ctx.reaction, t + k / 2, mu, k / 2)


STEPS = {
    "lie": lie_corrected_step,
    "strang": strang_corrected_step,
    "lie-standard": standard_step,
    "strang-standard": standard_step,
    "lie-split2d": lie_split2d_step,
    "strang-split2d": strang_split2d_step,
}


def step(ctx: StepContext, t: float, u: np.ndarray) -> np.ndarray:
    return STEPS[ctx.cfg.method](ctx, t, u)


def integrate(ctx: StepContext, u0: np.ndarray, T: float, t0: float = 0.0):
    """Step from ``t0`` to ``T``; returns ``(t_final, U)``.

    A non-commensurate horizon gets a shorter last step, built with its own
    context.
    """
    k = ctx.k
    n_full = int(math.floor((T - t0) / k + 1e-9))
    u = np.array(u0, dtype=float)
    t = t0
    for n in range(n_full):
        try:
            u = step(ctx, t, u)
        except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise RuntimeError(f"step {n} at t={t:g} failed: {exc}") from exc
        t = t0 + (n + 1) * k
    rest = T - t
    if rest > 1e-9 * k:
        last = make_context(ctx.problem, ctx.op, _replace_k(ctx.cfg, rest))
        u = step(last, t, u)
        t = T
    return t, u


def _replace_k(cfg: IntegratorConfig, k: float) -> IntegratorConfig:
    return IntegratorConfig(cfg.method, k, cfg.backend, cfg.krylov, cfg.trace, cfg.split_display)
