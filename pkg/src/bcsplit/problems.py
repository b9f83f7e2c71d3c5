"""Reaction-diffusion problems ``u_t = Laplace(u) + phi(u) + h(t, x)`` on [0, 1]^d.

Every callable of space takes ``(t, *coords)`` with one array per dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discretize import BC, DIRICHLET, NEUMANN, Grid


class ProblemConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FaceData:
    """Boundary data on one face.

    ``g`` and ``dg`` are the data and its time derivative; ``d2g`` is the
    second derivative of Dirichlet data along the face (2-D only).
    """

    bc: BC
    g: Callable
    dg: Callable
    d2g: Callable | None = None


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    dim: int
    phi: Callable
    dphi: Callable
    source: Callable
    faces: dict[str, FaceData]
    source_grad: Callable | None = None
    exact: Callable | None = None
    exact_t: Callable | None = None
    exact_lap: Callable | None = None
    initial: Callable | None = None
    notes: str = field(default="", repr=False)

    def f(self, t, u, *coords):
        return self.phi(u) + self.source(t, *coords)

    def u0(self, *coords):
        if self.initial is not None:
            return self.initial(*coords)
        if self.exact is None:
            raise ProblemConfigError(f"{self.name}: no initial data")
        return self.exact(0.0, *coords)

    @property
    def bc_right(self) -> BC:
        return self.faces["right"].bc


class ReactionEvaluator:
    """Nodal evaluation of ``f(t, U) = phi(U) + h(t, x_i)``."""

    def __init__(self, problem: Problem, grid: Grid):
        self.problem = problem
        self.grid = grid
        self.nodes = grid.nodes

    def __call__(self, t: float, u: np.ndarray) -> np.ndarray:
        return reaction(self, t, u)


def reaction(ev: ReactionEvaluator, t: float, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (ev.grid.size,):
        raise ValueError(f"state has shape {u.shape}, grid has {ev.grid.size} nodes")
    return ev.problem.phi(u) + ev.problem.source(t, *ev.nodes)


def boundary_values(problem: Problem, grid: Grid, t: float, which: str = "g") -> np.ndarray:
    """Flat boundary vector of ``g``, ``dg`` or ``d2g`` at time ``t``."""
    parts = []
    for face in grid.faces:
        data = problem.faces[face.name]
        fn = getattr(data, which)
        if fn is None:
            raise ProblemConfigError(f"{problem.name}: face {face.name} has no {which}")
        parts.append(np.broadcast_to(fn(t, *face.coords), (face.size,)).astype(float))
    return np.concatenate(parts)


def boundary_f_trace(problem: Problem, grid: Grid, t: float, u=None, exact: bool = False) -> np.ndarray:
    """Boundary operator applied to ``f(t, u(t))``, face by face.

    Dirichlet faces use the data only: ``phi(g) + h``. Robin/Neumann faces use
    ``alpha [phi(u_b) + h_b] + beta [phi'(u_b) (g - alpha u_b)/beta + dh/dn]``
    with ``u_b`` read from ``u`` at the boundary nodes, or from the exact
    solution when ``exact`` is set.
    """
    parts = []
    for face in grid.faces:
        data = problem.faces[face.name]
        bc = data.bc
        g = np.broadcast_to(data.g(t, *face.coords), (face.size,)).astype(float)
        h_b = np.broadcast_to(problem.source(t, *face.coords), (face.size,))
        if bc.kind == "dirichlet":
            parts.append(problem.phi(g / bc.alpha) + h_b)
            continue
        if problem.source_grad is None:
            raise ProblemConfigError(f"{problem.name}: face {face.name} needs the source gradient")
        if exact:
            if problem.exact is None:
                raise ProblemConfigError(f"{problem.name}: exact trace requested but no exact solution")
            ub = np.broadcast_to(problem.exact(t, *face.coords), (face.size,))
        else:
            if u is None or face.node_index is None:
                raise ProblemConfigError(f"face {face.name}: boundary nodes are not part of the state")
            ub = np.asarray(u, dtype=float)[face.node_index]
        grad = problem.source_grad(t, *face.coords)
        dh_dn = sum(n * np.broadcast_to(gi, (face.size,)) for n, gi in zip(face.normal, grad))
        du_dn = (g - bc.alpha * ub) / bc.beta
        parts.append(bc.alpha * (problem.phi(ub) + h_b) + bc.beta * (problem.dphi(ub) * du_dn + dh_dn))
    return np.concatenate(parts)


def project_exact(problem: Problem, grid: Grid, t: float) -> np.ndarray:
    if problem.exact is None:
        raise ProblemConfigError(f"{problem.name} has no exact solution")
    return np.broadcast_to(problem.exact(t, *grid.nodes), (grid.size,)).astype(float)


def _square(u):
    return u * u


def _two_u(u):
    return 2.0 * u


def _p1() -> dict:
    def exact(t, x):
        return np.exp(t + x**3)

    def exact_lap(t, x):
        return (9 * x**4 + 6 * x) * np.exp(t + x**3)

    def source(t, x):
        e = np.exp(t + x**3)
        return -e * (9 * x**4 + 6 * x + e - 1)

    def source_grad(t, x):
        e = np.exp(t + x**3)
        return (-3 * x**2 * e * (9 * x**4 + 6 * x + e - 1) - e * (36 * x**3 + 6 + 3 * x**2 * e),)

    return dict(
        dim=1, phi=_square, dphi=_two_u, source=source, source_grad=source_grad,
        exact=exact, exact_t=exact, exact_lap=exact_lap,
    )


def p1_dirichlet() -> Problem:
    def g(t, x):
        return np.exp(t + x**3)

    face = FaceData(DIRICHLET, g, g)
    return Problem("p1_dirichlet", faces={"left": face, "right": face}, **_p1())


def p1_neumann() -> Problem:
    def g0(t, x):
        return np.exp(t + x**3)

    def g1(t, x):
        # u_x(1, t) = 3 x^2 e^{t + x^3} at x = 1
        return 3 * x**2 * np.exp(t + x**3)

    return Problem(
        "p1_neumann",
        faces={"left": FaceData(DIRICHLET, g0, g0), "right": FaceData(NEUMANN, g1, g1)},
        **_p1(),
    )


def p2_dirichlet() -> Problem:
    def exact(t, x, y):
        return np.exp(t + x**3 + y**3)

    def exact_lap(t, x, y):
        return (9 * (x**4 + y**4) + 6 * (x + y)) * np.exp(t + x**3 + y**3)

    def source(t, x, y):
        e = np.exp(t + x**3 + y**3)
        return -e * (9 * (x**4 + y**4) + 6 * (x + y) + e - 1)

    def d2_along_y(t, x, y):
        return (9 * y**4 + 6 * y) * np.exp(t + x**3 + y**3)

    def d2_along_x(t, x, y):
        return (9 * x**4 + 6 * x) * np.exp(t + x**3 + y**3)

    xface = FaceData(DIRICHLET, exact, exact, d2_along_y)
    yface = FaceData(DIRICHLET, exact, exact, d2_along_x)
    return Problem(
        "p2_dirichlet", dim=2, phi=_square, dphi=_two_u, source=source,
        faces={"x0": xface, "x1": xface, "y0": yface, "y1": yface},
        exact=exact, exact_t=exact, exact_lap=exact_lap,
    )


def homogeneous_1d() -> Problem:
    """``u = e^t sin(pi x)``: zero Dirichlet data, ``phi(0) = 0`` and ``h = 0`` on the boundary."""

    def exact(t, x):
        return np.exp(t) * np.sin(np.pi * x)

    def exact_lap(t, x):
        return -np.pi**2 * exact(t, x)

    def source(t, x):
        u = exact(t, x)
        return (1 + np.pi**2) * u - u * u

    def zero(t, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    face = FaceData(DIRICHLET, zero, zero)
    return Problem(
        "homogeneous", dim=1, phi=_square, dphi=_two_u, source=source,
        faces={"left": face, "right": face},
        exact=exact, exact_t=exact, exact_lap=exact_lap,
    )


def steady_linear() -> Problem:
    """``u = x`` with ``f = 0``: a steady state of the heat equation with g = (0, 1)."""

    def exact(t, x):
        return np.asarray(x, dtype=float) + 0.0 * t

    def zero_t(t, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def zero_phi(u):
        return np.zeros_like(u)

    face = FaceData(DIRICHLET, exact, zero_t)
    return Problem(
        "steady_linear", dim=1, phi=zero_phi, dphi=zero_phi, source=zero_t,
        faces={"left": face, "right": face},
        exact=exact, exact_t=zero_t, exact_lap=zero_t,
    )


CATALOG = {
    "p1_dirichlet": p1_dirichlet,
    "p1_neumann": p1_neumann,
    "p2_dirichlet": p2_dirichlet,
    "homogeneous": homogeneous_1d,
}
ALIASES = {"p1": "p1_dirichlet", "p2": "p2_dirichlet"}


def benchmark_catalog() -> dict[str, Problem]:
    return {name: make() for name, make in CATALOG.items()}


def get_problem(name: str) -> Problem:
    name = ALIASES.get(name, name)
    if name == "steady_linear":
        return steady_linear()
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(CATALOG) + sorted(ALIASES)}") from None
