"""Finite-difference grids, stiff matrices and boundary-injection maps on [0, 1]^d.

Unknowns in 2-D are ordered lexicographically with x running fastest, so a
state vector reshaped to ``(n_hat, n_hat)`` is indexed ``[j_y, i_x]``.
Boundary values are flat arrays, face after face in ``grid.faces`` order; 2-D
faces exclude the corners.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import BandedMatrix, mat_vec, solve


@dataclass(frozen=True)
class BC:
    """Boundary condition ``alpha u + beta du/dn = g`` (``beta = 0`` is Dirichlet)."""

    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both vanish")

    @property
    def kind(self) -> str:
        if self.beta == 0:
            return "dirichlet"
        return "neumann" if self.alpha == 0 else "robin"


DIRICHLET = BC(1.0, 0.0)
NEUMANN = BC(0.0, 1.0)


def as_bc(bc) -> BC:
    if isinstance(bc, BC):
        return bc
    if bc == "dirichlet":
        return DIRICHLET
    if bc == "neumann":
        return NEUMANN
    if isinstance(bc, tuple) and len(bc) == 2:
        return BC(float(bc[0]), float(bc[1]))
    raise ValueError(f"unknown boundary condition {bc!r}")


@dataclass(frozen=True, eq=False)
class Face:
    """A piece of the boundary: its points, outward normal and, when the
    boundary points are unknowns themselves, their indices in the state."""

    name: str
    coords: tuple[np.ndarray, ...]
    normal: tuple[int, ...]
    node_index: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.coords[0].shape[0]


@dataclass(frozen=True, eq=False)
class Grid:
    dim: int
    n_hat: int
    h: float
    nodes: tuple[np.ndarray, ...]
    faces: tuple[Face, ...]

    @property
    def size(self) -> int:
        return self.nodes[0].shape[0]

    @property
    def n_boundary(self) -> int:
        return sum(f.size for f in self.faces)

    def face(self, name: str) -> Face:
        for f in self.faces:
            if f.name == name:
                return f
        raise KeyError(name)

    def face_slice(self, name: str) -> slice:
        start = 0
        for f in self.faces:
            if f.name == name:
                return slice(start, start + f.size)
            start += f.size
        raise KeyError(name)


@dataclass(frozen=True, eq=False)
class BoundaryMap:
    """Sparse linear map from boundary values to a state-sized vector."""

    n: int
    n_boundary: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_boundary,):
            raise ValueError(f"expected {self.n_boundary} boundary values, got shape {values.shape}")
        return np.bincount(self.rows, self.weights * values[self.cols], minlength=self.n)

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n_boundary))
        np.add.at(m, (self.rows, self.cols), self.weights)
        return m

    def __add__(self, other: "BoundaryMap") -> "BoundaryMap":
        if (self.n, self.n_boundary) != (other.n, other.n_boundary):
            return NotImplemented
        return BoundaryMap(
            self.n,
            self.n_boundary,
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.cols, other.cols]),
            np.concatenate([self.weights, other.weights]),
        )


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """``A_{h,g} U = A U + C g``."""

    A: BandedMatrix
    grid: Grid
    bcs: dict[str, BC]
    C: BoundaryMap

    @property
    def size(self) -> int:
        return self.A.n


@dataclass(frozen=True, eq=False)
class SplitOperator2D:
    """x- and y-direction parts of the five-point operator.

    ``A1``/``C1`` act along x and read the x-faces of a full boundary vector;
    ``A2``/``C2`` act along y and read the y-faces. ``line`` is the 1-D
    Dirichlet operator every block of ``A1`` and ``A2`` equals.
    """

    A1: BandedMatrix
    A2: BandedMatrix
    C1: BoundaryMap
    C2: BoundaryMap
    grid: Grid
    line: DiscreteOperator
    bcs: dict[str, BC] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.A1.n


def _check_n_hat(n_hat: int):
    if int(n_hat) != n_hat or n_hat < 3:
        raise ValueError(f"need at least 3 interior nodes per direction, got {n_hat}")


def n_hat_from_h(h: float) -> int:
    n = round(1.0 / h) - 1
    if abs((n + 1) * h - 1.0) > 1e-9:
        raise ValueError(f"h={h} does not divide [0, 1] evenly")
    return n


def build_1d(n_hat: int, bc_right="dirichlet") -> DiscreteOperator:
    """Second-order difference operator on [0, 1], Dirichlet at x = 0.

    With a Dirichlet right end the unknowns are the ``n_hat`` interior nodes.
    With a Neumann/Robin right end (``alpha u + beta u_x = g``) the node x = 1
    is an unknown too; a ghost node eliminated through the boundary condition
    gives the last row ``[2, -2 - 2 h alpha / beta] / h^2`` and the injection
    ``2 g / (h beta)``.
    """
    _check_n_hat(n_hat)
    bc = as_bc(bc_right)
    h = 1.0 / (n_hat + 1)
    ih2 = 1.0 / h**2
    left = Face("left", (np.array([0.0]),), (-1,))
    if bc.kind == "dirichlet":
        n = n_hat
        x = h * np.arange(1, n_hat + 1)
        a = BandedMatrix.tridiag(n, ih2, -2 * ih2, ih2)
        right = Face("right", (np.array([1.0]),), (1,))
        cmap = BoundaryMap(n, 2, np.array([0, n - 1]), np.array([0, 1]), np.array([ih2, ih2 / bc.alpha]))
    else:
        n = n_hat + 1
        x = h * np.arange(1, n_hat + 2)
        x[-1] = 1.0
        lower = np.full(n - 1, ih2)
        lower[-1] = 2 * ih2
        diag = np.full(n, -2 * ih2)
        diag[-1] = (-2 - 2 * h * bc.alpha / bc.beta) * ih2
        a = BandedMatrix(n, {-1: lower, 0: diag, 1: np.full(n - 1, ih2)})
        right = Face("right", (np.array([1.0]),), (1,), node_index=np.array([n - 1]))
        cmap = BoundaryMap(n, 2, np.array([0, n - 1]), np.array([0, 1]), np.array([ih2, 2.0 / (h * bc.beta)]))
    grid = Grid(1, n_hat, h, (x,), (left, right))
    return DiscreteOperator(a, grid, {"left": DIRICHLET, "right": bc}, cmap)


def grid_2d(n_hat: int) -> Grid:
    _check_n_hat(n_hat)
    h = 1.0 / (n_hat + 1)
    s = h * np.arange(1, n_hat + 1)
    xx, yy = np.meshgrid(s, s)  # [j_y, i_x], x fastest once raveled
    zeros, ones = np.zeros(n_hat), np.ones(n_hat)
    faces = (
        Face("x0", (zeros, s.copy()), (-1, 0)),
        Face("x1", (ones, s.copy()), (1, 0)),
        Face("y0", (s.copy(), zeros), (0, -1)),
        Face("y1", (s.copy(), ones), (0, 1)),
    )
    return Grid(2, n_hat, h, (xx.ravel(), yy.ravel()), faces)


def _face_maps_2d(n_hat: int, h: float) -> tuple[BoundaryMap, BoundaryMap]:
    n = n_hat * n_hat
    idx = np.arange(n_hat)
    w = np.full(2 * n_hat, 1.0 / h**2)
    # x0 -> nodes (i=0, j); x1 -> (i=n-1, j); y0 -> (i, j=0); y1 -> (i, j=n-1)
    rows_x = np.concatenate([idx * n_hat, idx * n_hat + n_hat - 1])
    cols_x = np.concatenate([idx, n_hat + idx])
    rows_y = np.concatenate([idx, (n_hat - 1) * n_hat + idx])
    cols_y = np.concatenate([2 * n_hat + idx, 3 * n_hat + idx])
    nb = 4 * n_hat
    return BoundaryMap(n, nb, rows_x, cols_x, w), BoundaryMap(n, nb, rows_y, cols_y, w.copy())


def _direction_matrices(n_hat: int, h: float) -> tuple[BandedMatrix, BandedMatrix]:
    n = n_hat * n_hat
    ih2 = 1.0 / h**2
    off1 = np.full(n - 1, ih2)
    off1[n_hat - 1 :: n_hat] = 0.0  # no coupling across rows of constant y
    a1 = BandedMatrix(n, {-1: off1, 0: np.full(n, -2 * ih2), 1: off1})
    offn = np.full(n - n_hat, ih2)
    a2 = BandedMatrix(n, {-n_hat: offn, 0: np.full(n, -2 * ih2), n_hat: offn})
    return a1, a2


def build_2d_5pt(n_hat: int) -> DiscreteOperator:
    """Five-point Laplacian on the interior nodes of the unit square."""
    grid = grid_2d(n_hat)
    a1, a2 = _direction_matrices(n_hat, grid.h)
    c1, c2 = _face_maps_2d(n_hat, grid.h)
    bcs = {f.name: DIRICHLET for f in grid.faces}
    return DiscreteOperator(a1 + a2, grid, bcs, c1 + c2)


def build_2d_split(n_hat: int) -> SplitOperator2D:
    grid = grid_2d(n_hat)
    a1, a2 = _direction_matrices(n_hat, grid.h)
    c1, c2 = _face_maps_2d(n_hat, grid.h)
    bcs = {f.name: DIRICHLET for f in grid.faces}
    return SplitOperator2D(a1, a2, c1, c2, grid, build_1d(n_hat), bcs)


def elliptic_projection(op: DiscreteOperator, au: np.ndarray, bu: np.ndarray) -> np.ndarray:
    """``R_h u`` solving ``A R_h u + C (boundary data of u) = P_h (A u)``.

    ``au`` is the continuous operator applied to ``u`` sampled on the grid
    nodes; ``bu`` holds the boundary data of ``u`` in the operator's boundary
    conditions (values on Dirichlet faces, ``alpha u + beta du/dn`` elsewhere).
    """
    return solve(op.A, np.asarray(au, dtype=float) - op.C.apply(bu))


def consistency_errors(op: DiscreteOperator, pu, au, bu) -> tuple[float, float]:
    """``(||A (P_h u - R_h u)||_inf, ||P_h u - R_h u||_inf)``."""
    pu = np.asarray(pu, dtype=float)
    diff = pu - elliptic_projection(op, au, bu)
    return float(np.max(np.abs(mat_vec(op.A, diff)))), float(np.max(np.abs(diff)))


def log_norm_inf(a) -> float:
    """Logarithmic max-norm ``max_i (a_ii + sum_{j != i} |a_ij|)``."""
    if isinstance(a, BandedMatrix):
        return float(np.max(a.diagonal() + a.row_abs_sums()))
    a = np.asarray(a, dtype=float)
    off = np.sum(np.abs(a), axis=1) - np.abs(np.diag(a))
    return float(np.max(np.diag(a) + off))
