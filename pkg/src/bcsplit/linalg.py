"""Dense and banded matrix kernels over double-precision reals.

Vectors and dense matrices are plain ``numpy`` arrays. Banded matrices are
stored by diagonals (only the offsets that are actually populated), which keeps
the five-point operator at five stored diagonals even though its bandwidth is
``n_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import splu
from scipy.sparse.linalg import LinearOperator, onenormest

TOL_SOLVE = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a system cannot be solved to ``TOL_SOLVE``.

    Carries the 1-norm condition estimate (``inf`` for exact singularity).
    """

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


@dataclass(frozen=True, eq=False)
class BandedMatrix:
    """Square matrix stored by its nonzero diagonals.

    ``diags[o][i]`` is the entry ``M[i, i + o]`` for ``o >= 0`` and
    ``M[i - o, i]`` for ``o < 0``; each diagonal has length ``n - |o|``.
    """

    n: int
    diags: dict[int, np.ndarray] = field(repr=False)

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("matrix dimension must be positive")
        clean = {}
        for off, d in self.diags.items():
            off = int(off)
            d = np.asarray(d, dtype=float)
            if abs(off) >= self.n:
                raise ValueError(f"offset {off} out of range for n={self.n}")
            if d.shape != (self.n - abs(off),):
                raise ValueError(f"diagonal {off} has shape {d.shape}")
            if not np.all(np.isfinite(d)):
                raise ValueError("banded matrix entries must be finite")
            d = d.copy()
            d.setflags(write=False)
            clean[off] = d
        object.__setattr__(self, "diags", dict(sorted(clean.items())))

    @classmethod
    def tridiag(cls, n: int, lower: float, diag: float, upper: float) -> "BandedMatrix":
        return cls(n, {-1: np.full(n - 1, lower), 0: np.full(n, diag), 1: np.full(n - 1, upper)})

    @classmethod
    def from_dense(cls, m: np.ndarray) -> "BandedMatrix":
        m = np.asarray(m, dtype=float)
        n = m.shape[0]
        diags = {}
        for off in range(-n + 1, n):
            d = np.diagonal(m, off)
            if np.any(d != 0.0):
                diags[off] = d
        return cls(n, diags or {0: np.zeros(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def lower(self) -> int:
        return max(0, -min(self.diags))

    @property
    def upper(self) -> int:
        return max(0, max(self.diags))

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for off, d in self.diags.items():
            idx = np.arange(self.n - abs(off))
            if off >= 0:
                m[idx, idx + off] = d
            else:
                m[idx - off, idx] = d
        return m

    def diagonal(self) -> np.ndarray:
        return self.diags.get(0, np.zeros(self.n))

    def scaled(self, c: float) -> "BandedMatrix":
        return BandedMatrix(self.n, {o: c * d for o, d in self.diags.items()})

    def __add__(self, other: "BandedMatrix") -> "BandedMatrix":
        if not isinstance(other, BandedMatrix) or other.n != self.n:
            return NotImplemented
        out = {o: d.copy() for o, d in self.diags.items()}
        for o, d in other.diags.items():
            out[o] = out[o] + d if o in out else d
        return BandedMatrix(self.n, out)

    def row_abs_sums(self) -> np.ndarray:
        """Sum of absolute off-diagonal entries in every row."""
        s = np.zeros(self.n)
        for off, d in self.diags.items():
            if off > 0:
                s[: self.n - off] += np.abs(d)
            elif off < 0:
                s[-off:] += np.abs(d)
        return s

    def norm1(self) -> float:
        s = np.zeros(self.n)
        for off, d in self.diags.items():
            if off >= 0:
                s[off:] += np.abs(d)
            else:
                s[: self.n + off] += np.abs(d)
        return float(s.max())

    def to_sparse(self) -> sp.csc_matrix:
        offs = list(self.diags)
        return sp.diags([self.diags[o] for o in offs], offs, shape=self.shape, format="csc")

    def to_lapack(self, extra_rows: int = 0) -> np.ndarray:
        """Band storage ``ab[extra_rows + ku + i - j, j] = M[i, j]``."""
        kl, ku = self.lower, self.upper
        ab = np.zeros((extra_rows + kl + ku + 1, self.n))
        for off, d in self.diags.items():
            row = extra_rows + ku - off
            if off >= 0:
                ab[row, off:] = d
            else:
                ab[row, : self.n + off] = d
        return ab


def _check_vector(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != n:
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, vector has {v.shape[0]} rows")
    return v


def mat_vec(m, v: np.ndarray) -> np.ndarray:
    """Product ``m @ v`` for a dense array or a :class:`BandedMatrix`.

    ``v`` may also be a 2-D array of column vectors.
    """
    if isinstance(m, BandedMatrix):
        v = _check_vector(v, m.n)
        out = np.zeros(v.shape)
        n = m.n
        for off, d in m.diags.items():
            dd = d if v.ndim == 1 else d[:, None]
            if off == 0:
                out += dd * v
            elif off > 0:
                out[: n - off] += dd * v[off:]
            else:
                out[-off:] += dd * v[: n + off]
        return out
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    v = _check_vector(v, m.shape[1])
    return m @ v


class _Factorization:
    matrix: BandedMatrix

    def solve(self, b: np.ndarray, trans: int = 0) -> np.ndarray:
        raise NotImplementedError

    def condition(self) -> float:
        """1-norm condition number estimate (Hager/Higham)."""
        n = self.matrix.n
        inv = LinearOperator(
            (n, n),
            matvec=lambda x: self.solve(np.ravel(x)),
            rmatvec=lambda x: self.solve(np.ravel(x), trans=1),
            dtype=float,
        )
        return self.matrix.norm1() * onenormest(inv)


class BandedLU(_Factorization):
    """LU factorization (partial pivoting) of a banded matrix, reusable across solves."""

    def __init__(self, m: BandedMatrix):
        self.matrix = m
        self.kl, self.ku = m.lower, m.upper
        lu, piv, info = lapack.dgbtrf(m.to_lapack(extra_rows=self.kl), self.kl, self.ku)
        if info > 0:
            raise SingularMatrixError("banded matrix is singular", np.inf)
        self._lu, self._piv = lu, piv

    def solve(self, b: np.ndarray, trans: int = 0) -> np.ndarray:
        b = _check_vector(b, self.matrix.n)
        rhs = b.reshape(self.matrix.n, -1)
        x, info = lapack.dgbtrs(self._lu, self.kl, self.ku, rhs, self._piv, trans=trans)
        if info != 0:
            raise np.linalg.LinAlgError(f"dgbtrs failed with info={info}")
        return x.reshape(b.shape)


class SparseLU(_Factorization):
    """Sparse LU with a fill-reducing ordering.

    For wide, sparsely populated bands (the five-point operator) this fills
    far less than band storage, which must keep every in-band entry.
    """

    def __init__(self, m: BandedMatrix):
        self.matrix = m
        try:
            self._lu = splu(m.to_sparse(), permc_spec="MMD_AT_PLUS_A")
        except RuntimeError:
            raise SingularMatrixError("sparse matrix is singular", np.inf) from None

    def solve(self, b: np.ndarray, trans: int = 0) -> np.ndarray:
        b = _check_vector(b, self.matrix.n)
        return self._lu.solve(b, trans="T" if trans else "N")


# Bandwidths above this go through SparseLU; below it band storage is cheaper.
SPARSE_BANDWIDTH = 8


def factorize(m: BandedMatrix) -> BandedLU | SparseLU:
    """LU factorization of ``m`` with the storage suited to its band."""
    if m.lower + m.upper > SPARSE_BANDWIDTH:
        return SparseLU(m)
    return BandedLU(m)


def solve(m, b: np.ndarray, tol: float = TOL_SOLVE) -> np.ndarray:
    """Solve ``m x = b`` and verify the relative residual.

    Raises
    ------
    SingularMatrixError
        If ``m`` is singular or the residual ``||m x - b||_inf`` exceeds
        ``tol * ||b||_inf``.
    """
    b = np.asarray(b, dtype=float)
    if isinstance(m, BandedMatrix):
        lu = factorize(m)
        x = lu.solve(b)
        cond = lu.condition
    else:
        m = np.asarray(m, dtype=float)
        b = _check_vector(b, m.shape[0])
        try:
            x = np.linalg.solve(m, b)
        except np.linalg.LinAlgError:
            raise SingularMatrixError("dense matrix is singular", np.inf) from None
        cond = lambda: float(np.linalg.cond(m, 1))  # noqa: E731
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution is not finite", cond())
    if norm_max(mat_vec(m, x) - b) > tol * max(norm_max(b), np.finfo(float).tiny):
        raise SingularMatrixError("residual above tolerance", cond())
    return x


def norm_max(v: np.ndarray) -> float:
    """Maximum norm ``max_i |v_i|`` (0 for an empty array)."""
    v = np.asarray(v)
    return float(np.max(np.abs(v))) if v.size else 0.0


def induced_norm_max(m) -> float:
    """Operator norm induced by the max norm: the largest absolute row sum."""
    if isinstance(m, BandedMatrix):
        return float(np.max(np.abs(m.diagonal()) + m.row_abs_sums()))
    return float(np.max(np.sum(np.abs(m), axis=1)))
