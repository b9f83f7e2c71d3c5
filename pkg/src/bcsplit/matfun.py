"""Matrix exponential, phi-functions and their action on vectors.

``phi_0(z) = e^z`` and ``phi_{j+1}(z) = (phi_j(z) - 1/j!) / z``.

Dense path: Pade scaling-and-squaring for the exponential and a Taylor
scaling-and-squaring scheme for the phi-functions. Krylov path: Arnoldi on the augmented operator

    [[A, W], [0, J]]

whose exponential carries ``e^{tA} v0 + sum_j t^j phi_j(tA) w_j`` in its top
block, so one subspace yields every phi term of a step.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .linalg import BandedLU, BandedMatrix, SparseLU, factorize, mat_vec

TOL_PHI = 1e-9

# Pade numerator coefficients b_0..b_m for degrees 3, 5, 7, 9, 13 and the
# 1-norm bounds theta_m below which each degree meets unit roundoff.
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


class KrylovConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


def _pade_uv(a: np.ndarray, m: int, powers: dict[int, np.ndarray]):
    b = _PADE[m]
    n = a.shape[0]
    ident = np.eye(n)
    if m < 13:
        u = b[1] * ident
        v = b[0] * ident
        for k in range(2, m + 1, 2):
            if k not in powers:
                powers[k] = powers[k - 2] @ powers[2]
            u = u + b[k + 1] * powers[k]
            v = v + b[k] * powers[k]
        return a @ u, v
    a2, a4, a6 = powers[2], powers[4], powers[6]
    u = a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    return a @ u, v


def expm_dense(m: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    The degree (3, 5, 7, 9 or 13) and the number of squarings are chosen from
    the 1-norm of ``m`` so the backward error stays at unit roundoff.

    Raises
    ------
    OverflowError
        If the result is not representable.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expm_dense needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    n = a.shape[0]
    if n == 0:
        return a
    norm = np.max(np.sum(np.abs(a), axis=0))
    if norm == 0.0:
        return np.eye(n)
    powers: dict[int, np.ndarray] = {}
    s = 0
    for deg in (3, 5, 7, 9):
        if norm <= _THETA[deg]:
            powers[2] = a @ a
            u, v = _pade_uv(a, deg, powers)
            break
    else:
        deg = 13
        s = max(0, int(math.ceil(math.log2(norm / _THETA[13]))))
        if s > 1000:
            raise OverflowError("matrix norm too large for expm_dense")
        a = a / 2.0**s
        powers[2] = a @ a
        powers[4] = powers[2] @ powers[2]
        powers[6] = powers[2] @ powers[4]
        u, v = _pade_uv(a, deg, powers)
    with np.errstate(over="raise", invalid="raise"):
        try:
            r = np.linalg.solve(v - u, v + u)
            for _ in range(s):
                r = r @ r
        except FloatingPointError:
            raise OverflowError("matrix exponential overflows") from None
    if not np.all(np.isfinite(r)):
        raise OverflowError("matrix exponential overflows")
    return r


def _phi_taylor(j: int, m: np.ndarray) -> np.ndarray:
    # phi_j(M) = sum_i M^i / (i + j)!, accurate while ||M|| is small.
    n = m.shape[0]
    term = np.eye(n) / math.factorial(j)
    out = term.copy()
    for i in range(1, 60):
        term = term @ m / (i + j)
        out += term
        if np.max(np.abs(term)) <= 1e-17 * np.max(np.abs(out)):
            break
    return out


_SQUARING_NORM = 0.5


def _phi_squaring(m: np.ndarray, jmax: int) -> list[np.ndarray]:
    """``[e^M, phi_1(M), ..., phi_jmax(M)]`` by scaling and squaring.

    Taylor series for ``phi_jmax`` at ``M / 2^s`` (1-norm below 1/2), the lower
    functions from ``phi_j = M phi_{j+1} + I/j!``, then ``s`` doublings

        phi_j(2z) = 2^{-j} [e^z phi_j(z) + sum_{i=1..j} phi_i(z) / (j-i)!].

    No step divides by ``M``, so accuracy does not degrade when ``M`` has
    eigenvalues near zero.
    """
    n = m.shape[0]
    norm = float(np.max(np.sum(np.abs(m), axis=0))) if n else 0.0
    if not np.isfinite(norm):
        raise ValueError("matrix must be finite")
    s = max(0, math.ceil(math.log2(norm / _SQUARING_NORM))) if norm > 0 else 0
    ms = m / 2.0**s
    ident = np.eye(n)
    phis = [_phi_taylor(jmax, ms)]
    for j in range(jmax - 1, -1, -1):
        phis.insert(0, ms @ phis[0] + ident / math.factorial(j))
    for _ in range(s):
        e = phis[0]
        doubled = [e @ e]
        for j in range(1, jmax + 1):
            acc = e @ phis[j]
            for i in range(1, j + 1):
                acc += phis[i] / math.factorial(j - i)
            doubled.append(acc / 2.0**j)
        phis = doubled
    if not all(np.all(np.isfinite(p)) for p in phis):
        raise OverflowError("phi functions overflow")
    return phis


def phi_dense(j: int, m: np.ndarray) -> np.ndarray:
    """``phi_j(M)`` for ``j`` in 0..3.

    Computed by scaling and squaring (see :func:`_phi_squaring`), which needs
    no solves, so singular ``M`` is fine. The result satisfies
    ``M phi_{j+1}(M) = phi_j(M) - I/j!``.
    """
    if j not in (0, 1, 2, 3):
        raise ValueError("phi_dense supports j = 0..3")
    m = np.asarray(m, dtype=float)
    if j == 0:
        return expm_dense(m)
    return _phi_squaring(m, j)[j]


@dataclass(frozen=True, eq=False)
class PhiTable:
    """``e^{tau A}``, ``phi_1(tau A)`` and ``phi_2(tau A)`` as dense matrices."""

    tau: float
    E: np.ndarray
    P1: np.ndarray
    P2: np.ndarray

    @classmethod
    def build(cls, a, tau: float) -> "PhiTable":
        if tau <= 0:
            raise ValueError("tau must be positive")
        dense = a.to_dense() if isinstance(a, BandedMatrix) else np.asarray(a, dtype=float)
        e, p1, p2 = _phi_squaring(tau * dense, 2)
        return cls(tau, e, p1, p2)

    @property
    def n(self) -> int:
        return self.E.shape[0]

    def recurrence_residuals(self, a) -> tuple[float, float]:
        """Max-norm residuals of ``tau A P1 - (E - I)`` and ``tau A P2 - (P1 - I)``."""
        dense = a.to_dense() if isinstance(a, BandedMatrix) else np.asarray(a, dtype=float)
        m = self.tau * dense
        ident = np.eye(self.n)
        r1 = np.max(np.abs(m @ self.P1 - (self.E - ident)))
        r2 = np.max(np.abs(m @ self.P2 - (self.P1 - ident)))
        return float(r1), float(r2)


@dataclass(frozen=True)
class KrylovConfig:
    """Arnoldi settings.

    ``substep`` lets a call split ``[0, tau]`` into substeps when the subspace
    of dimension ``m_max`` does not reach ``tol``; without it such a call fails.
    ``shift_invert`` builds the subspace from ``(I - gamma A)^{-1}`` with
    ``gamma = gamma_ratio * tau`` instead of ``A``, which converges in a
    number of iterations that does not grow with the stiffness of ``A``. It
    applies to :class:`BandedMatrix` operators; others always use plain
    Arnoldi.
    """

    m_max: int = 60
    tol: float = 1e-10
    substep: bool = True
    check_every: int = 4
    shift_invert: bool = True
    gamma_ratio: float = 0.1

    def __post_init__(self):
        if self.m_max < 2:
            raise ValueError("m_max must be at least 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.gamma_ratio <= 0:
            raise ValueError("gamma_ratio must be positive")


def _as_operator(a):
    if isinstance(a, (BandedMatrix, np.ndarray)):
        return lambda x: mat_vec(a, x), a.shape[0]
    if callable(a) and hasattr(a, "shape"):
        return a, a.shape[0]
    raise TypeError("operator must be a BandedMatrix, an ndarray or a callable with .shape")


def _phi1_last(hm: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    # exp of [[dt H, e1], [0, 0]] gives exp(dt H) e1 and phi_1(dt H) e1 in one go.
    m = hm.shape[0]
    big = np.zeros((m + 1, m + 1))
    big[:m, :m] = dt * hm
    big[0, m] = 1.0
    eb = expm_dense(big)
    return eb[:m, 0], eb[:m, m]


def phi_combination(
    a, vectors, tau: float, cfg: KrylovConfig | None = None, scale: float | None = None
) -> np.ndarray:
    """``e^{tau A} v0 + sum_{j>=1} tau^j phi_j(tau A) v_j`` by Krylov projection.

    Parameters
    ----------
    a : BandedMatrix, ndarray or callable with ``shape``
        The operator ``A``; only products with it are used.
    vectors : sequence of ndarray or None
        ``[v0, v1, ..., vp]``; ``None`` entries count as zero.
    tau : float
        Positive time.
    cfg : KrylovConfig, optional
    scale : float, optional
        Expected size of the result. The tolerance is relative to
        ``max(||v0||, scale)``; by default ``scale`` is ``||v0||`` or, when
        ``v0`` vanishes, the crude bound ``max_j tau^j ||v_j|| / j!``.

    Raises
    ------
    KrylovConvergenceError
        If ``m_max`` basis vectors do not reach the tolerance and substepping
        is disabled, or the substep collapses.
    """
    cfg = cfg or KrylovConfig()
    if tau <= 0:
        raise ValueError("tau must be positive")
    op, n = _as_operator(a)
    vecs = [None if v is None else np.asarray(v, dtype=float) for v in vectors]
    v0 = np.zeros(n) if vecs[0] is None else vecs[0]
    ws = [w for w in vecs[1:]]
    while ws and (ws[-1] is None or not np.any(ws[-1])):
        ws.pop()
    p = len(ws)
    if v0.shape != (n,) or any(w is not None and w.shape != (n,) for w in ws):
        raise ValueError("vector lengths must match the operator")
    if not np.all(np.isfinite(v0)) or any(w is not None and not np.all(np.isfinite(w)) for w in ws):
        raise ValueError("vectors must be finite")

    # W columns ordered [w_p, ..., w_1]; bottom state starts at c * e_p and W is
    # divided by c so the top block is unchanged. c balances the two blocks.
    if p:
        wmat = np.zeros((n, p))
        for j, w in enumerate(ws, start=1):
            if w is not None:
                wmat[:, p - j] = w
        v0_norm = np.linalg.norm(v0)
        if scale is not None and scale > 0:
            c = max(v0_norm, scale)
        elif v0_norm > 0:
            c = v0_norm
        else:
            c = max(tau**j * np.linalg.norm(w) / math.factorial(j) for j, w in enumerate(ws, 1) if w is not None)
        wmat /= c
    x = np.concatenate([v0, np.zeros(p)])
    if p:
        x[n + p - 1] = c
    if not np.any(x):
        return np.zeros(n)

    def aug(z):
        out = np.empty_like(z)
        out[:n] = op(z[:n])
        if p:
            out[:n] += wmat @ z[n:]
            out[n:-1] = z[n + 1:]
            out[-1] = 0.0
        return out

    if cfg.shift_invert and isinstance(a, BandedMatrix):
        gamma = cfg.gamma_ratio * tau
        lu = _shift_invert_lu(a, gamma)

        def aug_inv(z):
            # (I - gamma A_aug)^{-1} z by back substitution on the nilpotent block.
            y2 = z[n:].copy()
            for i in range(p - 2, -1, -1):
                y2[i] += gamma * y2[i + 1]
            rhs = z[:n] + gamma * (wmat @ y2) if p else z[:n]
            return np.concatenate([lu.solve(rhs), y2])

        return _shift_invert_step(aug_inv, x, tau, gamma, cfg)[:n]

    t = 0.0
    dt = tau
    while t < tau * (1 - 1e-14):
        dt = min(dt, tau - t)
        x, dt_used = _arnoldi_step(aug, x, dt, tau, cfg)
        t += dt_used
        dt = 2.0 * dt_used
    return x[:n]


def _arnoldi_step(aug, x, dt, tau, cfg: KrylovConfig):
    """Advance ``x`` by ``exp(dt_used * A_aug)`` with ``dt_used <= dt``."""
    beta = np.linalg.norm(x)
    size = x.shape[0]
    m_max = min(cfg.m_max, size)
    basis = np.zeros((m_max + 1, size))
    hess = np.zeros((m_max + 1, m_max))
    basis[0] = x / beta
    err = np.inf
    for j in range(m_max):
        w = aug(basis[j])
        for _ in range(2):  # classical Gram-Schmidt, applied twice
            coef = basis[: j + 1] @ w
            w -= coef @ basis[: j + 1]
            hess[: j + 1, j] += coef
        hnext = np.linalg.norm(w)
        hess[j + 1, j] = hnext
        m = j + 1
        if hnext <= 1e-12 * max(1.0, np.abs(hess[: m, : m]).max()):
            e1, _ = _phi1_last(hess[:m, :m], dt)
            return beta * (e1 @ basis[:m]), dt
        if m % cfg.check_every == 0 or m == m_max:
            e1, p1 = _phi1_last(hess[:m, :m], dt)
            err = beta * hnext * dt * abs(p1[m - 1])
            if err <= cfg.tol * beta * dt / tau:
                return beta * (e1 @ basis[:m]), dt
        basis[j + 1] = w / hnext
    if not cfg.substep:
        raise KrylovConvergenceError(f"no convergence with m_max={cfg.m_max}", err / beta)
    # The basis is independent of dt: shrink dt until the estimate passes.
    hm = hess[:m_max, :m_max]
    hnext = hess[m_max, m_max - 1]
    trial = dt
    for _ in range(60):
        trial *= 0.5
        e1, p1 = _phi1_last(hm, trial)
        err = beta * hnext * trial * abs(p1[-1])
        if err <= cfg.tol * beta * trial / tau:
            return beta * (e1 @ basis[:m_max]), trial
    raise KrylovConvergenceError("substep collapsed", err / beta)


_SI_CACHE: dict[tuple[int, float], tuple[BandedMatrix, BandedLU | SparseLU]] = {}


def _shift_invert_lu(a: BandedMatrix, gamma: float) -> BandedLU | SparseLU:
    key = (id(a), gamma)
    hit = _SI_CACHE.get(key)
    if hit is not None and hit[0] is a:
        return hit[1]
    shifted = a.scaled(-gamma) + BandedMatrix(a.n, {0: np.ones(a.n)})
    lu = factorize(shifted)
    if len(_SI_CACHE) >= 16:
        _SI_CACHE.pop(next(iter(_SI_CACHE)))
    _SI_CACHE[key] = (a, lu)
    return lu


def _shift_invert_step(aug_inv, x, tau, gamma, cfg: KrylovConfig):
    """``exp(tau A_aug) x`` from the Arnoldi process of ``(I - gamma A_aug)^{-1}``.

    Convergence is judged by the change between successive approximations.
    """
    beta = np.linalg.norm(x)
    size = x.shape[0]
    m_max = min(cfg.m_max, size)
    basis = np.zeros((m_max + 1, size))
    hess = np.zeros((m_max + 1, m_max))
    basis[0] = x / beta
    prev = None
    err = np.inf
    for j in range(m_max):
        w = aug_inv(basis[j])
        for _ in range(2):
            coef = basis[: j + 1] @ w
            w -= coef @ basis[: j + 1]
            hess[: j + 1, j] += coef
        hnext = np.linalg.norm(w)
        hess[j + 1, j] = hnext
        m = j + 1
        breakdown = hnext <= 1e-14 * max(1.0, np.abs(hess[:m, :m]).max())
        if breakdown or m % cfg.check_every == 0 or m == m_max:
            hm = hess[:m, :m]
            try:
                generator = (np.eye(m) - np.linalg.inv(hm)) / gamma
            except np.linalg.LinAlgError:
                generator = None
            if generator is not None:
                coeffs = expm_dense(tau * generator)[:, 0]
                if breakdown:
                    return beta * (coeffs @ basis[:m])
                if prev is not None:
                    padded = np.zeros(m)
                    padded[: prev.shape[0]] = prev
                    err = np.linalg.norm(coeffs - padded)
                    if err <= cfg.tol:
                        return beta * (coeffs @ basis[:m])
                prev = coeffs
        basis[j + 1] = w / hnext
    raise KrylovConvergenceError(f"shift-invert Krylov: no convergence with m_max={cfg.m_max}", err)


def krylov_phi_apply(a, v: np.ndarray, tau: float, j: int, cfg: KrylovConfig | None = None) -> np.ndarray:
    """``phi_j(tau A) v`` (``j = 0`` gives ``e^{tau A} v``) by Krylov projection."""
    if j not in (0, 1, 2, 3):
        raise ValueError("j must be in 0..3")
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return np.zeros_like(v)
    vectors = [None] * (j + 1)
    vectors[j] = v
    if j == 0:
        return phi_combination(a, vectors, tau, cfg)
    cfg = cfg or KrylovConfig()
    # A loose first pass sizes the result so the tolerance is relative to it.
    rough = phi_combination(a, vectors, tau, dataclasses.replace(cfg, tol=1e-6))
    return phi_combination(a, vectors, tau, cfg, scale=np.linalg.norm(rough)) / tau**j
