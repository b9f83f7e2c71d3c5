import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from bcsplit.discretize import (
    BC,
    DIRICHLET,
    NEUMANN,
    BoundaryMap,
    as_bc,
    build_1d,
    build_2d_5pt,
    build_2d_split,
    consistency_errors,
    elliptic_projection,
    log_norm_inf,
    n_hat_from_h,
)
from bcsplit.integrate import LineFlow
from bcsplit.linalg import BandedMatrix, mat_vec, solve
from bcsplit.verify import consistency_errors_for, fitted_slope


def test_build_1d_dirichlet_small():
    op = build_1d(3)
    assert op.grid.h == 0.25
    assert np.array_equal(op.A.to_dense(), 16 * np.array([[-2, 1, 0], [1, -2, 1], [0, 1, -2.0]]))
    assert np.array_equal(op.C.apply(np.array([1.0, 0.0])), [16.0, 0.0, 0.0])
    assert np.allclose(op.grid.nodes[0], [0.25, 0.5, 0.75])


def test_build_1d_neumann_small():
    op = build_1d(3, "neumann")
    a = op.A.to_dense()
    assert op.size == 4
    assert np.array_equal(a[-1], [0.0, 0.0, 32.0, -32.0])
    assert np.array_equal(op.C.apply(np.array([0.0, 1.0])), [0.0, 0.0, 0.0, 8.0])
    assert op.C.apply(np.array([1.0, 0.0]))[0] == 16.0
    assert op.grid.nodes[0][-1] == 1.0
    assert op.grid.face("right").node_index.tolist() == [3]


def test_build_1d_robin_row():
    bc = BC(2.0, 1.0)
    op = build_1d(3, bc)
    h = 0.25
    assert op.A.to_dense()[-1, -1] == pytest.approx((-2 - 2 * h * 2.0) / h**2)
    assert op.C.apply(np.array([0.0, 1.0]))[-1] == pytest.approx(2 / h)
    assert bc.kind == "robin"


def test_log_norm_examples():
    assert log_norm_inf(np.eye(3)) == 1.0
    assert log_norm_inf(build_1d(3).A) == 0.0
    assert log_norm_inf(build_1d(3, "neumann").A) == 0.0


def test_rejects_small_grids_and_bad_bcs():
    for build in (build_1d, build_2d_5pt, build_2d_split):
        with pytest.raises(ValueError):
            build(2)
    with pytest.raises(ValueError):
        BC(0.0, 0.0)
    with pytest.raises(ValueError):
        as_bc("periodic")
    assert as_bc("neumann") == NEUMANN and as_bc((1.0, 0.0)) == DIRICHLET


def test_n_hat_from_h():
    assert n_hat_from_h(1e-3) == 999
    assert n_hat_from_h(2.5e-4) == 3999
    assert n_hat_from_h(1e-2) == 99
    with pytest.raises(ValueError):
        n_hat_from_h(0.3)


def test_five_point_center_row():
    op = build_2d_5pt(3)
    a = op.A.to_dense()
    h2 = op.grid.h**2
    center = 4  # node (i=1, j=1)
    row = a[center] * h2
    assert row[center] == -4
    assert sorted(np.nonzero(row)[0].tolist()) == [1, 3, 4, 5, 7]
    assert all(row[i] == 1 for i in (1, 3, 5, 7))


def test_five_point_constant_field():
    op = build_2d_5pt(7)
    resid = mat_vec(op.A, np.ones(op.size)) + op.C.apply(np.ones(op.grid.n_boundary))
    assert np.max(np.abs(resid)) <= 1e-10
    # 4 n_hat - 4 nodes touch the boundary
    touched = np.count_nonzero(op.C.apply(np.ones(op.grid.n_boundary)))
    assert touched == 4 * 7 - 4


def test_five_point_cubic_truncation():
    errs = []
    for n in (19, 39):
        op = build_2d_5pt(n)
        x, y = op.grid.nodes
        u = x**3 + y**3
        bu = np.concatenate([fc.coords[0] ** 3 + fc.coords[1] ** 3 for fc in op.grid.faces])
        errs.append(np.max(np.abs(mat_vec(op.A, u) + op.C.apply(bu) - (6 * x + 6 * y))))
    # The stencil is exact on cubics, so only rounding remains.
    assert max(errs) <= 1e-8


@given(st.integers(3, 12))
def test_split_parts_sum_to_five_point(n):
    split, full = build_2d_split(n), build_2d_5pt(n)
    assert np.array_equal((split.A1 + split.A2).to_dense(), full.A.to_dense())
    assert np.array_equal((split.C1 + split.C2).to_dense(), full.C.to_dense())


@given(st.integers(3, 10))
def test_split_blocks_equal_line_operator(n):
    split = build_2d_split(n)
    line = build_1d(n).A.to_dense()
    a1 = split.A1.to_dense()
    a2 = split.A2.to_dense()
    perm = np.arange(n * n).reshape(n, n).T.ravel()  # y fastest
    a2p = a2[np.ix_(perm, perm)]
    for b in range(n):
        blk = slice(b * n, (b + 1) * n)
        assert np.array_equal(a1[blk, blk], line)
        assert np.array_equal(a2p[blk, blk], line)
    assert np.array_equal(a1, np.kron(np.eye(n), line))


@pytest.mark.parametrize("axis", [1, 0])
def test_blockwise_exponential_matches_dense(axis, rng):
    n, tau = 9, 3e-3
    split = build_2d_split(n)
    a = (split.A1 if axis == 1 else split.A2).to_dense()
    faces = ("x0", "x1") if axis == 1 else ("y0", "y1")
    flow = LineFlow(split.line, n, axis, tau, tuple(split.grid.face_slice(f) for f in faces))
    v = rng.standard_normal(n * n)
    assert np.max(np.abs(flow(v) - sla.expm(tau * a) @ v)) <= 1e-12


@given(st.integers(3, 60), st.sampled_from(["dirichlet", "neumann"]))
def test_log_norm_zero_and_nonpositive(n, bc):
    assert log_norm_inf(build_1d(n, bc).A) == 0.0
    assert log_norm_inf(build_1d(n, bc).A.to_dense()) == 0.0


@given(st.integers(3, 20))
def test_log_norm_zero_2d(n):
    split = build_2d_split(n)
    assert log_norm_inf(build_2d_5pt(n).A) == 0.0
    assert log_norm_inf(split.A1) == 0.0 and log_norm_inf(split.A2) == 0.0


@given(st.integers(3, 200))
def test_inverse_bounded_by_one_eighth(n):
    a = build_1d(n).A
    # -A^{-1} is entrywise nonnegative, so its max-norm is max(-A^{-1} 1).
    inv_norm = np.max(-solve(a, np.ones(n)))
    assert inv_norm <= 0.125 * (1 + 1e-12)


def test_inverse_bound_non_increasing_over_odd_grids():
    norms = [np.max(-solve(build_1d(n).A, np.ones(n))) for n in (9, 19, 39, 79, 159)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_elliptic_projection_exact_on_low_degree():
    op = build_1d(20)
    x = op.grid.nodes[0]
    r = elliptic_projection(op, np.zeros_like(x), np.array([0.0, 1.0]))
    assert np.max(np.abs(r - x)) <= 1e-13
    r = elliptic_projection(op, 6 * x, np.array([0.0, 1.0]))
    assert np.max(np.abs(r - x**3)) <= 1e-12


def test_elliptic_projection_slope_exp_cubic():
    hs, etas = [], []
    for n in (49, 99, 199):
        op = build_1d(n)
        x = op.grid.nodes[0]
        u = np.exp(x**3)
        _, eta = consistency_errors(op, u, (9 * x**4 + 6 * x) * u, np.array([1.0, np.e]))
        hs.append(op.grid.h)
        etas.append(eta)
    assert 1.9 <= fitted_slope(hs, etas) <= 2.1


def test_two_dimensional_consistency_slopes():
    hs, eps, eta = consistency_errors_for("p2_dirichlet", (99, 199, 399))
    assert 1.9 <= fitted_slope(hs, eps) <= 2.1
    assert 1.9 <= fitted_slope(hs, eta) <= 2.1


def test_boundary_map_dense_matches_apply(rng):
    m = BoundaryMap(5, 3, np.array([0, 4, 4]), np.array([0, 1, 2]), np.array([2.0, 3.0, -1.0]))
    g = rng.standard_normal(3)
    assert np.allclose(m.apply(g), m.to_dense() @ g)
    with pytest.raises(ValueError):
        m.apply(np.ones(2))


def test_banded_builds_are_immutable():
    op = build_1d(5)
    with pytest.raises(ValueError):
        op.A.diags[0][0] = 1.0
    assert isinstance(op.A, BandedMatrix)
