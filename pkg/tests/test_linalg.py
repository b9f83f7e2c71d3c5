import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bcsplit.linalg import (
    TOL_SOLVE,
    BandedLU,
    BandedMatrix,
    SingularMatrixError,
    SparseLU,
    factorize,
    induced_norm_max,
    mat_vec,
    norm_max,
    solve,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_mat_vec_identity():
    assert np.array_equal(mat_vec(np.eye(3), np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_mat_vec_zero():
    assert np.array_equal(mat_vec(np.zeros((2, 2)), np.array([5.0, 7.0])), [0.0, 0.0])


def test_mat_vec_tridiagonal():
    t = BandedMatrix.tridiag(3, 1.0, -2.0, 1.0)
    assert np.array_equal(mat_vec(t, np.ones(3)), [-1.0, 0.0, -1.0])
    assert np.array_equal(mat_vec(t.to_dense(), np.ones(3)), [-1.0, 0.0, -1.0])


def test_mat_vec_dimension_mismatch():
    with pytest.raises(ValueError):
        mat_vec(np.eye(3), np.ones(2))
    with pytest.raises(ValueError):
        mat_vec(BandedMatrix.tridiag(3, 1, -2, 1), np.ones(4))


def test_mat_vec_columns():
    t = BandedMatrix.tridiag(4, 1.0, -2.0, 3.0)
    v = np.arange(8.0).reshape(4, 2)
    assert np.array_equal(mat_vec(t, v), t.to_dense() @ v)


def test_solve_examples():
    assert np.allclose(solve(np.eye(3), np.array([4.0, 5.0, 6.0])), [4, 5, 6])
    assert np.allclose(solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1, 1])
    x = solve(BandedMatrix.tridiag(3, 1.0, -2.0, 1.0), np.array([-1.0, 0.0, -1.0]))
    assert np.allclose(x, [1, 1, 1], atol=1e-14)


def test_solve_singular_reports_condition():
    with pytest.raises(SingularMatrixError) as info:
        solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))
    assert info.value.condition == np.inf
    # rows 0 and 1 coincide
    band = BandedMatrix(3, {-1: [1.0, 0.0], 0: [1.0, 1.0, 1.0], 1: [1.0, 0.0]})
    with pytest.raises(SingularMatrixError):
        solve(band, np.ones(3))


def test_norm_max_examples():
    assert norm_max(np.zeros(3)) == 0.0
    assert norm_max(np.array([-3.0, 2.0])) == 3.0
    assert norm_max(np.array([1.5, -1.5])) == 1.5


def test_banded_round_trip_and_validation():
    m = np.array([[2.0, 1.0, 0.0], [0.0, 3.0, 4.0], [5.0, 0.0, 6.0]])
    b = BandedMatrix.from_dense(m)
    assert np.array_equal(b.to_dense(), m)
    assert (b.lower, b.upper) == (2, 1)
    with pytest.raises(ValueError):
        BandedMatrix(3, {0: np.array([1.0, np.inf, 1.0])})
    with pytest.raises(ValueError):
        BandedMatrix(3, {3: np.zeros(0)})
    with pytest.raises(ValueError):
        BandedMatrix(3, {1: np.zeros(3)})


def test_factorize_picks_storage():
    assert isinstance(factorize(BandedMatrix.tridiag(10, 1, -4, 1)), BandedLU)
    wide = BandedMatrix(100, {-20: np.ones(80), 0: np.full(100, -5.0), 20: np.ones(80)})
    assert isinstance(factorize(wide), SparseLU)


def test_condition_estimate_matches_dense():
    a = BandedMatrix.tridiag(30, 1.0, -2.0, 1.0)
    exact = np.linalg.cond(a.to_dense(), 1)
    assert factorize(a).condition() == pytest.approx(exact, rel=1e-8)


@st.composite
def dominant_banded(draw):
    n = draw(st.integers(3, 40))
    kl = draw(st.integers(0, min(3, n - 1)))
    ku = draw(st.integers(0, min(3, n - 1)))
    wide = draw(st.booleans())
    offsets = set(range(-kl, ku + 1))
    if wide and n > 12:
        offsets |= {-10, 10}
    diags = {}
    for off in offsets:
        diags[off] = draw(arrays(float, n - abs(off), elements=st.floats(-1, 1)))
    m = BandedMatrix(n, diags)
    # Strict diagonal dominance keeps the system well conditioned.
    shift = m.row_abs_sums() + 1.0 + np.abs(m.diagonal())
    return m + BandedMatrix(n, {0: shift})


@given(dominant_banded(), st.data())
def test_solve_inverts_mat_vec(m, data):
    x = data.draw(arrays(float, m.n, elements=finite))
    b = mat_vec(m, x)
    y = solve(m, b)
    assert norm_max(mat_vec(m, y) - b) <= TOL_SOLVE * max(norm_max(b), 1e-300)
    assert norm_max(y - x) <= 1e-8 * max(norm_max(x), 1.0)


@given(dominant_banded())
def test_both_factorizations_agree(m):
    b = np.arange(1.0, m.n + 1)
    assert np.allclose(BandedLU(m).solve(b), SparseLU(m).solve(b), rtol=1e-10, atol=1e-12)
    assert np.allclose(BandedLU(m).solve(b, trans=1), np.linalg.solve(m.to_dense().T, b), rtol=1e-9)


@given(dominant_banded())
def test_banded_dense_mat_vec_agree(m):
    v = np.linspace(-1, 1, m.n)
    assert np.allclose(mat_vec(m, v), m.to_dense() @ v, rtol=1e-14, atol=1e-14)
    assert induced_norm_max(m) == pytest.approx(induced_norm_max(m.to_dense()), rel=1e-14)
    assert m.norm1() == pytest.approx(np.abs(m.to_dense()).sum(axis=0).max(), rel=1e-14)


@given(
    arrays(float, 8, elements=finite),
    arrays(float, 8, elements=finite),
    st.floats(-1e3, 1e3, allow_nan=False),
)
def test_norm_max_is_a_norm(u, v, c):
    assert norm_max(u + v) <= norm_max(u) + norm_max(v)
    assert norm_max(c * u) == pytest.approx(abs(c) * norm_max(u), rel=1e-15, abs=0)
    assert norm_max(u) >= 0
    assert (norm_max(u) == 0) == (not np.any(u))
