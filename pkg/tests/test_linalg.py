import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import example, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from blockdeim.data import gen_svd_structured, logspace_spectrum
from blockdeim.exceptions import DegeneratePivotError, ParameterError, SingularityError
from blockdeim.linalg import (
    as_matrix,
    check_orthonormal,
    least_squares_solve,
    lu_pivot_indices,
    pivoted_qr,
    qr_pivots,
    spectral_norm,
    truncated_svd,
)

from conftest import greedy_trap_basis


# truncated_svd

def test_svd_diagonal():
    res = truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(res.s, [3, 2])
    np.testing.assert_allclose(np.abs(res.u), np.eye(3)[:, :2], atol=1e-15)
    np.testing.assert_allclose(np.abs(res.v), np.eye(3)[:, :2], atol=1e-15)


def test_svd_identity():
    np.testing.assert_allclose(truncated_svd(np.eye(4), 4).s, np.ones(4))


def test_svd_sign_convention(rng):
    a = rng.standard_normal((30, 20))
    res = truncated_svd(a, 5)
    big = res.u[np.argmax(np.abs(res.u), axis=0), np.arange(5)]
    assert np.all(big >= 0)
    assert res.residuals(a).max() <= 1e-12 * res.s[0]


@pytest.mark.parametrize("k", [0, 4, -1])
def test_svd_rank_out_of_range(k):
    with pytest.raises(ParameterError):
        truncated_svd(np.ones((3, 3)), k)


def test_svd_lanczos_path_matches_dense(rng):
    # 600 x 700 with k small goes through ARPACK
    a = gen_svd_structured(600, 700, logspace_spectrum(600), seed=3)
    res = truncated_svd(a, 10)
    ref = np.linalg.svd(a, compute_uv=False)[:10]
    np.testing.assert_allclose(res.s, ref, rtol=1e-10)
    assert res.residuals(a).max() <= 1e-10 * res.s[0]
    check_orthonormal(res.u)
    check_orthonormal(res.v)


def test_svd_sparse_input_not_densified(rng):
    a = sp.random(800, 600, density=0.01, random_state=1, format="csc")
    res = truncated_svd(a, 5)
    ref = np.linalg.svd(a.toarray(), compute_uv=False)[:5]
    np.testing.assert_allclose(res.s, ref, rtol=1e-9)


@pytest.mark.slow
def test_svd_logspace_spectrum():
    spectrum = logspace_spectrum(2000)
    a = gen_svd_structured(2000, 4000, spectrum, seed=0)
    res = truncated_svd(a, 100)
    assert res.s[0] == pytest.approx(1.0, rel=1e-10)
    assert res.s[99] == pytest.approx(spectrum[99], rel=1e-10)


@pytest.mark.parametrize("shape,k", [((40, 30), 5), ((120, 200), 17), ((200, 300), 40)])
def test_svd_tail_equals_next_singular_value(rng, shape, k):
    a = rng.standard_normal(shape)
    res = truncated_svd(a, k + 1)
    low = res.truncate(k)
    tail = spectral_norm(a - (low.u * low.s) @ low.v.T)
    assert tail == pytest.approx(res.s[k], rel=1e-8)


# pivoted_qr

def test_pivoted_qr_largest_norm_first():
    assert list(pivoted_qr(np.array([[0.0, 2.0], [0.0, 0.0]])).pivot) == [1, 0]


def test_pivoted_qr_identity_ties_smallest_index():
    assert list(pivoted_qr(np.eye(3)).pivot) == [0, 1, 2]


def _check_qr(a, f):
    scale = max(np.linalg.norm(a, 2), 1.0)
    np.testing.assert_allclose(f.q @ f.t, a[:, f.pivot], atol=1e-12 * scale)
    np.testing.assert_allclose(f.q.T @ f.q, np.eye(f.q.shape[1]), atol=1e-12)
    assert np.allclose(np.tril(f.t, -1), 0)
    t = f.t
    r = t.shape[0]
    for kk in range(r):
        for j in range(kk + 1, t.shape[1]):
            tail = np.sum(t[kk:j + 1, j] ** 2)
            assert t[kk, kk] ** 2 >= tail * (1 - 1e-12) - 1e-28


def test_pivoted_qr_random_6x4(rng):
    a = rng.standard_normal((6, 4))
    f = pivoted_qr(a)
    _check_qr(a, f)
    assert f.pivot[0] == np.argmax(np.linalg.norm(a, axis=0))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)),
              elements=st.floats(-10, 10, allow_subnormal=False)))
@example(np.array([[8.12019673e-159]]))
@example(np.array([[1e-160, 3e-160], [2e-160, 0.0]]))
def test_pivoted_qr_properties(a):
    f = pivoted_qr(a)
    assert sorted(f.pivot) == list(range(a.shape[1]))
    _check_qr(a, f)


def test_pivoted_qr_rank_deficient():
    a = np.outer([1.0, 2.0, 3.0], [1.0, 1.0, 0.5])
    f = pivoted_qr(a)
    _check_qr(a, f)
    assert abs(f.t[1, 1]) < 1e-14


def test_qr_pivots_prefix(rng):
    a = rng.standard_normal((5, 12))
    assert list(qr_pivots(a, 3)) == list(pivoted_qr(a).pivot[:3])


# lu_pivot_indices

def test_lu_pivots_hand_example():
    # col 1: |5| at row 2 wins; updated col 2 on rows 1, 3: [1, 1 - 0.2*0] -> row 1 (tie, smaller)
    a = np.array([[0.0, 1.0], [5.0, 0.0], [1.0, 1.0]])
    assert list(lu_pivot_indices(a) + 1) == [2, 1]


def test_lu_pivots_identity():
    assert list(lu_pivot_indices(np.eye(3)[:, :2])) == [0, 1]


def test_lu_pivots_greedy_trap():
    assert list(lu_pivot_indices(greedy_trap_basis()) + 1) == [1, 2]


def test_lu_pivots_degenerate():
    with pytest.raises(DegeneratePivotError):
        lu_pivot_indices(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 10**6))
def test_lu_pivots_distinct_in_range(k, extra, seed):
    a = np.random.default_rng(seed).standard_normal((k + extra, k))
    piv = lu_pivot_indices(a)
    assert len(set(piv)) == k
    assert piv.min() >= 0 and piv.max() < k + extra


def test_lu_pivots_match_lapack(rng):
    from scipy.linalg import lu_factor
    a = rng.standard_normal((20, 6))
    _, ipiv = lu_factor(a)
    perm = np.arange(20)
    for i, p in enumerate(ipiv):
        perm[[i, p]] = perm[[p, i]]
    assert list(lu_pivot_indices(a)) == list(perm[:6])


# least_squares_solve

def test_lstsq_identity(rng):
    b = rng.standard_normal((2, 3))
    np.testing.assert_allclose(least_squares_solve(np.eye(2), b), b)


def test_lstsq_mean():
    x = least_squares_solve(np.array([[1.0], [1.0]]), np.array([[0.0], [2.0]]))
    np.testing.assert_allclose(x, [[1.0]])


def test_lstsq_recovers_solution(rng):
    a = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    x_true = rng.standard_normal((5, 2))
    np.testing.assert_allclose(least_squares_solve(a, a @ x_true), x_true, atol=1e-10)


def test_lstsq_singular_reports_pivot():
    with pytest.raises(SingularityError) as err:
        least_squares_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones((2, 1)))
    assert err.value.pivot is not None and err.value.pivot < 1e-12


def test_lstsq_sparse_rhs(rng):
    a = rng.standard_normal((30, 4))
    b = sp.random(30, 10, density=0.2, random_state=2, format="csc")
    np.testing.assert_allclose(least_squares_solve(a, b),
                               np.linalg.lstsq(a, b.toarray(), rcond=None)[0], atol=1e-12)


@pytest.mark.parametrize("cond", [1e2, 1e5, 1e8])
def test_lstsq_residual_small_for_conditioned_systems(rng, cond):
    n = 12
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = (q1 * np.logspace(0, -np.log10(cond), n)) @ q2.T
    b = a @ rng.standard_normal((n, 3))
    x = least_squares_solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


# spectral_norm

def test_spectral_norm_diag():
    assert spectral_norm(np.diag([3.0, 2.0, 1.0])) == pytest.approx(3.0)


def test_spectral_norm_zero():
    assert spectral_norm(np.zeros((4, 3))) == 0.0
    assert spectral_norm(sp.csc_matrix((400, 300))) == 0.0


def test_spectral_norm_random(rng):
    a = rng.standard_normal((50, 30))
    assert spectral_norm(a) == pytest.approx(np.linalg.svd(a, compute_uv=False)[0], rel=1e-10)


def test_spectral_norm_iterative_path(rng):
    a = rng.standard_normal((400, 300))
    ref = np.linalg.svd(a, compute_uv=False)[0]
    assert spectral_norm(a, tol=1e-10) == pytest.approx(ref, rel=1e-9)
    assert spectral_norm(sp.csc_matrix(a), tol=1e-10) == pytest.approx(ref, rel=1e-9)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ParameterError):
        as_matrix(np.array([[1.0, np.nan]]))
    with pytest.raises(ParameterError):
        as_matrix(np.ones(3))


def test_check_orthonormal():
    check_orthonormal(np.eye(4)[:, :2])
    with pytest.raises(ParameterError):
        check_orthonormal(np.ones((3, 2)))
