"""
CUR factors, approximation error and the eta diagnostics.

For selected columns ``C = A[:, p]`` and rows ``R = A[s, :]`` the core is
``M = C^+ A R^+``, obtained by two nested least-squares solves.  The error
of the factorization obeys

    ||A - C M R|| <= (eta_s + eta_p) * sigma_{k+1},

with ``eta_s = ||inv(U[s, :])||`` and ``eta_p = ||inv(V[p, :])||``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import ParameterError, RankDeficiencyError, SingularityError
from .linalg import SvdResult, as_matrix, least_squares_solve, spectral_norm, truncated_svd
from .selection import SelectorConfig, select_indices

RANK_TOL = 1e-12
BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class CURFactors:
    """``A ~ c @ m_core @ r`` with the index vectors that produced it."""

    c: np.ndarray
    m_core: np.ndarray
    r: np.ndarray
    col_indices: np.ndarray
    row_indices: np.ndarray
    config: SelectorConfig | None = None

    @property
    def rank(self):
        return self.m_core.shape[0]

    def reconstruct(self):
        c = self.c.toarray() if sp.issparse(self.c) else self.c
        r = self.r.toarray() if sp.issparse(self.r) else self.r
        return c @ self.m_core @ r


@dataclass(frozen=True)
class CurDiagnostics:
    abs_error: float
    relative_error: float
    eta_s: float
    eta_p: float
    sigma_k1: float
    bound_rhs: float
    violated: bool = field(default=False)


def _check_indices(idx, size, name):
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim != 1:
        raise ParameterError(f"{name} must be 1-D")
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise ParameterError(f"{name} out of range [0, {size})")
    if np.unique(idx).size != idx.size:
        raise ParameterError(f"{name} has repeated entries")
    return idx


def _dense(x):
    return x.toarray() if sp.issparse(x) else np.asarray(x)


def _check_full_rank(f, name):
    # singular values of f equal those of its triangular QR factor
    tri = np.linalg.qr(f, mode="r") if f.shape[0] > f.shape[1] else f
    sv = np.linalg.svd(tri, compute_uv=False)
    if sv.size == 0 or sv[-1] < RANK_TOL * sv[0]:
        smallest = float(sv[-1]) if sv.size else 0.0
        raise RankDeficiencyError(
            f"{name} is numerically rank deficient (sigma_min/sigma_max = "
            f"{smallest / sv[0] if sv.size and sv[0] else 0.0:.3e})",
            factor=name, pivot=smallest)


def assemble_cur(a, col_indices, row_indices, config=None):
    """
    Build C, M and R for the given index vectors.

    ``M`` solves ``min ||C X - A||`` followed by ``min ||Y R - X||``; for
    full-rank ``C`` and ``R`` this is ``pinv(C) @ A @ pinv(R)``.  Sparse
    ``A`` stays sparse: only ``Q^T A`` with a thin ``Q`` is ever formed.

    Raises
    ------
    RankDeficiencyError
        When C or R has ``sigma_min < 1e-12 sigma_max``; ``factor`` names it.
    """
    a = as_matrix(a)
    m, n = a.shape
    p = _check_indices(col_indices, n, "col_indices")
    s = _check_indices(row_indices, m, "row_indices")
    if p.size != s.size:
        raise ParameterError(f"need as many columns as rows, got {p.size} and {s.size}")
    if sp.issparse(a):
        c = a[:, p].tocsc()
        r = a[s, :].tocsr()
    else:
        c = a[:, p].copy()
        r = a[s, :].copy()
    cd, rd = _dense(c), _dense(r)
    _check_full_rank(cd, "C")
    _check_full_rank(rd.T, "R")
    x = least_squares_solve(cd, a)             # k x n, C^+ A
    m_core = least_squares_solve(rd.T, x.T).T  # (C^+ A) R^+
    return CURFactors(c, np.asarray(m_core), r, p, s, config)


def residual_operator(a, factors):
    """``A - C M R`` as a LinearOperator (never materialized)."""
    a_op = spla.aslinearoperator(a)
    c, mc, r = factors.c, factors.m_core, factors.r

    def matvec(x):
        x = np.ravel(x)
        return a_op.matvec(x) - c @ (mc @ (r @ x))

    def rmatvec(y):
        y = np.ravel(y)
        return a_op.rmatvec(y) - r.T @ (mc.T @ (c.T @ y))

    return spla.LinearOperator(a.shape, matvec=matvec, rmatvec=rmatvec, dtype=float)


def approximation_error(a, factors, tol=1e-10):
    """Absolute spectral-norm error ``||A - C M R||``."""
    a = as_matrix(a)
    if min(a.shape) <= 200 and a.shape[0] * a.shape[1] <= 100_000:
        return spectral_norm(_dense(a) - factors.reconstruct(), tol)
    return spectral_norm(residual_operator(a, factors), tol)


def relative_error(a, factors, tol=1e-10, norm_a=None):
    """``||A - C M R|| / ||A||`` in the spectral norm.

    ``norm_a`` may be passed when ``||A||`` (= sigma_1) is already known.
    """
    a = as_matrix(a)
    if norm_a is None:
        norm_a = spectral_norm(a, tol)
    if norm_a == 0:
        return 0.0
    return approximation_error(a, factors, tol) / norm_a


def eta(basis, indices):
    """``||inv(basis[indices, :])||_2`` for a square selection."""
    basis = np.asarray(basis, dtype=float)
    idx = _check_indices(indices, basis.shape[0], "indices")
    if idx.size != basis.shape[1]:
        raise ParameterError(f"need {basis.shape[1]} indices, got {idx.size}")
    sv = np.linalg.svd(basis[idx], compute_uv=False)
    if sv[-1] <= np.finfo(float).eps * sv[0] * sv.size:
        raise SingularityError(
            f"selected submatrix is singular (sigma_min = {sv[-1]:.3e})", pivot=float(sv[-1]))
    return float(1.0 / sv[-1])


def check_error_bound(a, factors, svd, tol=1e-10):
    """
    Evaluate both sides of the CUR error bound.

    ``svd`` must hold at least ``k + 1`` triplets of ``a``; the first ``k``
    left/right vectors give ``eta_s``/``eta_p`` and ``svd.s[k]`` is
    ``sigma_{k+1}``.  ``violated`` is set when the absolute error exceeds
    the bound by more than a relative ``1e-8``.
    """
    a = as_matrix(a)
    k = factors.rank
    if svd.rank < k + 1:
        if svd.rank == k and k == min(a.shape):
            sigma_k1 = 0.0
        else:
            raise ParameterError(f"need an SVD of rank >= {k + 1}, got {svd.rank}")
    else:
        sigma_k1 = float(svd.s[k])
    eta_s = eta(svd.u[:, :k], factors.row_indices)
    eta_p = eta(svd.v[:, :k], factors.col_indices)
    err = approximation_error(a, factors, tol)
    rhs = (eta_s + eta_p) * sigma_k1
    norm_a = float(svd.s[0])
    rel = err / norm_a if norm_a else 0.0
    # absolute floor covers rounding when sigma_{k+1} == 0
    floor = 64 * np.finfo(float).eps * norm_a * (eta_s + eta_p)
    violated = err > rhs * (1 + BOUND_SLACK) + floor
    return CurDiagnostics(err, rel, eta_s, eta_p, sigma_k1, rhs, bool(violated))


def cur_decomposition(a, k, config=None, svd=None):
    """
    Rank-``k`` CUR of ``a``: SVD, row/column selection and core assembly.

    Parameters
    ----------
    a : ndarray or sparse matrix
    k : int
    config : SelectorConfig, optional
        Defaults to DEIM.
    svd : SvdResult, optional
        Precomputed singular triplets of rank >= k.

    Returns
    -------
    CURFactors
    """
    config = config or SelectorConfig()
    a = as_matrix(a)
    if svd is None:
        svd = truncated_svd(a, k)
    elif not isinstance(svd, SvdResult) or svd.rank < k:
        raise ParameterError(f"need an SVD of rank >= {k}")
    rows = select_indices(svd.u[:, :k], config)
    cols = select_indices(svd.v[:, :k], config)
    return assemble_cur(a, cols, rows, config)
