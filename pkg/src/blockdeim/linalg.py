"""
Dense and sparse kernels used by the index selectors.

Matrices are plain ``numpy.ndarray`` (dense) or ``scipy.sparse`` matrices
(sparse, converted to CSC).  Index vectors are 0-based ``numpy`` integer
arrays; the CLI and file formats translate to 1-based.

Pivot ties are always broken in favour of the smallest original index.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_triangular

from .exceptions import (
    ConvergenceError,
    DegeneratePivotError,
    ParameterError,
    SingularityError,
)

EPS = np.finfo(float).eps

# below this min-dimension the dense LAPACK SVD is used
DENSE_SVD_CUTOFF = 500


def as_matrix(a, name="a"):
    """Validate ``a`` and return a float64 ndarray or a CSC matrix.

    Raises ParameterError for non-2-D input, empty dimensions or
    non-finite entries.
    """
    if sp.issparse(a):
        a = sp.csc_matrix(a, dtype=float)
        a.sum_duplicates()
        a.sort_indices()
        if not np.all(np.isfinite(a.data)):
            raise ParameterError(f"{name} has non-finite entries")
    else:
        a = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(a)):
            raise ParameterError(f"{name} has non-finite entries")
    if a.ndim != 2:
        raise ParameterError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ParameterError(f"{name} has an empty dimension {a.shape}")
    return a


def check_orthonormal(u, tol=None):
    """Raise ParameterError unless ``u`` has orthonormal columns.

    The default tolerance is ``1e-10 * sqrt(m)`` on ``max|u^T u - I|``.
    Returns the measured deviation.
    """
    u = np.asarray(u, dtype=float)
    m, k = u.shape
    if k > m:
        raise ParameterError(f"basis has more columns ({k}) than rows ({m})")
    if tol is None:
        tol = 1e-10 * np.sqrt(m)
    dev = np.abs(u.T @ u - np.eye(k)).max()
    if dev > tol:
        raise ParameterError(f"basis is not orthonormal: max|U^T U - I| = {dev:.3e} > {tol:.3e}")
    return dev


@dataclass(frozen=True)
class SvdResult:
    """Leading singular triplets, singular values non-increasing."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def rank(self):
        return self.s.size

    def truncate(self, k):
        """Return the leading ``k`` triplets."""
        if not 1 <= k <= self.rank:
            raise ParameterError(f"cannot truncate rank-{self.rank} SVD to k={k}")
        return SvdResult(self.u[:, :k], self.s[:k], self.v[:, :k])

    def residuals(self, a):
        """Return ``||A v_j - s_j u_j||`` for each j."""
        av = a @ self.v
        return np.linalg.norm(av - self.u * self.s, axis=0)


def _fix_signs(u, v):
    # largest-magnitude entry of each left vector made non-negative
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs


def _start_vector(n):
    return np.random.default_rng(20240611).standard_normal(n)


def truncated_svd(a, k, tol=1e-10, maxiter=None):
    """
    Compute the ``k`` leading singular triplets of ``a``.

    Dense LAPACK is used when ``min(m, n) < 500`` or when ``k`` is a sizeable
    fraction of ``min(m, n)`` (where a Krylov method has no advantage);
    otherwise implicitly restarted Lanczos (ARPACK) runs on ``a`` as an
    operator, so sparse inputs are never densified.

    Parameters
    ----------
    a : ndarray or sparse matrix, shape (m, n)
    k : int
        Number of triplets, ``1 <= k <= min(m, n)``.
    tol : float
        Relative residual tolerance checked on the result:
        ``||A v_j - s_j u_j|| <= tol * s_1``.
    maxiter : int, optional
        Iteration cap for the Lanczos solver.

    Returns
    -------
    SvdResult
        Singular vectors with the largest-magnitude entry of every left
        vector made non-negative.
    """
    a = as_matrix(a)
    m, n = a.shape
    mn = min(m, n)
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= mn):
        raise ParameterError(f"rank k={k} must satisfy 1 <= k <= min(m, n) = {mn}")

    dense = mn < DENSE_SVD_CUTOFF or 4 * k >= mn
    if dense:
        full = a.toarray() if sp.issparse(a) else a
        u, s, vt = np.linalg.svd(full, full_matrices=False)
        u, s, v = u[:, :k], s[:k], vt[:k].T
    else:
        try:
            u, s, vt = spla.svds(a, k=k, tol=0, maxiter=maxiter,
                                 v0=_start_vector(mn), solver="arpack")
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"Lanczos SVD did not converge within maxiter={maxiter}",
                cap=maxiter) from exc
        order = np.argsort(-s, kind="stable")
        u, s, v = u[:, order], s[order], vt[order].T
    s = np.maximum(s, 0.0)
    u, v = _fix_signs(u, v)
    result = SvdResult(np.ascontiguousarray(u), s, np.ascontiguousarray(v))
    if not dense and s[0] > 0:
        worst = result.residuals(a).max()
        if worst > tol * s[0]:
            raise ConvergenceError(
                f"Lanczos SVD residual {worst:.3e} exceeds tol*sigma_1 = {tol * s[0]:.3e}",
                cap=maxiter, last_value=worst)
    return result


@dataclass(frozen=True)
class PivotedQr:
    """Column-pivoted QR, ``a[:, pivot] = q @ t``."""

    q: np.ndarray
    t: np.ndarray
    pivot: np.ndarray


def _pow2_exponent(x):
    # e with max|x| * 2**-e in [0.5, 1); scaling by 2**-e is exact
    amax = np.abs(x).max() if x.size else 0.0
    if amax == 0.0 or not np.isfinite(amax):
        return 0
    return int(np.frexp(amax)[1])


def _householder(x):
    # returns (v, beta) with (I - beta v v^T) x = alpha e_1, v of unit length
    v = np.ldexp(x, -_pow2_exponent(x))
    normx = np.linalg.norm(v)
    if normx == 0.0:
        return v, 0.0
    v[0] -= -normx if v[0] >= 0 else normx
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return v, 0.0
    return v / nv, 2.0


def _pivoted_householder(a, steps, want_q):
    w = np.array(a, dtype=float, order="C")
    # power-of-two rescaling keeps squared norms in range without
    # changing any pivot decision
    e = _pow2_exponent(w)
    w = np.ldexp(w, -e)
    m, n = w.shape
    q = np.eye(m) if want_q else None
    taken = np.zeros(n, dtype=bool)
    pivots = []
    for i in range(steps):
        norms = np.einsum("ij,ij->j", w[i:], w[i:])
        norms[taken] = -1.0
        p = int(np.argmax(norms))  # first maximum = smallest column index
        taken[p] = True
        pivots.append(p)
        v, beta = _householder(w[i:, p])
        if beta != 0.0:
            w[i:] -= np.outer(beta * v, v @ w[i:])
            w[i + 1:, p] = 0.0
            if want_q:
                q[:, i:] -= np.outer(q[:, i:] @ v, beta * v)
    return np.ldexp(w, e), q, np.asarray(pivots, dtype=np.intp), taken


def pivoted_qr(a):
    """
    QR factorization with column pivoting (Householder, greedy max-norm).

    At every step the remaining column with the largest trailing 2-norm is
    chosen, norms being recomputed rather than downdated so that pivot
    choices, and their smallest-index tie breaks, are exact.

    Returns
    -------
    PivotedQr
        ``q`` is m x min(m, n) with orthonormal columns, ``t`` is
        min(m, n) x n upper triangular and ``pivot`` a full permutation of
        ``range(n)`` such that ``a[:, pivot] == q @ t``.
    """
    a = as_matrix(a)
    if sp.issparse(a):
        a = a.toarray()
    m, n = a.shape
    r = min(m, n)
    w, q, piv, taken = _pivoted_householder(a, r, want_q=True)
    rest = np.flatnonzero(~taken)
    pivot = np.concatenate([piv, rest])
    t = np.triu(w[:r, pivot])
    return PivotedQr(q[:, :r], t, pivot)


def qr_pivots(a, count):
    """First ``count`` column pivots of :func:`pivoted_qr` without forming Q."""
    a = np.asarray(a, dtype=float)
    count = min(count, a.shape[1])
    steps = min(count, a.shape[0])
    _, _, piv, taken = _pivoted_householder(a, steps, want_q=False)
    if count > steps:
        piv = np.concatenate([piv, np.flatnonzero(~taken)[:count - steps]])
    return piv


def lu_pivot_indices(a):
    """
    Row pivots chosen by LU with partial pivoting of a tall ``m x k`` matrix.

    Returns the ``k`` 0-based row indices in pivot order.  Raises
    DegeneratePivotError when a column has no usable pivot left.
    """
    w = np.array(a, dtype=float)
    m, k = w.shape
    if m < k:
        raise ParameterError(f"LU pivot selection needs m >= k, got {m} x {k}")
    scale = np.abs(w).max()
    tol = EPS * max(m, k) * scale
    taken = np.zeros(m, dtype=bool)
    piv = np.empty(k, dtype=np.intp)
    for j in range(k):
        col = np.abs(w[:, j])
        col[taken] = -1.0
        p = int(np.argmax(col))
        if col[p] <= tol:
            raise DegeneratePivotError(
                f"no nonzero pivot in column {j + 1} (max candidate {max(col[p], 0.0):.3e})",
                pivot=max(col[p], 0.0), step=j + 1)
        taken[p] = True
        piv[j] = p
        if j + 1 < k:
            mult = w[:, j] / w[p, j]
            mult[taken] = 0.0
            w[:, j + 1:] -= np.outer(mult, w[p, j + 1:])
    return piv


def least_squares_solve(a, b):
    """
    Solve ``min ||a x - b||`` column-wise via Householder QR.

    Square ``a`` gives the exact solve; a tiny pivot in the triangular factor
    raises SingularityError carrying the pivot magnitude.  Tall
    rank-deficient and wide systems fall back to the minimum-norm solution.
    ``b`` may be a 1-D vector, a dense matrix or a sparse matrix.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ParameterError("coefficient matrix must be 2-D")
    m, n = a.shape
    bshape = b.shape
    if bshape[0] != m:
        raise ParameterError(f"row mismatch: a is {a.shape}, b is {bshape}")
    if m >= n:
        q, r = np.linalg.qr(a)
        d = np.abs(np.diag(r))
        dmax = d.max() if d.size else 0.0
        if d.size and d.min() <= max(m, n) * EPS * dmax:
            if m == n:
                raise SingularityError(
                    f"matrix is numerically singular (pivot {d.min():.3e}, largest {dmax:.3e})",
                    pivot=float(d.min()))
        else:
            qtb = (b.T @ q).T if sp.issparse(b) else q.T @ b
            return solve_triangular(r, qtb)
    dense_b = b.toarray() if sp.issparse(b) else b
    return np.linalg.lstsq(a, dense_b, rcond=None)[0]


def spectral_norm(a, tol=1e-10, maxiter=None):
    """
    2-norm of a matrix or linear operator.

    Small dense inputs use the exact LAPACK value; everything else runs
    Lanczos bidiagonalization (ARPACK ``svds`` with ``k=1``) on ``a`` as an
    operator, so differences such as ``A - C M R`` never need to be formed.
    """
    if isinstance(a, np.ndarray) or sp.issparse(a):
        a = as_matrix(a)
    m, n = a.shape
    if isinstance(a, np.ndarray) and min(m, n) <= 200:
        return float(np.linalg.norm(a, 2))
    op = spla.aslinearoperator(a)
    if min(m, n) < 3:
        # ARPACK needs k < min(m, n); materialize the thin side instead
        dense = op.matmat(np.eye(n)) if n <= m else op.rmatmat(np.eye(m)).T
        return float(np.linalg.norm(dense, 2))
    probe = op.matvec(_start_vector(n))
    if not np.any(probe):
        probe = op.rmatvec(_start_vector(m))
        if not np.any(probe):
            return 0.0
    try:
        s = spla.svds(op, k=1, tol=tol, maxiter=maxiter,
                      v0=_start_vector(min(m, n)), solver="arpack",
                      return_singular_vectors=False)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"spectral norm iteration did not converge within maxiter={maxiter}",
            cap=maxiter) from exc
    return float(s[0])
