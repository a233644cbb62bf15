"""
Index selection from a basis of singular vectors.

Every selector takes an ``m x k`` matrix ``u`` (normally orthonormal
singular vectors) and returns ``k`` distinct 0-based row indices.  Column
indices for a CUR factorization come from running the same selector on the
right singular vectors.

Selectors
---------
deim
    One index per singular vector, argmax of the interpolation residual.
qdeim
    First ``k`` pivots of a column-pivoted QR of ``u.T``.
maxvol
    Dominant ``k x k`` submatrix by greedy row swaps.
block_deim_maxvol, block_deim_rrqr
    ``b`` indices per block of ``b`` vectors (MaxVol or pivoted QR on the
    block), with the DEIM interpolatory update between blocks.
adaptive_block_deim
    DEIM steps, switching to a block step whenever the two largest
    entries of the current residual are within a factor ``rho``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    CURError,
    ConvergenceError,
    ParameterError,
    SingularityError,
)
from .linalg import least_squares_solve, lu_pivot_indices, qr_pivots

METHODS = (
    "deim",
    "qdeim",
    "maxvol",
    "block_maxvol",
    "block_rrqr",
    "adaptive_maxvol",
    "adaptive_rrqr",
)
BLOCK_METHODS = ("block_maxvol", "block_rrqr", "adaptive_maxvol", "adaptive_rrqr")


@dataclass(frozen=True)
class SelectorConfig:
    """Selector choice and its tuning parameters.

    ``maxvol_iter_cap`` defaults to ``100 * k`` swaps when left as None.
    """

    method: str = "deim"
    block: int = 5
    delta: float = 0.01
    rho: float = 0.95
    maxvol_iter_cap: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if int(self.block) != self.block or self.block < 1:
            raise ParameterError(f"block size must be a positive integer, got {self.block}")
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if not 0 < self.rho <= 1:
            raise ParameterError(f"rho must lie in (0, 1], got {self.rho}")
        if self.maxvol_iter_cap is not None and self.maxvol_iter_cap < 1:
            raise ParameterError("maxvol_iter_cap must be positive")

    @property
    def uses_block(self):
        return self.method in BLOCK_METHODS


def _as_basis(u):
    u = np.array(u, dtype=float)
    if u.ndim != 2:
        raise ParameterError("basis must be a 2-D array")
    m, k = u.shape
    if k < 1 or k > m:
        raise ParameterError(f"basis must be m x k with 1 <= k <= m, got {m} x {k}")
    if not np.all(np.isfinite(u)):
        raise ParameterError("basis has non-finite entries")
    return u


def _project_out(u, sel, cols, step):
    """Subtract the interpolant through rows ``sel`` from ``u[:, cols]``."""
    done = len(sel)
    try:
        coef = least_squares_solve(u[sel, :done], u[sel][:, cols])
    except SingularityError as exc:
        raise SingularityError(
            f"interpolation system at step {step} is singular: {exc}",
            pivot=exc.pivot, step=step) from exc
    u[:, cols] -= u[:, :done] @ coef


def _check_new(s, upto, step):
    chosen = s[:upto]
    if np.unique(chosen).size != upto:
        raise SingularityError(
            f"step {step} re-selected an index; the residual has vanished "
            "(basis numerically rank deficient)", step=step)


def deim(u):
    """
    DEIM row selection.

    Index ``j`` is the position of the largest-magnitude entry of the
    residual of ``u[:, j]`` after interpolating it at the ``j - 1`` indices
    already chosen.  Ties go to the smallest index.
    """
    u = _as_basis(u)
    m, k = u.shape
    s = np.empty(k, dtype=np.intp)
    for j in range(k):
        if j:
            _project_out(u, s[:j], slice(j, j + 1), step=j + 1)
        s[j] = np.argmax(np.abs(u[:, j]))
        _check_new(s, j + 1, j + 1)
    return s


def qdeim(u):
    """Q-DEIM: the first ``k`` column pivots of a pivoted QR of ``u.T``."""
    u = _as_basis(u)
    return qr_pivots(u.T, u.shape[1])


def maxvol(u, delta=0.01, iter_cap=None):
    """
    Find a dominant ``k x k`` submatrix of a tall ``m x k`` matrix.

    Starting from the LU partial-pivoting rows, repeatedly form
    ``B = u @ inv(u[s])`` and, while some ``|b_ij| >= 1 + delta``, replace
    ``s[j]`` by row ``i`` at the largest such entry.  On return every
    ``|b_ij| < 1 + delta``, i.e. no single row swap grows ``|det u[s]|`` by
    more than a factor ``1 + delta``.

    Each swap updates ``B`` by a rank-one correction; ``B`` is recomputed
    from scratch before the stop rule is accepted.

    Parameters
    ----------
    u : array_like, shape (m, k)
    delta : float
        Stopping tolerance.
    iter_cap : int, optional
        Maximum number of swaps, ``100 * k`` by default.

    Returns
    -------
    ndarray of int
        ``k`` row indices.

    Raises
    ------
    DegeneratePivotError
        If LU initialization finds no nonsingular starting submatrix.
    ConvergenceError
        If the swap cap is exceeded; ``last_value`` holds ``max|b_ij|``.
    """
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    u = _as_basis(u)
    m, k = u.shape
    cap = 100 * k if iter_cap is None else int(iter_cap)
    s = lu_pivot_indices(u)
    swaps = 0
    exact = True
    # B = U Uhat^{-1}  <=>  Uhat^T B^T = U^T
    b = least_squares_solve(u[s].T, u.T).T
    while True:
        absb = np.abs(b)
        flat = int(np.argmax(absb))
        i, j = divmod(flat, k)
        big = absb[i, j]
        if big < 1.0 + delta:
            if exact:
                return s
            # rank-one updates drift; confirm the stop rule on a fresh B
            b = least_squares_solve(u[s].T, u.T).T
            exact = True
            continue
        if swaps == cap:
            raise ConvergenceError(
                f"MaxVol exceeded {cap} swaps (max|b_ij| = {big:.6g})",
                cap=cap, last_value=float(big))
        # swapping row i into slot j: B <- B - B[:, j] (B[i, :] - e_j) / B[i, j]
        w = b[i].copy()
        w[j] -= 1.0
        b -= np.outer(b[:, j] / b[i, j], w)
        s[j] = i
        swaps += 1
        exact = False


def _maxvol_picker(delta, iter_cap):
    def pick(block):
        return maxvol(block, delta, iter_cap)
    return pick


def _rrqr_picker(block):
    return qr_pivots(block.T, block.shape[1])


def _run_picker(picker, block, label):
    try:
        return picker(block)
    except ConvergenceError as exc:
        raise ConvergenceError(f"{label}: {exc}", cap=exc.cap, last_value=exc.last_value) from exc
    except SingularityError as exc:
        raise type(exc)(f"{label}: {exc}", pivot=exc.pivot, step=exc.step) from exc


def _check_block(b, k):
    if int(b) != b or not 1 <= b <= k:
        raise ParameterError(f"block size b={b} must satisfy 1 <= b <= k = {k}")
    return int(b)


def _block_deim(u, b, picker):
    u = _as_basis(u)
    m, k = u.shape
    b = _check_block(b, k)
    s = np.empty(k, dtype=np.intp)
    for nblock, start in enumerate(range(0, k, b), start=1):
        stop = min(start + b, k)
        if start:
            _project_out(u, s[:start], slice(start, stop), step=nblock)
        s[start:stop] = _run_picker(picker, u[:, start:stop], f"block {nblock}")
        _check_new(s, stop, nblock)
    return s


def block_deim_maxvol(u, config=None):
    """
    Block DEIM with MaxVol picking ``config.block`` indices per block.

    The last block is shorter when ``block`` does not divide ``k``.  With
    ``block == k`` this is plain :func:`maxvol`; with ``block == 1`` it
    coincides with :func:`deim`.
    """
    config = config or SelectorConfig(method="block_maxvol")
    return _block_deim(u, config.block, _maxvol_picker(config.delta, config.maxvol_iter_cap))


def block_deim_rrqr(u, config=None):
    """
    Block DEIM with pivoted QR of each transposed block.

    ``block == k`` reproduces :func:`qdeim`, ``block == 1`` reproduces
    :func:`deim`.
    """
    config = config or SelectorConfig(method="block_rrqr")
    return _block_deim(u, config.block, _rrqr_picker)


def adaptive_block_deim(u, config=None, method=None):
    """
    DEIM that switches to a block step where the greedy choice is ambiguous.

    At step ``j`` the residual column is sorted by magnitude; if ``j`` is the
    last column or the runner-up is below ``rho`` times the largest entry a
    single DEIM index is taken.  Otherwise the next ``block`` columns
    (fewer at the end) are projected and handed to MaxVol or pivoted QR.

    ``method`` is ``"maxvol"`` or ``"rrqr"``; by default it is read from
    ``config.method`` (``adaptive_maxvol`` / ``adaptive_rrqr``).
    """
    config = config or SelectorConfig(method="adaptive_maxvol")
    if method is None:
        method = {"adaptive_rrqr": "rrqr", "block_rrqr": "rrqr"}.get(config.method, "maxvol")
    if method not in ("maxvol", "rrqr"):
        raise ParameterError(f"adaptive block method must be 'maxvol' or 'rrqr', got {method!r}")
    picker = _rrqr_picker if method == "rrqr" else _maxvol_picker(config.delta, config.maxvol_iter_cap)
    u = _as_basis(u)
    m, k = u.shape
    b = _check_block(config.block, k)
    rho = config.rho
    s = np.empty(k, dtype=np.intp)
    j = 0
    while j < k:
        if j:
            _project_out(u, s[:j], slice(j, j + 1), step=j + 1)
        mag = np.abs(u[:, j])
        order = np.argsort(-mag, kind="stable")
        top = mag[order[0]]
        second = mag[order[1]] if m > 1 else 0.0
        if j == k - 1 or second < rho * top:
            s[j] = order[0]
            _check_new(s, j + 1, j + 1)
            j += 1
            continue
        stop = min(j + b, k)
        if j and stop > j + 1:
            _project_out(u, s[:j], slice(j + 1, stop), step=j + 1)
        s[j:stop] = _run_picker(picker, u[:, j:stop], f"block at step {j + 1}")
        _check_new(s, stop, j + 1)
        j = stop
    return s


def select_indices(u, config):
    """Dispatch to the selector named by ``config.method``."""
    method = config.method
    if method == "deim":
        return deim(u)
    if method == "qdeim":
        return qdeim(u)
    if method == "maxvol":
        return maxvol(u, config.delta, config.maxvol_iter_cap)
    if method == "block_maxvol":
        return block_deim_maxvol(u, config)
    if method == "block_rrqr":
        return block_deim_rrqr(u, config)
    if method == "adaptive_maxvol":
        return adaptive_block_deim(u, config, "maxvol")
    if method == "adaptive_rrqr":
        return adaptive_block_deim(u, config, "rrqr")
    raise CURError(f"no selector for {method!r}")
