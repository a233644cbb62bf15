"""
Slow, independent reference implementations for small instances.

These deliberately avoid the code paths of :mod:`blockdeim.selection` and
:mod:`blockdeim.cur`: brute-force enumeration, explicit projector
matrices and SVD pseudoinverses.  They are used by the test suite and by
``cur select --verify``.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .cur import CURFactors
from .exceptions import BudgetError, ParameterError, SingularityError


@dataclass(frozen=True)
class OracleBudget:
    max_rows: int = 12
    max_rank: int = 4

    def __post_init__(self):
        if self.max_rows > 12 or self.max_rank > 4:
            raise ParameterError("oracle budget is capped at 12 rows and rank 4")
        if comb(self.max_rows, self.max_rank) > 10**6:
            raise ParameterError("oracle budget exceeds 1e6 subsets")

    def admits(self, m, k):
        return m <= self.max_rows and k <= self.max_rank


DEFAULT_BUDGET = OracleBudget()


def brute_force_maxvol(u, k=None, budget=DEFAULT_BUDGET):
    """
    Enumerate every ``k``-subset of rows and return the one of largest
    ``|det|`` (lexicographically smallest on ties) with its volume.
    """
    u = np.asarray(u, dtype=float)
    m = u.shape[0]
    k = u.shape[1] if k is None else k
    if k != u.shape[1]:
        raise ParameterError(f"k={k} must equal the number of columns {u.shape[1]}")
    if not budget.admits(m, k):
        raise BudgetError(f"{m} x {k} exceeds the oracle budget "
                          f"({budget.max_rows} rows, rank {budget.max_rank})")
    best, best_vol = None, -1.0
    for subset in combinations(range(m), k):
        vol = abs(np.linalg.det(u[list(subset)]))
        if vol > best_vol:
            best, best_vol = subset, vol
    return np.array(best, dtype=np.intp), float(best_vol)


def naive_deim(u):
    """DEIM with the oblique projector ``U_j inv(S^T U_j) S^T`` built explicitly."""
    u = np.asarray(u, dtype=float)
    m, k = u.shape
    if k > 12:
        raise BudgetError("naive_deim is limited to k <= 12")
    picked = []
    for j in range(k):
        col = u[:, j]
        if picked:
            basis = u[:, :j]
            sel = np.eye(m)[:, picked]
            small = sel.T @ basis
            if abs(np.linalg.det(small)) == 0.0:
                raise SingularityError(f"singular interpolation matrix at step {j + 1}", step=j + 1)
            projector = basis @ np.linalg.inv(small) @ sel.T
            col = col - projector @ col
        mag = np.abs(col)
        best = mag.max()
        picked.append(min(i for i in range(m) if mag[i] == best))
    return np.array(picked, dtype=np.intp)


def _pinv(x):
    uu, s, vt = np.linalg.svd(x, full_matrices=False)
    keep = s > 1e-12 * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    return (vt[keep].T / s[keep]) @ uu[:, keep].T


def explicit_pinv_cur(a, col_indices, row_indices):
    """CUR with ``M = pinv(C) A pinv(R)`` from full SVDs."""
    a = np.asarray(a.toarray() if hasattr(a, "toarray") else a, dtype=float)
    p = np.asarray(col_indices, dtype=np.intp)
    s = np.asarray(row_indices, dtype=np.intp)
    c, r = a[:, p], a[s, :]
    m_core = _pinv(c) @ a @ _pinv(r)
    return CURFactors(c, m_core, r, p, s)
