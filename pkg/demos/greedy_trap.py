"""
When greedy DEIM picks the wrong rows
=====================================

Three rows, two singular vectors.  The first vector has three entries of
nearly equal size, so greedy DEIM commits to row 1 on a margin of 1e-15
and never revisits it.  Picking two rows at once avoids the trap.
"""

import numpy as np

from blockdeim import SelectorConfig, assemble_cur, block_deim_maxvol, block_deim_rrqr, deim, eta

eps = 1e-15
a3, a2 = np.sqrt(3) / 3, np.sqrt(2) / 2
U = np.array([[a3 + eps, 0.0],
              [a3, a2 + eps],
              [a3, -a2]])

# greedy: one index per vector (printed 1-based)
print("DEIM rows          ", deim(U) + 1)

# block size 2 looks at both vectors together
print("B-DEIM-RRQR rows   ", block_deim_rrqr(U, SelectorConfig("block_rrqr", block=2)) + 1)
print("B-DEIM-MaxVol rows ", block_deim_maxvol(U, SelectorConfig("block_maxvol", block=2)) + 1)

# the volumes behind the choice
for rows in ([0, 1], [1, 2], [0, 2]):
    print(f"|det U[{rows[0] + 1},{rows[1] + 1}]| = {abs(np.linalg.det(U[rows])):.4f}")

# eta = ||inv(U[s, :])|| multiplies sigma_{k+1} in the CUR error bound
print("eta DEIM  ", eta(U, [0, 1]))
print("eta block ", eta(U, [1, 2]))

# A = U diag(1, 0.99) has rank 2, so either rank-2 CUR reproduces it up to
# rounding; the choice matters once A has a tail, where eta scales the error
A = U @ np.diag([1.0, 0.99])
for rows in ([0, 1], [1, 2]):
    f = assemble_cur(A, [0, 1], rows)
    print(rows, "max |A - CMR| =", np.abs(A - f.reconstruct()).max())
