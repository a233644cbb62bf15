"""
How much does each selection amplify the tail?
==============================================

For random orthonormal bases compare eta_s = ||inv(U[s, :])|| of DEIM with
the two block methods at several block sizes.  Smaller is better: eta_s
multiplies sigma_{k+1} in the CUR error bound.
"""

import sys

import numpy as np

from blockdeim.bench import eta_study, median_eta

m, k, trials = (10000, 100, 50) if "--full" in sys.argv else (2000, 50, 20)
blocks = [2, 5, 10, 20]

records = eta_study(m, k, trials, blocks, seed=0)

print(f"{trials} random {m} x {k} bases, median / max eta_s")
deim_vals = [r.eta_s for r in records if r.method == "deim"]
print(f"  deim                {median_eta(records, 'deim'):8.2f} {max(deim_vals):8.2f}")
for method in ("block_rrqr", "block_maxvol"):
    for b in blocks:
        vals = [r.eta_s for r in records if r.method == method and r.b == b]
        print(f"  {method:13s} b={b:<3d}{np.median(vals):8.2f} {max(vals):8.2f}")

# per-instance the block methods usually, not always, win
wins = 0
for t in range(trials):
    d = next(r.eta_s for r in records if r.method == "deim" and r.trial == t)
    blk = next(r.eta_s for r in records if r.method == "block_rrqr" and r.b == 10 and r.trial == t)
    wins += blk < d
print(f"block_rrqr b=10 beats deim on {wins} of {trials} bases")
