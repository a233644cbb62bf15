"""
From files to a benchmark table with the ``cur`` command
========================================================

Write a Matrix Market file and a CSV of "prices", select indices, run a
small sweep, and split the results into per-method data files ready for
any plotting tool.  Everything goes to a temporary directory.
"""

import tempfile
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from blockdeim.cli import main
from blockdeim.data import write_matrix_market

work = Path(tempfile.mkdtemp(prefix="blockdeim-demo-"))
print("working in", work)

# a sparse term-document style matrix
A = sp.random(300, 200, density=0.05, format="csc", random_state=1)
write_matrix_market(work / "terms.mtx", A, comment="random sparse demo matrix")

# rows and columns for a rank-10 CUR; indices are 1-based on the command line
main(["select", "--input", str(work / "terms.mtx"), "--method", "block_rrqr",
      "--block", "5", "--rank", "10"])

# a CSV with a header and one incomplete column, as stock data often is
rng = np.random.default_rng(2)
prices = 100 + np.cumsum(rng.standard_normal((60, 8)), axis=0)
header = ",".join(f"T{j}" for j in range(8))
lines = [header] + [",".join("" if (j == 3 and i < 5) else f"{v:.4f}" for j, v in enumerate(row))
                    for i, row in enumerate(prices)]
(work / "prices.csv").write_text("\n".join(lines) + "\n")

# drop the incomplete column, then center; the manifest records both steps
main(["bench", "--input", str(work / "prices.csv"), "--header",
      "--preprocess", "dropmissing", "--preprocess", "center",
      "--method", "deim", "--method", "block_maxvol", "--method", "qdeim",
      "--rank", "2,3,4,5", "--block", "2", "--out", str(work / "prices.csv.results"),
      "--manifest", str(work / "prices.manifest")])
print((work / "prices.manifest").read_text())

# one x/y file per method, averaged over trials
main(["plotdata", "--input", str(work / "prices.csv.results"), "--x", "k", "--y", "rel_error",
      "--group-by", "method", "--out", str(work / "plots")])
for path in sorted((work / "plots").iterdir()):
    print(path.name)
    print(path.read_text())
