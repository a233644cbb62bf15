"""
Matrix ingestion, preprocessing and synthetic generators.

Real datasets (Jester, Reuters-21578, MNIST, S&P 500 prices) are not
shipped; :class:`DatasetSpec` records how a user-supplied file is loaded
and transformed so the recipe can be replayed and logged in a manifest.

Random streams come from numpy's ``PCG64`` bit generator seeded with the
given integer (``numpy.random.default_rng(seed)``), Gaussians from its
``standard_normal``.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError, ParseError, UnsupportedFormatError

log = logging.getLogger(__name__)

PREPROCESS_STEPS = ("center_columns", "unit_row_norm", "drop_missing_columns")
PREPROCESS_ALIASES = {
    "center": "center_columns",
    "rownorm": "unit_row_norm",
    "dropmissing": "drop_missing_columns",
}


# Matrix Market

def read_matrix_market(path):
    """
    Read a Matrix Market file.

    ``coordinate`` files give a CSC matrix (duplicate entries summed),
    ``array`` files a dense ndarray.  ``real`` and ``integer`` fields with
    ``general`` or ``symmetric`` symmetry are supported; symmetric storage
    is expanded.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket" or header[1].lower() != "matrix":
        raise ParseError(f"bad Matrix Market header {lines[0]!r}", line=1)
    fmt, fieldtype, symmetry = (h.lower() for h in header[2:])
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"unknown storage format {fmt!r}", line=1)
    if fieldtype in ("pattern", "complex"):
        raise UnsupportedFormatError(f"{fieldtype} matrices are not supported", line=1)
    if fieldtype not in ("real", "integer", "double"):
        raise ParseError(f"unknown field type {fieldtype!r}", line=1)
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"{symmetry} symmetry is not supported", line=1)

    body = ((no, ln.split()) for no, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%"))

    def numbers(tokens, no, count, kinds):
        if len(tokens) != count:
            raise ParseError(f"expected {count} fields, got {len(tokens)}", line=no)
        try:
            return [kind(t) for kind, t in zip(kinds, tokens)]
        except ValueError:
            raise ParseError(f"non-numeric entry {' '.join(tokens)!r}", line=no) from None

    try:
        size_no, size_tokens = next(body)
    except StopIteration:
        raise ParseError("missing size line", line=len(lines) + 1) from None
    symmetric = symmetry == "symmetric"

    if fmt == "coordinate":
        m, n, nnz = numbers(size_tokens, size_no, 3, (int, int, int))
        rows, cols, vals = [], [], []
        for _ in range(nnz):
            try:
                no, tokens = next(body)
            except StopIteration:
                raise ParseError(f"file truncated: expected {nnz} entries, read {len(vals)}",
                                 line=len(lines) + 1) from None
            i, j, v = numbers(tokens, no, 3, (int, int, float))
            if not (1 <= i <= m and 1 <= j <= n):
                raise ParseError(f"entry ({i}, {j}) outside {m} x {n}", line=no)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            if symmetric and i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(v)
        _no_trailing(body)
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(m, n)).tocsc()
        mat.sum_duplicates()
        return mat

    m, n = numbers(size_tokens, size_no, 2, (int, int))
    if symmetric and m != n:
        raise ParseError("symmetric array matrix must be square", line=size_no)
    positions = [(i, j) for j in range(n) for i in range(m) if not symmetric or i >= j]
    out = np.zeros((m, n))
    for count, (i, j) in enumerate(positions):
        try:
            no, tokens = next(body)
        except StopIteration:
            raise ParseError(f"file truncated: expected {len(positions)} values, read {count}",
                             line=len(lines) + 1) from None
        (v,) = numbers(tokens, no, 1, (float,))
        out[i, j] = v
        if symmetric:
            out[j, i] = v
    _no_trailing(body)
    return out


def _no_trailing(body):
    for no, _ in body:
        raise ParseError("unexpected data after the last entry", line=no)


def write_matrix_market(path, a, comment=None):
    """Write ``a`` (dense -> array, sparse -> coordinate) with 17 significant digits."""
    lines = []
    if sp.issparse(a):
        coo = sp.coo_matrix(a)
        lines.append("%%MatrixMarket matrix coordinate real general")
        if comment:
            lines.extend(f"% {c}" for c in comment.splitlines())
        lines.append(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}")
        order = np.lexsort((coo.row, coo.col))
        lines.extend(f"{coo.row[t] + 1} {coo.col[t] + 1} {coo.data[t]:.17g}" for t in order)
    else:
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ParameterError("only 2-D arrays can be written")
        lines.append("%%MatrixMarket matrix array real general")
        if comment:
            lines.extend(f"% {c}" for c in comment.splitlines())
        lines.append(f"{a.shape[0]} {a.shape[1]}")
        lines.extend(f"{v:.17g}" for v in a.ravel(order="F"))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# CSV

@dataclass
class CsvMatrix:
    data: np.ndarray
    labels: list | None = None
    dropped: list = field(default_factory=list)


def _parse_cell(text):
    text = text.strip()
    if not text:
        return None
    try:
        v = float(text)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def read_csv_matrix(path, has_header=False, drop_missing=False):
    """
    Read a rectangular numeric CSV file.

    With ``has_header`` the first row holds column labels.  Empty,
    non-numeric or non-finite cells are an error unless ``drop_missing``
    is set, in which case their columns are removed and listed in
    ``CsvMatrix.dropped`` (by label, or 1-based column number without a
    header).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [(no, r) for no, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    labels = None
    if has_header:
        if not rows:
            raise ParseError("missing header row", line=1)
        labels = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise ParseError("no data rows", line=1)
    width = len(labels) if labels is not None else len(rows[0][1])
    values = np.empty((len(rows), width))
    missing = np.zeros(width, dtype=bool)
    for r, (no, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(f"ragged row: {len(cells)} fields, expected {width}", line=no)
        for c, cell in enumerate(cells):
            v = _parse_cell(cell)
            if v is None:
                if not drop_missing:
                    raise ParseError(f"non-numeric cell {cell!r} at row {r + 1}, column {c + 1}", line=no)
                missing[c] = True
                v = np.nan
            values[r, c] = v
    keep = ~missing
    dropped = [labels[c] if labels else c + 1 for c in np.flatnonzero(missing)]
    if dropped:
        log.info("dropped %d columns with missing values", len(dropped))
    if not keep.any():
        raise ParseError("every column has missing values")
    kept_labels = [lab for lab, k in zip(labels, keep) if k] if labels else None
    return CsvMatrix(values[:, keep], kept_labels, dropped)


# preprocessing

def center_columns(a):
    """Subtract each column's mean (dense result)."""
    a = a.toarray() if sp.issparse(a) else np.array(a, dtype=float)
    return a - a.mean(axis=0)


def unit_row_norm(a, return_zero_rows=False):
    """
    Scale every nonzero row to unit 2-norm; zero rows stay zero.

    Sparse input stays sparse.  Zero rows are logged and, with
    ``return_zero_rows``, returned as 0-based indices.
    """
    if sp.issparse(a):
        a = sp.csr_matrix(a, dtype=float)
        norms = np.sqrt(np.asarray(a.multiply(a).sum(axis=1)).ravel())
        scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        out = sp.diags(scale) @ a
        out = out.tocsr()
    else:
        a = np.array(a, dtype=float)
        norms = np.linalg.norm(a, axis=1)
        scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        out = a * scale[:, None]
    zero_rows = np.flatnonzero(norms == 0)
    if zero_rows.size:
        log.warning("unit_row_norm: %d zero rows left unscaled", zero_rows.size)
    return (out, zero_rows) if return_zero_rows else out


# generators

def gen_random_orthonormal(m, k, seed):
    """``m x k`` orthonormal matrix: QR of a seeded Gaussian, diag(R) > 0."""
    if not 1 <= k <= m:
        raise ParameterError(f"need 1 <= k <= m, got m={m}, k={k}")
    g = np.random.default_rng(seed).standard_normal((m, k))
    return _orthonormalize(g)


def _orthonormalize(g):
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def logspace_spectrum(count, high=1.0, low=1e-3):
    """``count`` logarithmically spaced values from ``high`` down to ``low``."""
    return np.logspace(np.log10(high), np.log10(low), count)


def gen_svd_structured(m, n, spectrum, seed):
    """
    ``A = U diag(spectrum) V^T`` with random orthonormal ``U`` (m x r) and
    ``V`` (n x r), both drawn from one seeded stream (U first).
    """
    spectrum = np.asarray(spectrum, dtype=float)
    r = spectrum.size
    if r < 1 or r > min(m, n):
        raise ParameterError(f"spectrum length {r} must be in [1, min(m, n) = {min(m, n)}]")
    if np.any(spectrum < 0) or np.any(np.diff(spectrum) > 0):
        raise ParameterError("spectrum must be non-negative and non-increasing")
    rng = np.random.default_rng(seed)
    u = _orthonormalize(rng.standard_normal((m, r)))
    v = _orthonormalize(rng.standard_normal((n, r)))
    return (u * spectrum) @ v.T


def gen_random_sparse(m, n, density, seed):
    """Sparse ``m x n`` CSC matrix with standard normal nonzeros."""
    rng = np.random.default_rng(seed)
    return sp.random(m, n, density=density, format="csc", random_state=rng,
                     data_rvs=rng.standard_normal)


# datasets

@dataclass(frozen=True)
class DatasetSpec:
    """
    Where a matrix comes from and how it is transformed.

    ``source`` is a file path or a generator string:

    * ``svd_logspace:M:N`` - :func:`gen_svd_structured` with a
      ``min(M, N)``-term logspace spectrum from 1 to 1e-3
    * ``gaussian:M:N`` - i.i.d. standard normal entries
    * ``sparse:M:N:DENSITY`` - :func:`gen_random_sparse`
    """

    source: str
    preprocessing: tuple = ()
    seed: int = 0
    format: str | None = None
    has_header: bool = False

    def __post_init__(self):
        steps = tuple(PREPROCESS_ALIASES.get(s, s) for s in self.preprocessing)
        for step in steps:
            if step not in PREPROCESS_STEPS:
                raise ParameterError(f"unknown preprocessing step {step!r}")
        object.__setattr__(self, "preprocessing", steps)

    @property
    def is_generator(self):
        return self.source.split(":", 1)[0] in GENERATORS


def _gen_svd_logspace(args, seed):
    m, n = (int(x) for x in args)
    return gen_svd_structured(m, n, logspace_spectrum(min(m, n)), seed)


def _gen_gaussian(args, seed):
    m, n = (int(x) for x in args)
    return np.random.default_rng(seed).standard_normal((m, n))


def _gen_sparse(args, seed):
    m, n, density = int(args[0]), int(args[1]), float(args[2])
    return gen_random_sparse(m, n, density, seed)


GENERATORS = {
    "svd_logspace": _gen_svd_logspace,
    "gaussian": _gen_gaussian,
    "sparse": _gen_sparse,
}


def load_dataset(spec, seed=None):
    """
    Materialize a :class:`DatasetSpec`.

    Returns ``(matrix, manifest)``; the manifest dict records the source,
    the steps applied in order, dimensions and seed.  ``seed`` overrides
    ``spec.seed`` for generators (used per benchmark trial).
    """
    seed = spec.seed if seed is None else seed
    manifest = {"source": spec.source}
    labels = None
    name, _, rest = spec.source.partition(":")
    if name in GENERATORS:
        try:
            a = GENERATORS[name](rest.split(":"), seed)
        except (ValueError, IndexError, TypeError) as exc:
            raise ParameterError(f"bad generator spec {spec.source!r}: {exc}") from exc
        manifest["seed"] = seed
    else:
        fmt = spec.format or ("csv" if spec.source.lower().endswith(".csv") else "mtx")
        if fmt == "mtx":
            a = read_matrix_market(spec.source)
        elif fmt == "csv":
            drop = "drop_missing_columns" in spec.preprocessing
            parsed = read_csv_matrix(spec.source, spec.has_header, drop_missing=drop)
            a, labels = parsed.data, parsed.labels
            if drop:
                manifest["drop_missing_columns"] = " ".join(str(d) for d in parsed.dropped) or "none"
        else:
            raise ParameterError(f"unknown format {fmt!r}")
        manifest["format"] = fmt
    applied = []
    for step in spec.preprocessing:
        if step == "center_columns":
            a = center_columns(a)
        elif step == "unit_row_norm":
            a, zero_rows = unit_row_norm(a, return_zero_rows=True)
            manifest["zero_rows"] = " ".join(str(i + 1) for i in zero_rows) or "none"
        elif step == "drop_missing_columns" and spec.is_generator:
            continue  # generators never produce missing values
        applied.append(step)
        log.info("applied %s", step)
    manifest["preprocessing"] = ",".join(applied) or "none"
    manifest["rows"], manifest["cols"] = a.shape
    manifest["sparse"] = sp.issparse(a)
    if labels is not None:
        manifest["labels"] = len(labels)
    return a, manifest


def write_manifest(path, manifest):
    """Write ``key = value`` lines."""
    text = "".join(f"{k} = {v}\n" for k, v in manifest.items())
    Path(path).write_text(text, encoding="utf-8")


def read_manifest(path):
    out = {}
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError("expected 'key = value'", line=no)
        out[key.strip()] = value.strip()
    return out
