"""
Benchmark sweeps: relative error, selection time and eta constants over
methods, ranks, block sizes and random trials.

One SVD (of rank ``max(ranks) + 1``) is computed per trial and shared by
every cell of that trial; its cost is never attributed to a selector.
Selection time covers choosing both the row and the column indices and is
the median of ``timing_reps`` runs after one discarded warm-up run.
"""

import csv
import logging
import math
import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cur import assemble_cur, eta, relative_error
from .data import DatasetSpec, gen_random_orthonormal, load_dataset
from .exceptions import CURError, ParameterError
from .linalg import truncated_svd
from .selection import SelectorConfig, select_indices

log = logging.getLogger(__name__)

CSV_FIELDS = ("method", "k", "b", "trial", "seed", "rel_error", "select_time_s",
              "eta_s", "eta_p", "sigma_k1", "error")
ETA_FIELDS = ("method", "b", "trial", "seed", "eta_s", "error")
TIMING_FIELDS = ("select_time_s",)

NAN = float("nan")


def fmt(value):
    """CSV cell text: 17 significant digits for floats, '' for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass
class BenchRecord:
    method: str
    k: int
    b: int | None
    trial: int
    seed: int
    rel_error: float = NAN
    select_time_s: float = NAN
    eta_s: float = NAN
    eta_p: float = NAN
    sigma_k1: float = NAN
    error: str = ""

    def sort_key(self):
        return (self.method, self.k, -1 if self.b is None else self.b, self.trial)

    def as_row(self):
        return [fmt(getattr(self, f)) for f in CSV_FIELDS]


@dataclass
class SweepPlan:
    """
    A grid of benchmark cells.

    Methods that take a block size are expanded over ``blocks`` (or use
    their own ``config.block`` when ``blocks`` is empty); the others get a
    single cell per rank with ``b`` left blank.  Trial ``t`` uses seed
    ``seed + t`` for generated datasets.
    """

    dataset: DatasetSpec
    methods: list
    ranks: list
    blocks: list = field(default_factory=list)
    trials: int = 1
    seed: int = 0
    timing_reps: int = 3
    parallel: int = 1

    def validate(self):
        if not self.methods:
            raise ParameterError("the plan has no methods")
        if not self.ranks:
            raise ParameterError("the plan has no ranks")
        if any(int(k) != k or k < 1 for k in self.ranks):
            raise ParameterError(f"ranks must be positive integers, got {self.ranks}")
        if any(int(b) != b or b < 1 for b in self.blocks):
            raise ParameterError(f"block sizes must be positive integers, got {self.blocks}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.timing_reps < 1:
            raise ParameterError("timing_reps must be >= 1")

    def cells(self, trial):
        """Cells of one trial as ``(config, k, b)`` in deterministic order."""
        out = []
        for cfg in self.methods:
            blocks = (self.blocks or [cfg.block]) if cfg.uses_block else [None]
            for k in sorted(self.ranks):
                for b in blocks:
                    out.append((cfg, k, b))
        return out


def time_call(fn, reps=3):
    """Run ``fn`` once as warm-up, then ``reps`` timed runs.

    Returns ``(result_of_warmup, median_seconds)``.
    """
    result = fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return result, statistics.median(times)


def _run_cell(a, svd, cfg, k, b, trial, seed, reps):
    rec = BenchRecord(cfg.method, k, b, trial, seed)
    try:
        config = replace(cfg, block=b) if b is not None else cfg
        if b is not None and b > k:
            raise ParameterError(f"block size b={b} exceeds rank k={k}")
        uk, vk = svd.u[:, :k], svd.v[:, :k]
        (rows, cols), secs = time_call(
            lambda: (select_indices(uk, config), select_indices(vk, config)), reps)
        rec.select_time_s = secs
        rec.sigma_k1 = float(svd.s[k]) if k < svd.rank else 0.0
        rec.eta_s = eta(uk, rows)
        rec.eta_p = eta(vk, cols)
        factors = assemble_cur(a, cols, rows, config)
        rec.rel_error = relative_error(a, factors, norm_a=float(svd.s[0]))
    except CURError as exc:
        rec.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        log.warning("%s k=%s b=%s trial=%s failed: %s", cfg.method, k, b, trial, exc)
    return rec


def run_bench(plan):
    """Execute a :class:`SweepPlan`; records are sorted by (method, k, b, trial)."""
    plan.validate()
    records = []
    a = None
    for trial in range(plan.trials):
        seed = plan.seed + trial
        if a is None or plan.dataset.is_generator:
            a, _ = load_dataset(plan.dataset, seed=seed)
        mn = min(a.shape)
        kmax = max(plan.ranks)
        if kmax > mn:
            raise ParameterError(f"rank {kmax} exceeds min(m, n) = {mn}")
        svd = truncated_svd(a, min(kmax + 1, mn))
        cells = plan.cells(trial)
        log.info("trial %d: %d cells", trial, len(cells))

        def work(cell):
            cfg, k, b = cell
            return _run_cell(a, svd, cfg, k, b, trial, seed, plan.timing_reps)

        if plan.parallel > 1:
            with ThreadPoolExecutor(max_workers=plan.parallel) as pool:
                records.extend(pool.map(work, cells))
        else:
            records.extend(map(work, cells))
    records.sort(key=BenchRecord.sort_key)
    return records


def write_records(records, path, fields=CSV_FIELDS):
    """Write records (objects with ``as_row``) as CSV with a header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for rec in records:
            writer.writerow(rec.as_row())


@dataclass
class EtaRecord:
    method: str
    b: int | None
    trial: int
    seed: int
    eta_s: float = NAN
    error: str = ""

    def as_row(self):
        return [fmt(getattr(self, f)) for f in ETA_FIELDS]


ETA_METHODS = ("deim", "block_rrqr", "block_maxvol")


def eta_study(m, k, trials, blocks, seed=0, delta=0.01):
    """
    ``eta_s`` of DEIM, B-DEIM-RRQR and B-DEIM-MaxVol on random orthonormal
    ``m x k`` bases (trial ``t`` uses seed ``seed + t``).

    DEIM does not depend on the block size and contributes one record per
    trial with ``b`` blank.
    """
    if not 1 <= k < m:
        raise ParameterError(f"eta study needs 1 <= k < m, got m={m}, k={k}")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not blocks or any(b < 1 or b > k for b in blocks):
        raise ParameterError(f"block sizes must lie in [1, k={k}], got {blocks}")
    records = []
    for trial in range(trials):
        u = gen_random_orthonormal(m, k, seed + trial)
        for method in ETA_METHODS:
            for b in ([None] if method == "deim" else blocks):
                rec = EtaRecord(method, b, trial, seed + trial)
                try:
                    cfg = SelectorConfig(method=method, block=b or 1, delta=delta)
                    rec.eta_s = eta(u, select_indices(u, cfg))
                except CURError as exc:
                    rec.error = f"{type(exc).__name__}: {exc}"
                records.append(rec)
    return records


def median_eta(records, method, b=None):
    vals = [r.eta_s for r in records if r.method == method and r.b == b and not r.error]
    return statistics.median(vals)


def _safe(value):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", value) or "blank"


def plotdata(csv_path, x, y, group_by, out_dir):
    """
    Split a results CSV into one whitespace-delimited ``x y`` file per
    value of ``group_by``, averaging ``y`` over rows sharing ``x``.

    Rows with a non-empty ``error`` column or a non-numeric ``y`` are
    skipped.  Returns the written paths keyed by group value.
    """
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for name in (x, y, group_by):
            if name not in header:
                raise ParameterError(f"field {name!r} not in {csv_path} (fields: {', '.join(header)})")
        groups = {}
        for row in reader:
            if row.get("error"):
                continue
            try:
                xv, yv = float(row[x]), float(row[y])
            except ValueError:
                continue
            if math.isnan(yv):
                continue
            groups.setdefault(row[group_by], {}).setdefault(xv, []).append(yv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for gval in sorted(groups):
        path = out_dir / f"{_safe(group_by)}={_safe(gval)}.dat"
        pts = groups[gval]
        lines = [f"# {x} mean({y}) for {group_by}={gval}"]
        lines += [f"{fmt(xv)} {fmt(float(np.mean(pts[xv])))}" for xv in sorted(pts)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written[gval] = path
    return written


def default_ranks(m, n):
    """Rank grid by matrix size: 5..50, 10..100 or 100..800."""
    mn = min(m, n)
    if mn <= 100:
        grid = range(5, 51, 5)
    elif mn <= 1000:
        grid = range(10, 101, 10)
    else:
        grid = range(100, 801, 100)
    ranks = [k for k in grid if k < mn]
    return ranks or [max(1, mn - 1)]
