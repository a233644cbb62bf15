"""
``cur`` command line: ``select``, ``bench``, ``eta-study`` and ``plotdata``.

Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure.
Indices are printed 1-based.
"""

import argparse
import logging
import sys

import numpy as np
import scipy.sparse as sp

from . import bench
from .cur import assemble_cur, eta
from .data import DatasetSpec, load_dataset, write_manifest
from .exceptions import CURError, ConvergenceError, ParameterError, ParseError, SingularityError
from .linalg import truncated_svd
from .oracle import DEFAULT_BUDGET, brute_force_maxvol, explicit_pinv_cur, naive_deim
from .selection import METHODS, SelectorConfig, select_indices

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

LOGSPACE = {"m": 1000, "n": 2000, "ranks": [50, 100, 200, 400]}
LOGSPACE_FULL = {"m": 2000, "n": 4000, "ranks": list(range(100, 801, 100))}


def int_list(text):
    """``"5,10"`` or ``"100:800:100"`` (inclusive) to a list of ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(x) for x in part.split(":")]
            if len(bits) == 2:
                bits.append(1)
            start, stop, step = bits
            if step < 1:
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            out.extend(range(start, stop + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def _flatten(lists):
    return [x for sub in lists or [] for x in sub]


def _add_common(p):
    p.add_argument("--input", help="matrix file (.mtx or .csv) or generator spec, e.g. svd_logspace:1000:2000")
    p.add_argument("--format", choices=("mtx", "csv"), help="input file format (default: from extension)")
    p.add_argument("--header", action="store_true", help="CSV input has a header row of labels")
    p.add_argument("--preprocess", action="append", default=[],
                   choices=("center", "rownorm", "dropmissing"),
                   help="preprocessing step, repeatable, applied in order")
    p.add_argument("--delta", type=float, default=0.01, help="MaxVol tolerance (default 0.01)")
    p.add_argument("--rho", type=float, default=0.95, help="adaptive switch threshold (default 0.95)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="cur", description="Block DEIM CUR factorization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select row/column indices for one rank")
    _add_common(p)
    p.add_argument("--method", choices=METHODS, default="deim")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--block", type=int, default=5)
    p.add_argument("--basis", action="store_true",
                   help="input already is an orthonormal basis; select its rows only")
    p.add_argument("--verify", action="store_true", help="cross-check against brute-force oracles on tiny inputs")

    p = sub.add_parser("bench", help="sweep methods x ranks x blocks x trials into a CSV")
    _add_common(p)
    p.add_argument("--method", action="append", choices=METHODS, default=None)
    p.add_argument("--rank", action="append", type=int_list, default=None,
                   help="ranks: 50,100 or 100:800:100")
    p.add_argument("--block", action="append", type=int_list, default=None,
                   help="block sizes for block methods (default 5)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--timing-reps", type=int, default=3)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--preset", choices=("logspace",), help="synthetic 1000 x 2000 matrix with logspace spectrum 1..1e-3")
    p.add_argument("--full-scale", action="store_true", help="with --preset logspace: 2000 x 4000, ranks 100..800")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", help="also write a key = value dataset manifest")

    p = sub.add_parser("eta-study", help="eta_s of DEIM vs block methods on random orthonormal bases")
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--rank", type=int, default=50)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--block", action="append", type=int_list, default=None)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-scale", action="store_true", help="10000 x 100 bases")
    p.add_argument("--out", required=True)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("plotdata", help="split a results CSV into per-group x/y files")
    p.add_argument("--input", required=True)
    p.add_argument("--x", default="k")
    p.add_argument("--y", default="rel_error")
    p.add_argument("--group-by", default="method")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _dataset(args):
    if not args.input:
        raise ParameterError("--input is required")
    return DatasetSpec(args.input, tuple(args.preprocess), args.seed, args.format, args.header)


def _fmt_idx(idx):
    return " ".join(str(int(i) + 1) for i in idx)


def cmd_select(args, out):
    config = SelectorConfig(args.method, args.block, args.delta, args.rho)
    a, _ = load_dataset(_dataset(args))
    m, n = a.shape
    k = args.rank
    limit = n if args.basis else min(m, n)
    if not 1 <= k <= limit:
        what = "number of basis columns" if args.basis else "min(m, n)"
        raise ParameterError(f"--rank {k} violates 1 <= k <= {what} = {limit}")
    if config.uses_block and config.block > k:
        raise ParameterError(f"--block {config.block} violates 1 <= b <= k = {k}")

    if args.basis:
        u = (a.toarray() if sp.issparse(a) else a)[:, :k]
        rows = select_indices(u, config)
        cols, eta_p = None, None
        eta_s = eta(u, rows)
    else:
        svd = truncated_svd(a, k)
        rows = select_indices(svd.u, config)
        cols = select_indices(svd.v, config)
        eta_s, eta_p = eta(svd.u, rows), eta(svd.v, cols)

    print(f"method  {config.method}", file=out)
    print(f"rank    {k}", file=out)
    if config.uses_block:
        print(f"block   {config.block}", file=out)
    print(f"rows    {_fmt_idx(rows)}", file=out)
    if cols is not None:
        print(f"cols    {_fmt_idx(cols)}", file=out)
    print(f"eta_s   {eta_s:.6g}", file=out)
    if eta_p is not None:
        print(f"eta_p   {eta_p:.6g}", file=out)
    print("--", file=out)
    print(f"ROWS {_fmt_idx(rows)}", file=out)
    if cols is not None:
        print(f"COLS {_fmt_idx(cols)}", file=out)
    print(f"ETA_S {eta_s:.17g}", file=out)
    if eta_p is not None:
        print(f"ETA_P {eta_p:.17g}", file=out)

    if args.verify:
        ok = _verify(a, args, config, rows, cols, svd=None if args.basis else svd, out=out)
        if not ok:
            return EXIT_NUMERICAL
    return 0


def _verify(a, args, config, rows, cols, svd, out):
    bases = [("rows", a[:, :args.rank] if args.basis else svd.u, rows)]
    if svd is not None:
        bases.append(("cols", svd.v, cols))
    ok = True
    for label, u, idx in bases:
        m, k = u.shape
        if not DEFAULT_BUDGET.admits(m, k):
            print(f"VERIFY {label} skipped (outside oracle budget)", file=out)
            continue
        if config.method == "deim":
            same = np.array_equal(naive_deim(u), idx)
            print(f"VERIFY {label} deim-vs-naive {'ok' if same else 'MISMATCH'}", file=out)
            ok &= same
        _, best = brute_force_maxvol(u, k)
        vol = abs(np.linalg.det(u[idx]))
        print(f"VERIFY {label} volume {vol:.6g} of max {best:.6g}", file=out)
    if svd is not None and max(a.shape) <= 200:
        dense = a.toarray() if sp.issparse(a) else a
        m_fast = assemble_cur(dense, cols, rows).m_core
        m_ref = explicit_pinv_cur(dense, cols, rows).m_core
        diff = np.abs(m_fast - m_ref).max() / max(np.abs(m_ref).max(), 1e-300)
        same = diff <= 1e-10
        print(f"VERIFY core-vs-pinv {'ok' if same else 'MISMATCH'} ({diff:.3e})", file=out)
        ok &= same
    return ok


def cmd_bench(args, out):
    if args.preset == "logspace":
        preset = LOGSPACE_FULL if args.full_scale else LOGSPACE
        source = args.input or f"svd_logspace:{preset['m']}:{preset['n']}"
        methods = args.method or ["block_rrqr", "block_maxvol"]
        ranks = _flatten(args.rank) or preset["ranks"]
        blocks = _flatten(args.block) or [2, 5, 10, 20]
    else:
        source = args.input
        methods = args.method
        ranks = _flatten(args.rank)
        blocks = _flatten(args.block)
    if not methods:
        raise ParameterError("at least one --method is required")
    if not source:
        raise ParameterError("--input is required")
    spec = DatasetSpec(source, tuple(args.preprocess), args.seed, args.format, args.header)
    if not ranks:
        a, _ = load_dataset(spec)
        ranks = bench.default_ranks(*a.shape)
    configs = [SelectorConfig(mth, blocks[0] if blocks else 5, args.delta, args.rho) for mth in methods]
    plan = bench.SweepPlan(spec, configs, ranks, blocks, args.trials, args.seed,
                           args.timing_reps, args.parallel)
    records = bench.run_bench(plan)
    bench.write_records(records, args.out)
    if args.manifest:
        _, manifest = load_dataset(spec)
        manifest.update(trials=args.trials, methods=",".join(methods),
                        ranks=",".join(map(str, ranks)), blocks=",".join(map(str, blocks)) or "default")
        write_manifest(args.manifest, manifest)
    failed = sum(1 for r in records if r.error)
    print(f"wrote {len(records)} records to {args.out} ({failed} failed cells)", file=out)
    return 0


def cmd_eta_study(args, out):
    m, k = (10000, 100) if args.full_scale else (args.m, args.rank)
    blocks = _flatten(args.block) or [2, 5, 10, 20]
    records = bench.eta_study(m, k, args.trials, blocks, args.seed, args.delta)
    bench.write_records(records, args.out, bench.ETA_FIELDS)
    print(f"median eta_s over {args.trials} trials ({m} x {k}):", file=out)
    print(f"  deim          {bench.median_eta(records, 'deim'):.6g}", file=out)
    for method in ("block_rrqr", "block_maxvol"):
        for b in blocks:
            print(f"  {method:13s} b={b:<3d} {bench.median_eta(records, method, b):.6g}", file=out)
    return 0


def cmd_plotdata(args, out):
    written = bench.plotdata(args.input, args.x, args.y, args.group_by, args.out)
    for gval, path in written.items():
        print(f"{gval}\t{path}", file=out)
    return 0


COMMANDS = {
    "select": cmd_select,
    "bench": cmd_bench,
    "eta-study": cmd_eta_study,
    "plotdata": cmd_plotdata,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except (ParameterError, ParseError, FileNotFoundError) as exc:
        print(f"cur {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularityError, ConvergenceError) as exc:
        print(f"cur {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CURError as exc:
        print(f"cur {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
