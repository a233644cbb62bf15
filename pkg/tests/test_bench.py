import csv
import io

import numpy as np
import pytest

from blockdeim import bench
from blockdeim.cli import int_list, main
from blockdeim.data import DatasetSpec, write_matrix_market
from blockdeim.exceptions import ParameterError
from blockdeim.selection import SelectorConfig

from conftest import greedy_trap_basis


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def machine_lines(text):
    tail = text.split("--\n", 1)[1]
    return dict(line.split(" ", 1) for line in tail.strip().splitlines() if not line.startswith("VERIFY"))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def trap_file(tmp_path):
    p = tmp_path / "greedy_trap.mtx"
    write_matrix_market(p, greedy_trap_basis())
    return str(p)


# select

def test_select_deim_greedy_trap(trap_file):
    code, text = run(["select", "--input", trap_file, "--basis", "--method", "deim", "--rank", "2"])
    assert code == 0
    assert machine_lines(text)["ROWS"] == "1 2"
    assert float(machine_lines(text)["ETA_S"]) == pytest.approx(np.sqrt(6))


def test_select_block_rrqr_greedy_trap(trap_file):
    code, text = run(["select", "--input", trap_file, "--basis", "--method", "block_rrqr",
                      "--block", "2", "--rank", "2"])
    assert code == 0
    assert set(machine_lines(text)["ROWS"].split()) == {"2", "3"}
    assert "rows    " in text and "block   2" in text


def test_select_rank_too_large(trap_file, capsys):
    code, _ = run(["select", "--input", trap_file, "--rank", "3"])
    assert code == 2
    assert "min(m, n)" in capsys.readouterr().err


def test_select_matrix_rows_and_cols(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((9, 7))
    write_matrix_market(tmp_path / "a.mtx", a)
    code, text = run(["select", "--input", str(tmp_path / "a.mtx"), "--method", "maxvol",
                      "--rank", "3", "--verify"])
    assert code == 0
    lines = machine_lines(text)
    rows = [int(x) for x in lines["ROWS"].split()]
    cols = [int(x) for x in lines["COLS"].split()]
    assert len(rows) == 3 and min(rows) >= 1 and max(rows) <= 9
    assert len(cols) == 3 and max(cols) <= 7
    assert "VERIFY core-vs-pinv ok" in text


def test_select_verify_deim(trap_file):
    code, text = run(["select", "--input", trap_file, "--basis", "--rank", "2", "--verify"])
    assert code == 0
    assert "VERIFY rows deim-vs-naive ok" in text


def test_select_csv_with_preprocessing(tmp_path):
    p = tmp_path / "x.csv"
    rng = np.random.default_rng(1)
    lines = ["a,b,c,d"] + [",".join(f"{v:.6f}" for v in row) for row in rng.standard_normal((8, 4))]
    p.write_text("\n".join(lines) + "\n")
    code, _ = run(["select", "--input", str(p), "--header", "--preprocess", "center",
                   "--preprocess", "rownorm", "--rank", "2"])
    assert code == 0


def test_select_missing_file():
    code, _ = run(["select", "--input", "/nonexistent/x.mtx", "--rank", "1"])
    assert code == 2


def test_select_numerical_failure_exit_3(tmp_path):
    # rank-1 basis columns: the second interpolation system is singular
    u = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]) / np.sqrt(3)
    write_matrix_market(tmp_path / "u.mtx", u)
    code, _ = run(["select", "--input", str(tmp_path / "u.mtx"), "--basis", "--rank", "2"])
    assert code == 3


# bench

def test_int_list():
    assert int_list("5,10") == [5, 10]
    assert int_list("100:400:100") == [100, 200, 300, 400]


def test_bench_csv_structure(tmp_path):
    out = tmp_path / "r.csv"
    code, text = run(["bench", "--input", "svd_logspace:60:80", "--method", "deim",
                      "--method", "block_rrqr", "--rank", "5,10", "--block", "2,5",
                      "--trials", "2", "--timing-reps", "1", "--out", str(out),
                      "--manifest", str(tmp_path / "m.txt")])
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0]) == list(bench.CSV_FIELDS)
    # deim: 2 ranks x 2 trials, block_rrqr: 2 ranks x 2 blocks x 2 trials
    assert len(rows) == 4 + 8
    assert all(r["error"] == "" for r in rows)
    assert {r["b"] for r in rows if r["method"] == "deim"} == {""}
    for r in rows:
        assert float(r["rel_error"]) > 0 and float(r["select_time_s"]) > 0
        # the bound in every row; sigma_1 = 1 here so relative = absolute error
        bound = (float(r["eta_s"]) + float(r["eta_p"])) * float(r["sigma_k1"])
        assert float(r["rel_error"]) <= bound * (1 + 1e-8)
    assert "trials = 2" in (tmp_path / "m.txt").read_text()


def test_bench_errors_recorded_not_raised(tmp_path):
    out = tmp_path / "r.csv"
    code, text = run(["bench", "--input", "gaussian:30:20", "--method", "block_maxvol",
                      "--rank", "3", "--block", "2,5", "--timing-reps", "1", "--out", str(out)])
    assert code == 0 and "1 failed" in text
    rows = read_csv(out)
    bad = [r for r in rows if r["error"]]
    assert len(bad) == 1 and bad[0]["b"] == "5" and "ParameterError" in bad[0]["error"]


def _strip_timing(path):
    rows = read_csv(path)
    for r in rows:
        r.pop("select_time_s")
    return rows


def test_bench_deterministic(tmp_path):
    argv = ["bench", "--input", "svd_logspace:80:100", "--method", "block_maxvol", "--method",
            "adaptive_rrqr", "--method", "qdeim", "--rank", "5,10", "--block", "2,5",
            "--trials", "2", "--seed", "7", "--timing-reps", "1"]
    run(argv + ["--out", str(tmp_path / "a.csv")])
    run(argv + ["--out", str(tmp_path / "b.csv"), "--parallel", "3"])
    assert _strip_timing(tmp_path / "a.csv") == _strip_timing(tmp_path / "b.csv")


def test_bench_no_methods(tmp_path):
    code, _ = run(["bench", "--input", "gaussian:10:10", "--rank", "2", "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_bench_rank_too_large(tmp_path):
    code, _ = run(["bench", "--input", "gaussian:10:10", "--method", "deim", "--rank", "11",
                   "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_sweep_plan_cells():
    plan = bench.SweepPlan(DatasetSpec("gaussian:5:5"),
                           [SelectorConfig("deim"), SelectorConfig("block_rrqr")], [4, 2], [1, 2])
    assert [(c.method, k, b) for c, k, b in plan.cells(0)] == [
        ("deim", 2, None), ("deim", 4, None),
        ("block_rrqr", 2, 1), ("block_rrqr", 2, 2), ("block_rrqr", 4, 1), ("block_rrqr", 4, 2)]
    with pytest.raises(ParameterError):
        bench.SweepPlan(DatasetSpec("gaussian:5:5"), [], [2]).validate()


def test_time_call_discards_warmup():
    calls = []
    result, secs = bench.time_call(lambda: calls.append(1) or len(calls), reps=3)
    assert result == 1 and len(calls) == 4 and secs >= 0


def test_default_ranks():
    assert bench.default_ranks(60, 40) == list(range(5, 40, 5))
    assert bench.default_ranks(1000, 2000)[-1] == 100
    assert bench.default_ranks(2000, 4000) == list(range(100, 801, 100))


# eta-study

def test_eta_study_k_ge_m(tmp_path):
    code, _ = run(["eta-study", "--m", "10", "--rank", "10", "--trials", "1", "--out", str(tmp_path / "e.csv")])
    assert code == 2


def test_eta_study_reproducible(tmp_path):
    argv = ["eta-study", "--m", "200", "--rank", "10", "--trials", "1", "--block", "2,5", "--seed", "3"]
    run(argv + ["--out", str(tmp_path / "a.csv")])
    code, text = run(argv + ["--out", str(tmp_path / "b.csv")])
    assert code == 0 and "median eta_s" in text
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = read_csv(tmp_path / "a.csv")
    # one deim row plus two block methods at two block sizes
    assert len(rows) == 5
    assert all(float(r["eta_s"]) >= 1 for r in rows)


def test_eta_study_block_one_equals_deim():
    recs = bench.eta_study(50, 6, 3, [1], seed=2)
    for t in range(3):
        vals = {r.method: r.eta_s for r in recs if r.trial == t}
        assert vals["block_rrqr"] == vals["deim"] == vals["block_maxvol"]


# plotdata

@pytest.fixture
def results_csv(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("method,k,b,trial,rel_error,error\n"
                 "deim,10,,0,0.5,\n"
                 "deim,10,,1,0.7,\n"
                 "deim,5,,0,0.9,\n"
                 "block_rrqr,5,2,0,0.8,\n"
                 "block_rrqr,5,2,1,nan,\n"
                 "block_rrqr,10,2,0,0.1,SingularityError: boom\n")
    return p


def test_plotdata_groups_and_means(results_csv, tmp_path):
    code, text = run(["plotdata", "--input", str(results_csv), "--out", str(tmp_path / "plots")])
    assert code == 0
    deim = (tmp_path / "plots" / "method=deim.dat").read_text().splitlines()
    assert deim[0].startswith("#")
    assert [tuple(map(float, ln.split())) for ln in deim[1:]] == [(5.0, 0.9), (10.0, 0.6)]
    blk = (tmp_path / "plots" / "method=block_rrqr.dat").read_text().splitlines()
    assert [tuple(map(float, ln.split())) for ln in blk[1:]] == [(5.0, 0.8)]


def test_plotdata_group_by_block(results_csv, tmp_path):
    written = bench.plotdata(results_csv, "k", "rel_error", "b", tmp_path / "p")
    assert set(written) == {"", "2"}
    assert written[""].name == "b=blank.dat"


def test_plotdata_unknown_field(results_csv, tmp_path):
    code, _ = run(["plotdata", "--input", str(results_csv), "--y", "volume", "--out", str(tmp_path / "p")])
    assert code == 2
