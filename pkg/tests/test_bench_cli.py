import csv
import io
import json
import math
import subprocess
import sys

import pytest
from statsmodels.stats.proportion import proportion_confint

from qnash import bench
from qnash.cli import main
from qnash.instances import InstanceSpec, gen_gap_instance, gen_identity_perturbed, generate
from qnash.lifted import find_unique_nash
from qnash.oracle import OracleHandle, QueryLedger, write_matrix
from qnash.psne import find_psne

from conftest import F, mat


def run_cli(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    paths["gap8"] = tmp_path / "gap8.txt"
    write_matrix(paths["gap8"], gen_gap_instance(8, F("1/4"))[0])
    paths["ip3"] = tmp_path / "ip3.txt"
    write_matrix(paths["ip3"], gen_identity_perturbed(3, 0, 1)[0])
    paths["pennies"] = tmp_path / "pennies.txt"
    write_matrix(paths["pennies"], mat([[1, -1], [-1, 1]]))
    paths["flat"] = tmp_path / "flat.txt"
    write_matrix(paths["flat"], mat([[1, 1], [1, 1]]))
    paths["wide"] = tmp_path / "wide.txt"
    write_matrix(paths["wide"], mat([[1, 2, 3]]))
    paths["bad"] = tmp_path / "bad.txt"
    paths["bad"].write_text("2 2\n1 x\n3 4\n")
    paths["dir"] = tmp_path
    return paths


# -- statistics ----------------------------------------------------------------


@pytest.mark.parametrize("k,n", [(0, 10), (10, 10), (7, 20), (950, 1000), (1, 3)])
def test_wilson_matches_statsmodels(k, n):
    low, high = bench.wilson_interval(k, n)
    ref = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert low == pytest.approx(ref[0], abs=1e-12)
    assert high == pytest.approx(ref[1], abs=1e-12)


@pytest.mark.parametrize(
    "algo,n,delta,bound",
    [
        ("swordfish", 8, 0.1, 22),
        ("swordfish", 64, 0.1, 190),
        ("psne", 64, 0.1, 8 * 64 * math.log2(4 * 64**2 / 0.1)),
        ("nash", 16, 0.1, 256),
    ],
)
def test_bounds(algo, n, delta, bound):
    assert bench.bound_for(algo, n, delta) == bound


# -- trials and batches ----------------------------------------------------------


@pytest.mark.parametrize(
    "family,algo,n,k",
    [
        ("planted_psne", "psne", 24, 1),
        ("planted_psne", "swordfish", 24, 1),
        ("planted_support", "nash", 7, 2),
        ("identity_perturbed", "brute", 5, 1),
    ],
)
def test_trial_queries_replay(family, algo, n, k):
    rec = bench.run_trial(family, n, k, 0.1, 5, algo)
    assert rec.success
    inst_rng, algo_rng = bench.trial_rngs(5)
    M, _ = generate(InstanceSpec(family, n, k=k, seed=5), inst_rng)
    o = OracleHandle(M)
    if algo == "psne":
        find_psne(o, 0.1, algo_rng)
    elif algo == "nash":
        find_unique_nash(o, 0.1, algo_rng, support_size=k)
    elif algo == "swordfish":
        bench.swordfish(o)
    else:
        o.query_block(range(n), range(n))
    replay = QueryLedger()
    for i, j in o.ledger.sequence():
        replay.record(i, j)
    assert rec.queries == o.distinct_query_count() == replay.distinct_count


def test_batch_is_reproducible_and_schedule_independent():
    args = ("planted_psne", [6, 9], 1, 0.1, 12, 100, "psne")
    serial = bench.run_batch(*args).to_csv()
    assert serial == bench.run_batch(*args).to_csv()
    assert serial == bench.run_batch(*args, workers=2).to_csv()


def test_csv_layout():
    report = bench.run_batch("planted_psne", [5], 1, 0.1, 3, 7, "swordfish")
    rows = list(csv.reader(io.StringIO(report.to_csv())))
    assert tuple(rows[0]) == bench.CSV_COLUMNS
    assert [r[3] for r in rows[1:]] == ["7", "8", "9", "all"]
    assert rows[-1][5] == "1"
    assert all(r[7] == "0" for r in rows[1:])
    assert report.bound_violations == 0


def test_summary_fields():
    (row,) = bench.run_batch("gap", [8], 1, 0.05, 20, 0, "psne").summary()
    assert row["success_rate"] == 1.0
    assert row["wilson_low"] > 0.8
    assert row["max_queries"] <= row["bound"]


# -- plot data --------------------------------------------------------------------


def test_plotdata_bounds():
    text = bench.run_batch("planted_psne", [4, 8], 1, 0.1, 5, 0, "swordfish").to_csv()
    text += bench.run_batch("planted_psne", [8], 1, 0.1, 5, 0, "psne").to_csv().split("\n", 1)[1]
    rows = [line.split("\t") for line in bench.plot_series(text).splitlines()]
    assert tuple(rows[0]) == bench.PLOT_COLUMNS
    by_key = {(r[0], r[1], int(r[2])): r for r in rows[1:]}
    assert float(by_key[("planted_psne", "swordfish", 4)][5]) == 10
    assert float(by_key[("planted_psne", "swordfish", 8)][5]) == 22
    assert float(by_key[("planted_psne", "psne", 8)][5]) == 8 * 8 * math.log2(4 * 64 / 0.1)


def test_plotdata_empty_and_bad_schema(tmp_path):
    empty, out = tmp_path / "empty.csv", tmp_path / "out.tsv"
    empty.write_text("")
    assert run_cli("plotdata", "--in", empty, "--out", out)[0] == 0
    assert out.read_text() == "\t".join(bench.PLOT_COLUMNS) + "\n"
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run_cli("plotdata", "--in", bad, "--out", out)[0] == 4


# -- command line ---------------------------------------------------------------------


def test_solve_gap_with_swordfish(files):
    code, out = run_cli("solve", "--matrix", files["gap8"], "--algo", "swordfish")
    assert code == 0
    assert out.splitlines()[0] == "(1,1)"
    search = int(out.split("queries: ")[1].split()[0])
    assert search <= 22


def test_solve_identity_perturbed_with_nash(files):
    code, out = run_cli("solve", "--matrix", files["ip3"], "--algo", "nash", "--delta", 0.1, "--seed", 1)
    assert code == 0
    doc = json.loads(out[: out.rindex("}") + 1])
    assert doc["value"] == "2/5"
    assert doc["row_strategy"] == ["2/5", "1/5", "2/5"]
    assert doc["col_strategy"] == ["1/5", "2/5", "2/5"]
    assert doc["verified"] is True


@pytest.mark.parametrize("algo", ["swordfish", "psne"])
def test_solve_matching_pennies_fails(files, algo, capsys):
    code, _ = run_cli("solve", "--matrix", files["pennies"], "--algo", algo)
    assert code != 0
    assert "no unique PSNE certified" in capsys.readouterr().err


def test_exit_codes(files):
    assert run_cli("solve", "--matrix", files["flat"], "--algo", "brute")[0] == 3
    assert run_cli("solve", "--matrix", files["ip3"], "--algo", "nash", "--support-size", 1)[0] == 2
    assert run_cli("solve", "--matrix", files["bad"], "--algo", "brute")[0] == 4
    assert run_cli("solve", "--matrix", files["dir"] / "missing.txt", "--algo", "brute")[0] == 4
    assert run_cli("solve", "--matrix", files["wide"], "--algo", "swordfish")[0] == 4
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--matrix", str(files["ip3"]), "--algo", "simplex"])
    assert exc.value.code == 4


def test_float_mode_solve(files):
    code, out = run_cli("solve", "--matrix", files["ip3"], "--algo", "brute", "--mode", "float")
    assert code == 0
    assert float(json.loads(out[: out.rindex("}") + 1])["value"]) == pytest.approx(0.4)


def test_gen_writes_matrix_and_truth(files):
    out = files["dir"] / "tl.txt"
    code, _ = run_cli("gen", "--family", "thm1_lower", "--n", 4, "--k", 2, "--row", 3, "--col", 1, "--seed", 0, "--out", out)
    assert code == 0
    assert out.read_text().splitlines()[3] == "2 0 3 3"
    truth = json.loads((files["dir"] / "tl.txt.truth.json").read_text())
    assert truth["equilibrium"]["row_strategy"] == ["0", "2/3", "1/3", "0"]
    assert truth["equilibrium"]["row_support"] == [2, 3]


def test_gen_gap_flag(files):
    out = files["dir"] / "g.txt"
    assert run_cli("gen", "--family", "gap", "--n", 3, "--delta-gap", "1/8", "--seed", 0, "--out", out)[0] == 0
    assert out.read_text().splitlines()[1] == "1 9/8 9/8"


def test_bench_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["bench", "--family", "planted_psne", "--n", "4,8", "--trials", 5, "--delta", 0.1, "--seed0", 3]
    assert run_cli(*argv, "--out", a)[0] == 0
    assert run_cli(*argv, "--out", b, "--workers", 2)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_bench_psne_example(tmp_path):
    out = tmp_path / "psne.csv"
    code, text = run_cli(
        "bench", "--family", "planted_psne", "--n", 64, "--trials", 200, "--delta", 0.1,
        "--seed0", 0, "--mode", "float", "--out", out,
    )
    assert code == 0
    rows = [r for r in csv.DictReader(out.open()) if r["seed"] != "all"]
    assert sum(int(r["success"]) for r in rows) / len(rows) >= 0.9
    assert max(int(r["queries"]) for r in rows) <= 8 * 64 * math.log2(4 * 64**2 / 0.1)


def test_bench_swordfish_example(tmp_path):
    out = tmp_path / "sw.csv"
    code, _ = run_cli(
        "bench", "--family", "planted_psne", "--algo", "swordfish", "--n", "8,16,32,64",
        "--trials", 1000, "--delta", 0.1, "--seed0", 0, "--mode", "float", "--out", out,
    )
    assert code == 0
    for r in csv.DictReader(out.open()):
        if r["seed"] == "all":
            assert int(r["queries"]) <= 3 * int(r["n"]) - 2


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "qnash", "solve", "--matrix", str(files["pennies"]), "--algo", "swordfish"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "no unique PSNE certified" in proc.stderr
