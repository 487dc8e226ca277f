import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from prepivot.cli import main
from prepivot.harness.runner import read_rejection_csv

MC_FLAGS = ["--model", "ma", "--n", "30", "--reps", "16", "--b1", "49", "--b2", "19"]


def rows_of(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def header_of(text):
    return dict(line[2:].split("=", 1) for line in text.splitlines() if line.startswith("# "))


@pytest.fixture
def ridge_file(tmp_path):
    rng = np.random.default_rng(9)
    X = rng.standard_normal((120, 2))
    y = X @ [0.2, 0.1] + rng.standard_normal(120)
    path = tmp_path / "d.txt"
    np.savetxt(path, np.column_stack((y, X)))
    return path


def test_mc_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["mc", *MC_FLAGS, "--seed", "42", "--out", str(a)]) == 0
    assert main(["mc", *MC_FLAGS, "--seed", "42", "--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    table = read_rejection_csv(a)
    assert len(table.rows) == 6
    assert table.header["seed"] == "42" and table.header["B1"] == "49"
    # every resolved default is echoed
    assert {"tie_rule", "levels", "rate", "reduce_draws"} <= set(table.header)


def test_design_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("model = ma\nn = 30\nreps = 4\nB1 = 19\nB2 = 9\nseed = 3\n")
    assert main(["mc", "--design", str(cfg), "--reps", "6", "--workers", "1"]) == 0
    out = capsys.readouterr().out
    head = header_of(out)
    assert head["reps"] == "6" and head["seed"] == "3"
    assert {r["reps"] for r in rows_of(out)} == {"6"}


def test_environment_seed(monkeypatch, capsys, tmp_path):
    monkeypatch.setenv("PREPIVOT_SEED", "77")
    assert main(["mc", *MC_FLAGS, "--reps", "3", "--workers", "1"]) == 0
    assert header_of(capsys.readouterr().out)["seed"] == "77"
    assert main(["mc", *MC_FLAGS, "--reps", "3", "--workers", "1", "--seed", "5"]) == 0
    assert header_of(capsys.readouterr().out)["seed"] == "5"


def test_pretty_percentages(capsys):
    assert main(["mc", *MC_FLAGS, "--reps", "5", "--workers", "1", "--pretty"]) == 0
    for row in rows_of(capsys.readouterr().out):
        whole, _, frac = row["reject_freq"].partition(".")
        assert len(frac) == 1 and 0 <= float(row["reject_freq"]) <= 100


def test_grid_design(capsys):
    assert main(["mc", *MC_FLAGS, "--reps", "3", "--workers", "1", "--dist", "normal,t3", "--levels", "0.05"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert [r["dist"] for r in rows] == ["normal"] * 3 + ["t3"] * 3


def test_infer_ridge(ridge_file, capsys):
    argv = ["infer", "--model", "ridge", "--data", str(ridge_file), "--cn", "50", "--g", "1,0", "--r", "0",
            "--b1", "999", "--b2", "299"]
    assert main(argv) == 0
    out = capsys.readouterr().out
    (row,) = rows_of(out)
    for key in ("pHat", "pTildePlugin", "pTildeDouble"):
        assert 0.0 <= float(row[key]) <= 1.0
        assert len(row[key].split(".")[1]) == 6
    assert row["B1"] == "999" and row["B2"] == "299"
    assert int(row["innerDraws"]) == 999 * 299
    assert float(row["mHat"]) >= 1.0
    head = header_of(out)
    assert head["c_n"] == "50.0" and head["methods"] == "standard,plugin,double"
    assert main(argv) == 0
    assert capsys.readouterr().out == out


def test_standard_only_skips_second_level(ridge_file, capsys):
    assert main(["infer", "--model", "ridge", "--data", str(ridge_file), "--g", "1,1", "--methods", "standard"]) == 0
    (row,) = rows_of(capsys.readouterr().out)
    assert row["innerDraws"] == "0" and row["B2"] == "0"
    assert "pTildeDouble" not in row


@pytest.mark.parametrize("model,cols", [("ma", 3), ("np", 1), ("heavy", 1)])
def test_infer_other_models(model, cols, tmp_path, capsys):
    rng = np.random.default_rng(1)
    path = tmp_path / "m.txt"
    np.savetxt(path, rng.standard_normal((200, cols)))
    assert main(["infer", "--model", model, "--data", str(path), "--b1", "99", "--b2", "49",
                 "--methods", "standard,plugin,double,bias-removed", "--ci", "0.1"]) == 0
    (row,) = rows_of(capsys.readouterr().out)
    nums = {k: float(v) for k, v in row.items()}
    assert all(math.isfinite(v) for v in nums.values())
    assert 0.0 <= nums["pBiasRemoved"] <= 1.0


def test_kernel_constants(capsys):
    assert main(["kernel-constants", "--kernel", "epanechnikov", "--route", "both"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert len(rows) == 2
    for row in rows:
        assert float(row["R_K"]) == pytest.approx(0.6, abs=1e-8)
        assert float(row["kappa2"]) == pytest.approx(0.2, abs=1e-8)
    assert float(rows[0]["m2"]) == pytest.approx(float(rows[1]["m2"]), abs=1e-6)


def test_stable_table(capsys):
    assert main(["stable-table", "--alpha", "2", "--u", "0,1", "--p", "0.5"]) == 0
    rows = rows_of(capsys.readouterr().out)
    cdf = {r["argument"]: float(r["value"]) for r in rows if r["function"] == "cdf"}
    assert cdf["0"] == pytest.approx(0.5, abs=1e-6)
    assert cdf["1"] == pytest.approx(0.760250, abs=1e-6)
    (q,) = [r for r in rows if r["function"] == "quantile"]
    assert float(q["value"]) == pytest.approx(0.0, abs=1e-8)


def test_uniformity_and_power(tmp_path, capsys):
    pv = tmp_path / "p.csv"
    assert main(["uniformity", *MC_FLAGS, "--workers", "1", "--pvalues-out", str(pv)]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert [r["method"] for r in rows] == ["standard", "plugin", "double"]
    assert len(rows_of(pv.read_text())) == 16
    assert main(["power", *MC_FLAGS, "--workers", "1", "--grid", "0,-2", "--levels", "0.05"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert {r["a"] for r in rows} == {"0", "-2"}
    assert all(math.isfinite(float(r["overlay"])) for r in rows)


@pytest.mark.parametrize(
    "argv",
    [
        ["mc", "--bogus"],
        ["frobnicate"],
        [],
        ["mc", "--model", "ma", "--reps", "0"],
        ["mc", "--design", "/nonexistent/file.cfg"],
        ["mc", "--model", "ma", "--workers", "0"],
        ["infer", "--model", "ridge", "--data", "/nonexistent.txt"],
        ["power", "--model", "ma"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert "prepivot" in capsys.readouterr().err


def test_model_failure_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    x = np.arange(40.0)
    np.savetxt(path, np.column_stack((x, x, 2 * x)))
    assert main(["infer", "--model", "ridge", "--data", str(path), "--g", "1,0"]) == 2
    assert "RankError" in capsys.readouterr().err


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "prepivot.cli", "kernel-constants", "--kernel", "triangular"],
                         capture_output=True, text=True, check=True).stdout
    assert rows_of(out)[0]["kernel"] == "triangular"
