import json
import subprocess
import sys

import pytest

from umoead.cli import main


def test_oracle_dtlz1(capsys):
    assert main(["oracle", "--problem", "dtlz1", "--lambda", "0.2,0.3,0.5"]) == 0
    assert capsys.readouterr().out.split() == ["0.1", "0.15", "0.25"]


def test_oracle_numeric_fallback(capsys):
    assert main(["oracle", "--problem", "zdt4", "--lambda", "0.5,0.5"]) == 0
    values = [float(v) for v in capsys.readouterr().out.split()]
    assert values[0] == pytest.approx((3 - 5**0.5) / 2, abs=1e-9)


@pytest.mark.parametrize(
    "args",
    [
        ["oracle", "--problem", "zdt1", "--lambda", "0.3,0.3"],
        ["oracle", "--problem", "zdt1", "--lambda", "1,0"],
        ["oracle", "--problem", "zdt1", "--lambda", "0.5,0.25,0.25"],
        ["oracle", "--problem", "zdt9", "--lambda", "0.5,0.5"],
        ["oracle", "--problem", "zdt1", "--lambda", "a,b"],
    ],
)
def test_oracle_bad_input(args, capsys):
    assert main(args) == 2
    assert capsys.readouterr().err


def test_unknown_subcommand_and_flag(capsys):
    assert main(["bogus"]) == 2
    assert main(["run", "--frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_run_missing_config():
    assert main(["run", "--config", "/nonexistent/run.json"]) == 2


def test_metrics_two_points(tmp_path, capsys):
    path = tmp_path / "y.csv"
    path.write_text("0,1\n1,0\n")
    assert main(["metrics", "--input", str(path), "--ref", "2,2"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["hv"] == 3.0
    assert record["K"] == 50.0


def test_metrics_dimension_mismatch(tmp_path):
    path = tmp_path / "y.csv"
    path.write_text("0,1\n1,0\n")
    assert main(["metrics", "--input", str(path), "--ref", "2,2,2"]) == 2


def test_metrics_missing_file(tmp_path):
    assert main(["metrics", "--input", str(tmp_path / "none.csv"), "--ref", "2,2"]) == 1


def test_run_with_overrides(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "problem": "zdt2", "n_var": 5, "K_outer": 1, "N_inner": 2,
        "pfl": {"hidden": [4], "epochs": 5}, "adjust": {"steps": 5},
    }))
    out = tmp_path / "out"
    code = main(["run", "--config", str(config), "--problem", "zdt1", "--n", "6", "--seed", "3", "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["out"] == str(out)
    echoed = json.loads((out / "config.json").read_text())
    assert (echoed["problem"], echoed["N"], echoed["seed"], echoed["n_var"]) == ("zdt1", 6, 3, 5)
    assert len((out / "objectives.csv").read_text().splitlines()) == 7

    # the exported objectives feed straight back into the metrics command
    assert main(["metrics", "--input", str(out / "objectives.csv"), "--ref", "1.1,1.1"]) == 0
    assert json.loads(capsys.readouterr().out)["hv"] == summary["hv"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "umoead", "oracle", "--problem", "zdt1", "--lambda", "0.5,0.5"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert float(proc.stdout.split()[0]) == pytest.approx(0.381966, abs=1e-6)
