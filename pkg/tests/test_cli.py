import json
import subprocess
import sys

import pytest

from qclmc.bench import read_csv
from qclmc.cli import main
from qclmc.config import read_kv


def test_discrepancy(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["discrepancy", "--kind", "grid", "--m-list", "4", "8", "--r", "1.0", "--runs", "1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["M"] for r in rows] == [4, 8]
    assert rows[0]["f_discrepancy"] == pytest.approx(1 / 8)
    assert "slope" in capsys.readouterr().out


def test_pde_demo(tmp_path):
    assert main(["pde-demo", "--steps", "3", "--R", "8", "--n-q", "40", "--grid", "11", "--out", str(tmp_path)]) == 0
    steps = read_csv(tmp_path / "steps.csv")
    assert [r["j"] for r in steps] == [0, 1, 2, 3]
    assert all(b["l_j"] > a["l_j"] for a, b in zip(steps, steps[1:]))
    assert len(read_csv(tmp_path / "coefficient.csv")) == 11


def test_estimate_json(tmp_path, capsys):
    assert main(["estimate", "--m", "16", "--seed", "3", "--per-sample"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["m"] == 16 and len(data["per_sample"]) == 16
    out = tmp_path / "e.json"
    assert main(["estimate", "--m", "16", "--seed", "3", "--per-sample", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["estimate"] == data["estimate"]


def test_estimate_with_params_file(tmp_path, capsys):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("c1 = 1.0\nalpha = 1.0\nc2 = 0.0\nbeta = 2.0\n")
    assert main(["estimate", "--method", "clmc", "--m", "8", "--r", "1.5", "--model-params", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["r"] == 1.5


def test_bounds(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bounds", "--m-list", "16", "32", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["method"] for r in rows] == ["clmc", "clmc", "qclmc", "qclmc"]
    assert rows[1]["mse_bound"] < rows[0]["mse_bound"]


def test_fit(tmp_path):
    out = tmp_path / "fit.cfg"
    assert main(["fit", "--m", "100", "--out", str(out)]) == 0
    p = read_kv(out)
    assert 1.5 < p["alpha"] < 2.2 and p["r"] > 0


def test_mse_study(tmp_path, capsys):
    cfg = tmp_path / "study.cfg"
    cfg.write_text('m_list = [16, 32]\nk_runs = 3\nseed = 1\n')
    assert main(["mse-study", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert len(read_csv(tmp_path / "o" / "mse_study.csv")) == 4
    assert (tmp_path / "o" / "mse_study.svg").exists()
    assert "quotient" in capsys.readouterr().out


def test_bound_study(tmp_path):
    assert main(["bound-study", "--m-list", "16", "32", "64", "--runs", "3", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "bound_study.csv")) == 6


def test_errors_exit_with_status_2(tmp_path, capsys):
    assert main(["bounds", "--params", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "x.csv")]) == 2
    assert capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qclmc.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "mse-study" in proc.stdout
