import json
import subprocess
import sys

import pytest

from ringsqueeze.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main


def test_analytic_xi(capsys):
    assert main(["analytic", "xi", "--r", "1", "--n-seed", "10"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["xi"] == pytest.approx(0.37130, abs=1e-5)


def test_analytic_frequencies(capsys):
    assert main(["analytic", "frequencies", "--winding", "2", "--modes", "16"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["common_period"] == pytest.approx(1.5707963, rel=1e-7)


def test_infeasible_is_runtime_error(capsys):
    assert main(["analytic", "optimal-r", "--n-total", "10", "--n-seed", "6"]) == EXIT_RUNTIME
    assert "error" in capsys.readouterr().err


def test_validate(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text("n_traj = 100\n")
    assert main(["validate", "--config", str(good)]) == EXIT_OK
    assert "config_hash=" in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("warp_factor = 9\n")
    assert main(["validate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["validate", "--config", str(tmp_path / "none.cfg")]) == EXIT_CONFIG


def test_run_writes_csv(tmp_path):
    out = tmp_path / "fig4.csv"
    assert main(["run", "fig4_xi_curve", "--out", str(out), "--threads", "1"]) == EXIT_OK
    assert out.read_text().startswith("# experiment: fig4_xi_curve")


def test_run_override_rejected(capsys):
    assert main(["run", "fig4_xi_curve", "--traj", "1"]) == EXIT_CONFIG


def test_run_unwritable_output(tmp_path):
    target = tmp_path / "missing" / "x.csv"
    assert main(["run", "fig4_xi_curve", "--out", str(target)]) == EXIT_RUNTIME


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "ringsqueeze.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
