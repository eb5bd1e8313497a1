import csv
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from nlgpe import derive_effective, hes_analytic_1d
from nlgpe.cli import main
from nlgpe.config import REFERENCE
from nlgpe.closedform import phase_rate
from nlgpe.symmetry import displacement_params


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for k in list(os.environ):
        if k.startswith("NLGPE_"):
            monkeypatch.delenv(k)


def write_cfg(path, text):
    path.write_text(text)
    return str(path)


def run(tmp_path, workflow, text, name="out"):
    out = tmp_path / name
    cfg = write_cfg(tmp_path / f"{name}.cfg", text)
    code = main([workflow, "--config", cfg, "--out", str(out)])
    return code, out


def read_kv(path):
    return dict(line.split(" = ", 1) for line in path.read_text().splitlines())


def test_exact_file_count_contract(tmp_path):
    code, out = run(tmp_path, "exact", "task.nu = 0, 1, 2\ntask.alpha = 0\n")
    assert code == 0
    files = sorted(os.listdir(out))
    assert len([f for f in files if f.startswith("psi_")]) == 3
    assert len([f for f in files if f.startswith("density_")]) == 3
    assert "manifest.txt" in files and len(files) == 7
    man = read_kv(out / "manifest.txt")
    assert man["file.psi_nu2_a0_t0.csv"] == "nu=2 alpha=0+0i t=0"
    assert man["workflow"] == "exact" and "created" in man
    assert man["config.model.kappa"] == "0.20000000000000001"


def test_exact_is_deterministic(tmp_path):
    text = "task.nu = 1\ntask.alpha = 0.5+0.5i\ntask.times = 0, 1.5\n"
    _, a = run(tmp_path, "exact", text, "a")
    _, b = run(tmp_path, "exact", text, "b")
    names = sorted(f for f in os.listdir(a) if f != "manifest.txt")
    assert names == sorted(f for f in os.listdir(b) if f != "manifest.txt")
    for f in names:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_exact_density_peak_follows_orbit(tmp_path):
    code, out = run(tmp_path, "exact", "task.nu = 0\ntask.alpha = 0.5+0.5i\ntask.times = 0, 0.8, 2.1\n")
    assert code == 0
    eff = derive_effective(REFERENCE)
    _, C = displacement_params(0.5 + 0.5j, 0, eff, REFERENCE)
    for k, t in enumerate((0.0, 0.8, 2.1)):
        data = np.loadtxt(out / f"density_nu0_a0_t{k}.csv", delimiter=",", skiprows=1)
        x, dens = data[:, 0], data[:, 1]
        dx = x[1] - x[0]
        X = hes_analytic_1d(t, C, eff, REFERENCE).x
        assert abs(x[np.argmax(dens)] - X) <= dx / 2 + 1e-12
        assert np.sum(x * dens) * dx == pytest.approx(X, abs=1e-10)
        psi = np.loadtxt(out / f"psi_nu0_a0_t{k}.csv", delimiter=",", skiprows=1)
        assert np.allclose(psi[:, 1] ** 2 + psi[:, 2] ** 2, dens, rtol=1e-14, atol=1e-300)


def test_config_errors_exit_2(tmp_path, capsys):
    code, _ = run(tmp_path, "exact", "model.mu = 1\ntask.nu =\n")
    assert code == 2
    err = capsys.readouterr().err
    assert "out.cfg:2" in err and "task.nu" in err
    code, _ = run(tmp_path, "exact", "task.workflow = verify\n", "w")
    assert code == 2
    assert "subcommand" in capsys.readouterr().err


def test_regime_error_exit_3(tmp_path, capsys):
    code, out = run(tmp_path, "exact", "model.sigma = -1\n")
    assert code == 3
    assert "regime error" in capsys.readouterr().err
    assert not (out / "manifest.txt").exists()


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("NLGPE_TASK__NU", "4")
    code, out = run(tmp_path, "exact", "task.nu = 0\n")
    assert code == 0
    assert os.path.exists(out / "psi_nu4_a0_t0.csv")


def test_evolve_outputs(tmp_path):
    eff = derive_effective(REFERENCE)
    T = 2 * math.pi / eff.omega
    code, out = run(tmp_path, "evolve",
                    f"task.alpha = 0.3-0.2i\nevolve.t_final = {T / 4!r}\nevolve.dt = {T / 1000!r}\n"
                    "evolve.record_every = 125\n")
    assert code == 0
    snaps = sorted(f for f in os.listdir(out) if "_snap" in f)
    assert len(snaps) == 3
    rep = read_kv(out / "evolve_nu0_a0_report.txt")
    assert float(rep["norm_drift"]) < 1e-10
    assert max(float(v) for k, v in rep.items() if k.startswith("moment_error")) < 1e-6
    rows = (out / "evolve_nu0_a0_moments.csv").read_text().splitlines()
    assert rows[0] == "t,p,x,d11,d12,d22,norm_sq" and len(rows) == 4


def test_evolve_guard_is_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, "evolve", "evolve.dt = 1.0\nevolve.t_final = 1.0\n")
    assert code == 2
    assert "evolve.dt" in capsys.readouterr().err


def test_verify_subset_passes(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "verify.criteria = 1, 4, 5\n")
    assert code == 0
    lines = (out / "verify_report.txt").read_text().splitlines()
    assert len(lines) == 4 and all(l.startswith("PASS [c") for l in lines)
    assert read_kv(out / "manifest.txt")["passed"] == "true"
    assert "verify: all checks passed" in capsys.readouterr().out


def test_verify_report_is_deterministic(tmp_path):
    _, a = run(tmp_path, "verify", "verify.criteria = 4, 6\n", "a")
    _, b = run(tmp_path, "verify", "verify.criteria = 4, 6\n", "b")
    assert (a / "verify_report.txt").read_bytes() == (b / "verify_report.txt").read_bytes()


def test_verify_negative_control_fails(tmp_path):
    # the reference moments use kappa = 0.25 while the state evolves with 0.2
    code, out = run(tmp_path, "verify", "verify.criteria = 10\nverify.oracle_kappa = 0.25\n")
    assert code == 1
    text = (out / "verify_report.txt").read_text()
    assert "FAIL [c10_moment_error]" in text


def test_sweep_rows(tmp_path):
    code, out = run(tmp_path, "sweep",
                    "sweep.key = model.kappa\nsweep.values = 0, 0.1, 0.2\nverify.criteria = 1, 4\n")
    assert code == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["model.kappa"] for r in rows] == ["0", "0.10000000000000001", "0.20000000000000001"]
    rates = [float(r["phase_rate_nu0"]) for r in rows]
    assert rates == sorted(rates) and rates[0] < rates[-1]
    for r, k in zip(rows, (0.0, 0.1, 0.2)):
        m = REFERENCE.replace(kappa=k)
        assert float(r["phase_rate_nu0"]) == phase_rate(0, derive_effective(m), m)
        assert r["status"] == "ok" and r["passed"] == "true"


def test_sweep_crossing_regime_boundary(tmp_path):
    code, out = run(tmp_path, "sweep",
                    "sweep.key = model.sigma\nsweep.values = 1.2, -1, 0.8\nverify.criteria = 4\n")
    assert code == 1
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["status"] for r in rows] == ["ok", "non_oscillatory", "ok"]
    assert rows[1]["message"] and rows[1]["omega"] == ""


def test_sweep_parallel_matches_serial(tmp_path):
    text = "sweep.values = 0.05, 0.15, 0.25\nverify.criteria = 1\n"
    _, a = run(tmp_path, "sweep", text, "a")
    out_b = tmp_path / "b"
    main(["sweep", "--config", str(tmp_path / "a.cfg"), "--out", str(out_b), "--workers", "2"])
    assert (a / "sweep.csv").read_bytes() == (out_b / "sweep.csv").read_bytes()


def test_single_point_sweep_matches_verify(tmp_path):
    _, sw = run(tmp_path, "sweep", "sweep.values = 0.2\nverify.criteria = 4, 6\n", "s")
    _, vf = run(tmp_path, "verify", "verify.criteria = 4, 6\n", "v")
    with open(sw / "sweep.csv") as fh:
        row = next(csv.DictReader(fh))
    for line in (vf / "verify_report.txt").read_text().splitlines():
        key = line.split("[", 1)[1].split("]", 1)[0]
        value = line.split(": ", 1)[1].split(" ", 1)[0]
        assert float(row[key]) == float(value)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nlgpe", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("nlgpe ")
