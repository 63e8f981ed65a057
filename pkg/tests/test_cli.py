import csv
import json
import math

import numpy as np
import pytest

from metabic import __version__
from metabic.cli import main
from metabic.greens import lateral_zz_profile

CONFIGS = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


def _run(tmp_path, command, ini=None, extra=()):
    args = [command, "--out", str(tmp_path / "out")]
    if ini is not None:
        cfg = tmp_path / "run.ini"
        cfg.write_text(ini)
        args += ["--config", str(cfg)]
    return main(args + list(extra))


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_free_space_rates_csv(tmp_path):
    ini = "[emitters]\np = 1e-29\nlambda0_nm = 552\n[scan]\nd_min_lambda = 0.1\nd_max_lambda = 5\nn = 50\n"
    assert _run(tmp_path, "rates", ini) == 0
    rows = _rows(tmp_path / "out" / "rates.csv")
    assert len(rows) == 50
    th = 2 * math.pi * np.array([float(r["d_over_lambda"]) for r in rows])
    g = np.array([float(r["gamma12_over_gamma0"]) for r in rows])
    assert np.allclose(g, lateral_zz_profile(th), atol=1e-12)


def test_missing_field_named(tmp_path, capsys):
    assert _run(tmp_path, "rates", "[emitters]\nlambda0_nm = 552\n") == 2
    assert "emitters.p" in capsys.readouterr().err


def test_bad_value_is_config_error(tmp_path, capsys):
    assert _run(tmp_path, "cdos-model", "[mode]\npreset = md_finite\n[scan]\nn = one\n") == 2
    assert "scan.n" in capsys.readouterr().err
    ini = "[mode]\nlambda_bic_nm=700\na_nm=400\npurcell=10\nbeta=1.5\nk_res_per_um=0.1\nc_n=1\n"
    assert _run(tmp_path, "cdos-model", ini) == 2


def test_table1_round_trip(tmp_path):
    assert _run(tmp_path, "rates", "[rates]\ntable1 = MD\n") == 0
    row = _rows(tmp_path / "out" / "rates.csv")[0]
    assert [float(row[k]) for k in ("gamma11", "gamma22", "gamma12", "omega12")] == [13.7, 8.8, 7.9, -0.2]


def test_lattice_coeffs_ed_and_md(tmp_path):
    assert _run(tmp_path, "lattice-coeffs", (CONFIGS / "lattice_ed.ini").read_text()) == 0
    text = (tmp_path / "out" / "lattice_coeffs.csv").read_text()
    assert "# truncation_delta" in text
    c = [float(r["c_n"]) for r in _rows(tmp_path / "out" / "lattice_coeffs.csv")]
    for got, want in zip(c, (0.273, 0.516, 0.160, 0.048)):
        assert got == pytest.approx(want, rel=0.05)
    assert _run(tmp_path, "lattice-coeffs", (CONFIGS / "lattice_md.ini").read_text()) == 0
    assert len(_rows(tmp_path / "out" / "lattice_coeffs.csv")) == 65


@pytest.mark.parametrize("row, c_target, t_target", [("MD", 0.25, 0.10), ("ED", 0.13, 0.02)])
def test_simulate_table1(tmp_path, row, c_target, t_target):
    ini = f"[rates]\ntable1 = {row}\n[simulation]\nt_end = 0.5\nn_steps = 2000\n"
    assert _run(tmp_path, "simulate", ini) == 0
    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["c_max"] == pytest.approx(c_target, abs=0.03)
    assert summary["t_max"] == pytest.approx(t_target, abs=0.03)
    assert summary["_meta"]["config"]["rates.table1"] == row
    assert len(_rows(out / "trajectory.csv")) == 2001
    assert len(_rows(out / "concurrence.csv")) == 2001


def test_simulate_zero_rates(tmp_path):
    ini = "[rates]\ngamma11 = 0\ngamma22 = 0\ngamma12 = 0\nomega12 = 0\n[simulation]\nn_steps = 10\n"
    assert _run(tmp_path, "simulate", ini) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["c_max"] == 0.0


def test_simulate_from_model(tmp_path):
    assert _run(tmp_path, "simulate", (CONFIGS / "simulate_model_md.ini").read_text()) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["beta_bar"] == pytest.approx(0.578, abs=0.01)


def test_sweep_periodic_mode(tmp_path):
    ini = (
        "[mode]\nlambda_bic_nm=708.9\na_nm=400\npurcell=13.7\nbeta=0.8\nk_res_per_um=0\n"
        "c_n=0.6,0.4\nkind=MD\n[scan]\nd_min_a=1\nd_max_a=10\nn=10\n"
    )
    assert _run(tmp_path, "sweep", ini) == 0
    c = [float(r["c_max"]) for r in _rows(tmp_path / "out" / "sweep.csv")]
    assert max(c) - min(c) < 1e-12


def test_sweep_flags_negative_beta(tmp_path, ed_mode):
    assert _run(tmp_path, "sweep", "[mode]\npreset = ed_finite\n[scan]\nd_min_a=5\nd_max_a=20\nn=301\n") == 0
    rows = _rows(tmp_path / "out" / "sweep.csv")
    neg = [r for r in rows if float(r["beta_bar"]) <= 0]
    assert neg and all(r["flag"] == "beta_bar_nonpositive" and float(r["c_max"]) == 0 for r in neg)


def test_fit_bundled_dataset(tmp_path):
    assert _run(tmp_path, "fit", (CONFIGS / "fit_md.ini").read_text()) == 0
    doc = json.loads((tmp_path / "out" / "fit.json").read_text())
    assert doc["converged"]
    assert doc["params"]["beta"] == pytest.approx(0.8179, rel=0.02)


def test_fit_synthetic_uses_seed(tmp_path):
    ini = "[fit]\nsynthetic = ed_finite\nnoise = 0.01\n[mode]\npreset = ed_finite\n[scan]\nd_min_a=5\nd_max_a=50\nn=300\n"
    assert _run(tmp_path, "fit", ini, ["--seed", "5"]) == 0
    a = (tmp_path / "out" / "fit.json").read_text()
    assert _run(tmp_path, "fit", ini, ["--seed", "6"]) == 0
    b = (tmp_path / "out" / "fit.json").read_text()
    assert a != b
    assert json.loads(a)["params"]["beta"] == pytest.approx(0.448, rel=0.02)


def test_fit_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n2,x\n")
    assert _run(tmp_path, "fit", f"[fit]\ndata = {bad}\n") == 4
    assert "line 2" in capsys.readouterr().err


def test_validity_ed(tmp_path):
    assert _run(tmp_path, "validity", (CONFIGS / "validity_ed.ini").read_text()) == 0
    doc = json.loads((tmp_path / "out" / "validity.json").read_text())
    assert doc["regime"] == "weak"
    assert doc["p_max"] == pytest.approx(90e-29, rel=0.15)


def test_json_format(tmp_path):
    assert _run(tmp_path, "cdos-model", "[scan]\nn = 5\n", ["--format", "json"]) == 0
    doc = json.loads((tmp_path / "out" / "cdos.json").read_text())
    assert len(doc["rows"]) == 5 and doc["_meta"]["version"] == __version__


def test_outputs_deterministic_and_headed(tmp_path):
    ini = (CONFIGS / "sweep_ed.ini").read_text()
    assert _run(tmp_path, "sweep", ini) == 0
    first = (tmp_path / "out" / "sweep.csv").read_bytes()
    assert _run(tmp_path, "sweep", ini) == 0
    assert (tmp_path / "out" / "sweep.csv").read_bytes() == first
    head = first.decode().splitlines()[:8]
    assert head[0] == f"# metabic {__version__}"
    assert any("config: mode.preset = ed_finite" in h for h in head + first.decode().splitlines()[8:20])


def test_numerical_failure_exit_code(tmp_path):
    ini = "[lattice]\nkind = ED\nz_nm = 0.001\n"
    assert _run(tmp_path, "lattice-coeffs", ini) == 3


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["validity", "--out", str(blocker / "sub")]) == 4


def test_all_bundled_configs_run(tmp_path):
    for ini in sorted(CONFIGS.glob("*.ini")):
        command = {
            "free": "rates", "table1": "rates", "lattice": "lattice-coeffs", "cdos": "cdos-model",
            "simulate": "simulate", "sweep": "sweep", "fit": "fit", "validity": "validity",
        }[ini.stem.split("_")[0]]
        assert main([command, "--config", str(ini), "--out", str(tmp_path / ini.stem)]) == 0, ini.name
