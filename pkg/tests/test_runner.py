import json
import subprocess
import sys

import numpy as np
import pytest

from dicke_qb.errors import InvalidParameterError
from dicke_qb.runner.cli import main
from dicke_qb.runner.config import ExperimentConfig, load_config
from dicke_qb.runner.experiments import coupling_points, ground_scans, run_sweep_coupling
from dicke_qb.runner.io import SCHEMA, read_columns, read_csv


def _small(tmp_path, **kw):
    base = dict(N=1, t_end=2.0, samples=21, out=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_file_and_overrides(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"mode": "sweep-n", "t-end": 5, "nmax": "auto", "g12": 0.5, "N_range": [1, 3]}))
    cfg = load_config(f, g12=0.7, workers=None)
    assert (cfg.mode, cfg.t_end, cfg.n_max, cfg.g12, cfg.N_range) == ("sweep-n", 5, None, 0.7, (1, 3))
    with pytest.raises(InvalidParameterError):
        load_config(None, colour="red")
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(g12_range=(2.0, 0.0))
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(mode="plot")


def test_digest_ignores_output_location():
    a = ExperimentConfig(out="x", workers=1)
    assert a.digest() == ExperimentConfig(out="y", workers=4).digest()
    assert a.digest() != ExperimentConfig(g12=0.9).digest()


def test_default_grid_contains_probe_points_once():
    pts = coupling_points(ExperimentConfig())
    assert len(pts) == 41 * 41
    for p in [(0.2, 0.2), (0.5, 0.5), (0.8, 0.8)]:
        assert pts.count(p) == 1
    assert len(coupling_points(ExperimentConfig(resolution=4))) == 16 + 3


def test_default_ground_scans():
    names = [n for n, _ in ground_scans(ExperimentConfig())]
    assert names == ["g23=0", "g23=0.2", "g23=0.5", "g23=0.8", "g23=1", "diagonal"]


def test_evolve_files(tmp_path):
    assert main(["evolve", "--N", "1", "--t-end", "2", "--samples", "21", "--out", str(tmp_path)]) == 0
    for kind in ("fock", "coherent", "squeezed"):
        path = tmp_path / f"evolve_{kind}.csv"
        assert path.read_text().splitlines()[0] == f"#schema={SCHEMA}"
        header, rows = read_csv(path)
        assert header == ["t", "E_B", "ergotropy", "E_locked", "P_B", "P_ergo", "S", "R"]
        assert len(rows) == 21
        assert all(float(v) == 0.0 for v in rows[0]), rows[0]
        cols = read_columns(path)
        assert np.all(np.array(cols["E_B"]) >= np.array(cols["ergotropy"]))
        side = json.loads(path.with_suffix(".json").read_text())
        assert side["config_hash"] == load_config(None, N=1, t_end=2.0, samples=21).digest()
        assert {"code_version", "n_max", "truncation_leakage", "invariants", "config"} <= set(side)
        assert all(side["invariants"].values())


def test_determinism(tmp_path):
    for sub in ("a", "b"):
        assert main(["evolve", "--N", "2", "--charger", "coherent", "--t-end", "3", "--samples", "31",
                     "--out", str(tmp_path / sub)]) == 0
    a = (tmp_path / "a" / "evolve_coherent.csv").read_bytes()
    assert a == (tmp_path / "b" / "evolve_coherent.csv").read_bytes()


def test_sweep_parallel_matches_serial(tmp_path):
    kw = dict(mode="sweep-coupling", resolution=3, coupling_points=((0.5, 0.5),), charger="all")
    p1 = run_sweep_coupling(_small(tmp_path / "serial", **kw))
    p2 = run_sweep_coupling(_small(tmp_path / "par", workers=2, **kw))
    assert p1.read_bytes() == p2.read_bytes()
    cols = read_columns(p1)
    # 3x3 grid over [0, 2] plus the off-grid probe point
    assert len(cols["g12"]) == 10 * 3
    assert (cols["g12"][-1], cols["g23"][-1]) == (0.5, 0.5)
    assert cols["g12"][:6] == [0.0] * 3 + [1.0] * 3 and cols["charger"][:3] == ["fock", "coherent", "squeezed"]
    zero = [i for i in range(len(cols["g12"])) if cols["g12"][i] == 0 and cols["g23"][i] == 0]
    assert all(cols["E_max"][i] == 0.0 for i in zero)
    assert all(0 <= r <= 1 for r in cols["R_e"])


def test_sweep_records_failures(tmp_path):
    path = run_sweep_coupling(_small(tmp_path, mode="sweep-coupling", resolution=2, coupling_points=((0.0, 0.0),),
                                     charger="coherent", n_max=3))
    cols = read_columns(path)
    assert all("TruncationError" in e for e in cols["error"])
    assert all(np.isnan(v) for v in cols["E_max"])


def test_sweep_n(tmp_path):
    cfg = _small(tmp_path, mode="sweep-n", N_range=(1, 2), charger="fock")
    assert main(["sweep-n", "--config", _write(tmp_path, cfg)]) == 0
    cols = read_columns(tmp_path / "sweep_n.csv")
    assert cols["N"] == [1.0, 2.0] and cols["error"] == ["", ""]


def _write(tmp_path, cfg):
    d = cfg.to_dict()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(d))
    return str(path)


def test_ground_mode(tmp_path):
    cfg = _small(tmp_path, mode="ground", ground_g23_values=(0.0,), ground_resolution=3, g12_range=(0.0, 1.0))
    assert main(["ground", "--config", _write(tmp_path, cfg)]) == 0
    cols = read_columns(tmp_path / "ground.csv")
    assert cols["scan"] == ["g23=0"] * 3 + ["diagonal"] * 3
    assert cols["E_g"][0] == 0.0 and cols["phase"][0] == "normal"
    side = json.loads((tmp_path / "ground.json").read_text())
    assert side["invariants"]["zero_coupling_exact"] and side["invariants"]["concavity"]


def test_wigner_and_photons_modes(tmp_path):
    cfg = _small(tmp_path, mode="wigner", charger="squeezed", coupling_points=((0.5, 0.5),),
                 wigner_resolution=11, wigner_extent=6.0)
    assert main(["wigner", "--config", _write(tmp_path, cfg)]) == 0
    w = read_columns(tmp_path / "wigner_squeezed_g0.5-0.5.csv")
    assert len(w["W"]) == 121
    p = read_columns(tmp_path / "photons_squeezed_g0.5-0.5.csv")
    assert sum(p["p"]) == pytest.approx(1.0, abs=1e-10)
    out2 = tmp_path / "ph"
    assert main(["photons", "--config", _write(tmp_path, cfg), "--out", str(out2)]) == 0
    assert sorted(x.name for x in out2.iterdir()) == ["photons_squeezed_g0.5-0.5.csv", "photons_squeezed_g0.5-0.5.json"]


def test_squeezed_initial_state_has_no_odd_photons(tmp_path):
    cfg = _small(tmp_path, mode="photons", charger="squeezed", coupling_points=((0.0, 0.0),))
    assert main(["photons", "--config", _write(tmp_path, cfg)]) == 0
    side = json.loads((tmp_path / "photons_squeezed_g0-0.json").read_text())
    assert side["t_E"] == 0.0 and side["odd_photon_mass"] == 0.0


def test_cli_error_exit(tmp_path, capsys):
    code = main(["evolve", "--N", "1", "--charger", "coherent", "--nmax", "3", "--out", str(tmp_path)])
    assert code != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("dicke-qb: error: TruncationError")


def test_cli_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dicke_qb", "evolve", "--N", "0", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "InvalidParameterError" in proc.stderr
