import json
import os
import pathlib

import numpy as np
import pytest

import nsbiot

SOURCE = pathlib.Path(os.environ.get("NSBIOT_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
TINY = [nsbiot.LevelSpec(2, 2, 2, 2), nsbiot.LevelSpec(4, 4, 3, 3)]


def test_params_roundtrip_and_violations():
    p = nsbiot.PhysicalParams()
    assert p.mu == 1.0 and p.kappa2 is None
    p.K = np.array([[0.505e-6, 0.495e-6], [0.495e-6, 0.505e-6]])
    assert p.K[0, 1] == pytest.approx(0.495e-6)
    p.kappa2 = 5.0
    assert any(v.startswith("params.kappa2") for v in p.violations())
    p.kappa2 = None
    p.s0 = 0.0
    assert any(v.startswith("params.s0") for v in p.violations())


def test_levels():
    levels = nsbiot.example1_levels()
    assert len(levels) == 4 and levels[0].fluid_nx == 8
    assert len(nsbiot.parse_levels("3")) == 3
    with pytest.raises(nsbiot.ConfigError):
        nsbiot.parse_levels("8x7")
    assert "p_f" in nsbiot.error_fields()


def test_single_level_health():
    r = nsbiot.run_level(TINY[0], T=0.002)
    assert r["steps"] == 2
    assert r["avg_newton"] <= 4
    assert r["darcy_mass_residual"] <= 1e-9
    assert r["interface_mass_residual"] <= 1e-9
    assert all(np.isfinite(v) and v > 0 for v in r["errors"].values())


def test_convergence_study_shapes():
    out = nsbiot.convergence_study(TINY, T=0.002)
    assert len(out["levels"]) == 2 and len(out["rates"]) == 1
    assert out["levels"][1]["dofs"] > out["levels"][0]["dofs"]
    assert out["csv"].count("\n") == 3


def test_linear_problem_takes_one_newton_iteration():
    p = nsbiot.PhysicalParams()
    p.rho = 0.0
    assert nsbiot.run_level(TINY[0], p, T=0.002)["avg_newton"] == 1.0


def test_oscillation_column():
    p = nsbiot.PhysicalParams()
    p.s0 = 5e-6
    p.K = 1e-9 * np.eye(2)
    worst, pressure = nsbiot.oscillation_column(p, n=8, steps=1)
    assert 0.0 < worst < 1.0
    assert pressure.shape == (128,)


def test_git_blob_digest():
    assert nsbiot.git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"


def test_validate_and_run(tmp_path):
    code, log = nsbiot.validate(str(SOURCE / "configs" / "example1_mms.cfg"))
    assert code == 0, log
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = example1_mms\nparams.s0 = 0\n")
    code, log = nsbiot.run(str(bad), out=str(tmp_path / "out"))
    assert code == 2 and "params.s0" in log
    assert not (tmp_path / "out").exists()

    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("scenario = example1_mms\ntime.T = 0.002\n")
    code, log = nsbiot.convergence(str(cfg), out=str(tmp_path / "conv"), levels="2x2:2x2, 4x4:3x3")
    assert code == 0, log
    manifest = json.loads((tmp_path / "conv" / "manifest.json").read_text())
    assert manifest["config_sha1"] == nsbiot.git_blob_sha1(cfg.read_text())
    assert len(manifest["levels"]) == 2
