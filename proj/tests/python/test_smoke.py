import math

import numpy as np
import pytest

import roughdrift as rd


def test_prodi_serrin_and_beta():
    ok, margin = rd.prodi_serrin(7, 15, 3)
    assert ok
    assert margin == pytest.approx(1 - 3 / 7 - 2 / 15)
    assert not rd.prodi_serrin(2, 2, 1)[0]
    assert rd.kernel_beta(4, 4, 1) == pytest.approx(0.625)


def test_corpus_registry():
    entries = rd.corpus()
    assert len(entries) >= 5
    assert all(e["prodi_serrin"] or e["holder_mode"] for e in entries)


def test_heat_solve_constant_gradient_free():
    res = rd.heat_solve({"preset": "gaussian_bump"}, horizon=0.1, nodes=64, time_nodes=8)
    u = res["u"]
    assert u.shape == (8, 64, 1)
    assert np.all(u[-1] == 0.0)
    assert res["grad"].shape == (8, 64, 1)
    assert res["forcing_norm"] > 0


def test_zero_drift_paths_and_contraction():
    paths = rd.simulate({"preset": "zero"}, [0.5], horizon=1.0, steps=10, paths=50, seed=3)
    assert paths.shape == (50, 11, 1)
    assert np.all(paths[:, 0, 0] == 0.5)
    again = rd.simulate({"preset": "zero"}, [0.5], horizon=1.0, steps=10, paths=50, seed=3)
    assert np.array_equal(paths, again)
    rep = rd.contraction({"preset": "zero"}, depth=2, nodes=32, time_nodes=9)
    assert rep["T0"] == 0.4
    assert all(r["C_n"] == 0.0 for r in rep["rows"])


def test_girsanov_and_khasminskii():
    res = rd.girsanov_check({"preset": "gaussian_bump", "amplitude": 0.5}, [0.0], paths=4000, steps=50)
    assert len(res["rows"]) == 3
    assert res["martingale"]["pass"]
    kh = rd.khasminskii_constant(0.5)
    assert kh["estimate"] == pytest.approx(math.exp(0.5))
    assert kh["pass"]


def test_suite_and_config_errors(tmp_path):
    res = rd.run_suite("lemma1", {"drift": {"preset": "zero"}, "grid": {"nodes": 32, "time_nodes": 9}}, str(tmp_path))
    assert res["exit_code"] == 0
    assert (tmp_path / "report.jsonl").exists()
    assert res["report"][-1]["fail"] == 0
    with pytest.raises(rd.RoughDriftError, match="config.sde.paths"):
        rd.run_suite("lemma2", {"sde": {"paths": "many"}})
