import json

import numpy as np
import pytest

from brinkbie import cli


def test_fit_slope_exact_line():
    slope, resid = cli.fit_slope([(1, 1), (0.5, 0.5), (0.25, 0.25)])
    assert slope == pytest.approx(1.0, abs=1e-12)
    assert resid == pytest.approx(0.0, abs=1e-12)


def test_fit_slope_exact_quadratic():
    slope, _ = cli.fit_slope([(1, 1), (0.5, 0.25), (0.25, 0.0625)])
    assert slope == pytest.approx(2.0, abs=1e-12)


def test_fit_slope_noisy():
    slope, resid = cli.fit_slope([(1, 1), (0.5, 0.51), (0.25, 0.26)])
    assert slope == pytest.approx(0.97, abs=0.02)
    assert 0 < resid < 0.05


def test_fit_slope_errors():
    with pytest.raises(cli.InsufficientDataError):
        cli.fit_slope([(1, 1), (0.5, 0.5)])
    with pytest.raises(cli.InsufficientDataError):
        cli.fit_slope([(1, 1), (0.5, 0.5), (0.25, -0.1)])


def test_config_validation():
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict({"experiment": "nope"})
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict({"experiment": "geometry-check", "bogus": 1})
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict({"experiment": "geometry-check", "N": [15]})
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict(
            {"experiment": "geometry-check", "curve": "star 1.0 0.3 3",
             "rho": "cosine 1 1.0", "delta": [0.9]})
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict(
            {"experiment": "geometry-check", "lambda": [-1.0, 0.0]})
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict(
            {"experiment": "geometry-check", "curve": "pentagon 1"})


def test_geometry_check_runs(tmp_path):
    cfg = cli.ExperimentConfig.from_dict({
        "experiment": "geometry-check", "curve": "star 1.0 0.3 3",
        "rho": "cosine 1 1.0", "delta": [2e-2, 1e-2, 5e-3, 2.5e-3],
        "out": str(tmp_path)})
    res = cli.run(cfg)
    assert res.slope > 1.9
    assert res.extra["measure_slope"] > 2.9
    assert res.extra["sphere_identity_error"] < 1e-14
    assert (tmp_path / "geometry-check.csv").exists()
    summary = json.loads((tmp_path / "geometry-check.json").read_text())
    assert summary["experiment"] == "geometry-check"
    assert summary["config"]["curve"] == "star 1.0 0.3 3"
    assert len(summary["rows"]) == 4


def test_csv_reproducible(tmp_path):
    raw = {"experiment": "geometry-check", "curve": "circle 1.0",
           "rho": "cosine 2 0.5", "delta": [2e-2, 1e-2, 5e-3],
           "out": str(tmp_path)}
    cli.run(cli.ExperimentConfig.from_dict(raw))
    first = (tmp_path / "geometry-check.csv").read_bytes()
    cli.run(cli.ExperimentConfig.from_dict(raw))
    assert (tmp_path / "geometry-check.csv").read_bytes() == first


def test_solver_convergence_experiment(tmp_path):
    cfg = cli.ExperimentConfig.from_dict({
        "experiment": "solver-convergence", "curve": "circle 1.0",
        "lambda": [1.0, 2.0], "N": [64, 128, 256],
        "boundary_data": "source 2.5 1.0 1.0 -0.5",
        "points": [[0.0, 0.0], [0.2, 0.1]], "out": str(tmp_path)})
    res = cli.run(cfg)
    assert res.errors[-1] < 1e-8


def test_expansion_study_with_zero_rho_omits_slope(tmp_path):
    cfg = cli.ExperimentConfig.from_dict({
        "experiment": "expansion-study", "curve": "circle 1.0",
        "rho": "zero", "lambda": [1.0, 0.0], "N": [64],
        "delta": [2e-2, 1e-2, 5e-3], "boundary_data": "stream-poly",
        "points": [[0.0, 0.0]], "out": str(tmp_path)})
    res = cli.run(cfg)
    assert res.slope is None
    assert max(res.errors) < 1e-10


def test_continuity_study_threads_deterministic(tmp_path):
    raw = {"experiment": "continuity-study", "curve": "circle 1.0",
           "rho": "constant 1.0", "lambda": [1.0, 0.0], "N": [64],
           "delta": [4e-2, 2e-2, 1e-2], "boundary_data": "stream-poly",
           "points": [[0.0, 0.0], [0.2, 0.1]], "out": str(tmp_path)}
    res1 = cli.run(cli.ExperimentConfig.from_dict(raw))
    res2 = cli.run(cli.ExperimentConfig.from_dict({**raw, "threads": 2}))
    assert res1.rows == res2.rows
    assert res1.slope == pytest.approx(res2.slope)
    assert res1.slope > 0.9


def test_main_end_to_end(tmp_path, capsys):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({
        "experiment": "geometry-check", "curve": "ellipse 1.0 0.6",
        "rho": "cosine 1 0.5", "delta": [2e-2, 1e-2, 5e-3]}))
    rc = cli.main(["run", "--config", str(cfgfile), "--out", str(tmp_path / "o"),
                   "--quadrature", "log-split", "--threads", "1"])
    assert rc == 0
    assert (tmp_path / "o" / "geometry-check.csv").exists()
    out = capsys.readouterr().out
    assert "geometry-check" in out


def test_main_bad_config(tmp_path):
    cfgfile = tmp_path / "bad.json"
    cfgfile.write_text("{not json")
    assert cli.main(["run", "--config", str(cfgfile)]) == 2
    cfgfile2 = tmp_path / "bad2.json"
    cfgfile2.write_text(json.dumps({"experiment": "nope"}))
    assert cli.main(["run", "--config", str(cfgfile2)]) == 2
