import json

import numpy as np
import pytest

from resilient_recovery import bench
from resilient_recovery.bench import (ConfigError, ExperimentConfig, SweepRow,
                                      run_cell, run_scurve, run_sweep,
                                      write_scurve_csv, write_sweep_csv)


def tiny(**overrides):
    base = dict(m_range=(8, 8), n_range=(4, 4), p_attack=0.4, trials=10, seed=1)
    base.update(overrides)
    return ExperimentConfig(**base)


def test_default_grid_is_downsampled_reference_grid():
    cfg = ExperimentConfig()
    assert cfg.m_values == (10, 26, 42, 58, 74)
    assert cfg.n_values == (5, 13, 21, 29, 37)


def test_stride_two_gives_ten_by_ten():
    cfg = ExperimentConfig(stride=2)
    assert len(cfg.m_values) == 10 and len(cfg.n_values) == 10
    assert cfg.m_values[0] == 10 and cfg.m_values[-1] == 82
    assert cfg.n_values[0] == 5 and cfg.n_values[-1] == 41


def test_cells_are_row_major():
    cfg = ExperimentConfig(m_range=(10, 14), n_range=(5, 7), stride=1)
    assert cfg.cells() == [(10, 5), (10, 7), (14, 5), (14, 7)]


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(m_range=(10,))
    with pytest.raises(ConfigError):
        ExperimentConfig(m_range=(20, 10))
    with pytest.raises(ConfigError):
        ExperimentConfig(stride=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(p_attack=1.5)
    with pytest.raises(ConfigError):
        ExperimentConfig(agreement=(0.5, 2.0))
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(omega_policy="sometimes")
    with pytest.raises(ConfigError):
        ExperimentConfig(omega_policy=0.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(eps=0.0)


def test_config_from_mapping_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"m_rang": (10, 20)})


def test_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"m_range": [8, 8], "n_range": [4, 4],
                                "trials": 3, "seed": 7}))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.m_values == (8,) and cfg.trials == 3 and cfg.seed == 7
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(bad)
    array = tmp_path / "array.json"
    array.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(array)


def test_scalar_accessors_reject_lists():
    cfg = tiny(p_attack=(0.1, 0.2))
    with pytest.raises(ConfigError):
        cfg.scalar_p_attack()


def test_no_attack_recovers_every_trial():
    successes, trials = run_cell(tiny(p_attack=0.0), 8, 4, 0)
    assert (successes, trials) == (10, 10)


def test_run_cell_is_deterministic():
    cfg = tiny()
    assert run_cell(cfg, 8, 4, 0) == run_cell(cfg, 8, 4, 0)


def test_single_cell_sweep_matches_run_cell():
    cfg = tiny()
    result = run_sweep(cfg)
    successes, trials = run_cell(cfg, 8, 4, 0)
    assert len(result.rows) == 1
    row = result.rows[0]
    assert (row.successes, row.trials) == (successes, trials)
    assert row.ratio == successes / trials
    assert result.seed == cfg.seed


def test_sweep_rows_identical_across_job_counts():
    cfg = ExperimentConfig(m_range=(8, 12), n_range=(4, 4), stride=1,
                           p_attack=0.5, trials=5, seed=2)
    serial = run_sweep(cfg, jobs=1)
    parallel = run_sweep(cfg, jobs=2)
    assert serial.rows == parallel.rows


def test_weighted_sweep_resolves_omega_policy():
    cfg = tiny(agreement=0.8, trials=4)
    row = run_sweep(cfg).rows[0]
    assert row.agreement == 0.8 and row.omega == 0.01
    fixed = tiny(agreement=0.8, omega_policy=0.5, trials=4)
    assert run_sweep(fixed).rows[0].omega == 0.5
    ppv = tiny(agreement=0.8, omega_policy="ppv", trials=4)
    assert run_sweep(ppv).rows[0].omega == "ppv"


def test_sweep_csv_format(tmp_path):
    cfg = tiny(trials=4)
    result = run_sweep(cfg)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(result, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=1 version=")
    assert lines[1] == "m,n,p_attack,agreement,omega,trials,successes,ratio"
    fields = lines[2].split(",")
    assert fields[0] == "8" and fields[1] == "4"
    assert fields[3] == "none" and fields[4] == "none"
    assert len(lines) == 3


def test_sweep_flushes_partial_results_with_resume_marker(tmp_path, monkeypatch):
    cfg = ExperimentConfig(m_range=(8, 12), n_range=(4, 4), stride=1,
                           p_attack=0.0, trials=2, seed=0)
    calls = {"n": 0}
    real = bench.run_cell

    def explode_on_second(cfg, m, n, idx):
        calls["n"] += 1
        if calls["n"] == 2:
            raise KeyboardInterrupt
        return real(cfg, m, n, idx)

    monkeypatch.setattr(bench, "run_cell", explode_on_second)
    path = tmp_path / "partial.csv"
    with pytest.raises(KeyboardInterrupt):
        run_sweep(cfg, partial_path=path)
    lines = path.read_text().splitlines()
    assert lines[-1] == "# resume_next_cell=1"
    assert len([l for l in lines if not l.startswith("#")]) == 2


def test_scurve_requires_single_cell():
    cfg = ExperimentConfig(m_range=(8, 12), n_range=(4, 4), stride=1,
                           p_attack=(0.0, 1.0), trials=2)
    with pytest.raises(ConfigError):
        run_scurve(cfg)


def test_scurve_settings_and_extremes():
    cfg = tiny(p_attack=(0.0, 1.0), agreement=(0.8,), trials=8)
    rows = run_scurve(cfg)
    assert [r.setting for r in rows] == ["none", "0.8", "none", "0.8"]
    start = {r.setting: r.ratio for r in rows if r.p_attack == 0.0}
    end = {r.setting: r.ratio for r in rows if r.p_attack == 1.0}
    assert start["none"] == 1.0 and start["0.8"] == 1.0
    assert end["none"] == 0.0 and end["0.8"] == 0.0
    for r in rows:
        assert r.stderr == pytest.approx(
            np.sqrt(r.ratio * (1 - r.ratio) / cfg.trials), abs=1e-12)


def test_scurve_monotone_in_attack_fraction():
    cfg = tiny(p_attack=(0.0, 0.5, 1.0), trials=30)
    rows = [r for r in run_scurve(cfg) if r.setting == "none"]
    for earlier, later in zip(rows, rows[1:]):
        slack = 3 * np.sqrt(max(earlier.stderr, later.stderr) ** 2 + 1e-12)
        assert later.ratio <= earlier.ratio + slack


def test_scurve_csv_format(tmp_path):
    cfg = tiny(p_attack=(0.0, 1.0), trials=3)
    rows = run_scurve(cfg)
    path = tmp_path / "curve.csv"
    write_scurve_csv(rows, cfg.seed, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=1 version=")
    assert lines[1] == "p_attack,setting,ratio,stderr"
    assert len(lines) == 2 + len(rows)


def test_sweep_row_shape():
    cfg = tiny(trials=3)
    row = run_sweep(cfg).rows[0]
    assert isinstance(row, SweepRow)
    assert 0 <= row.successes <= row.trials
    assert row.ratio == row.successes / row.trials
