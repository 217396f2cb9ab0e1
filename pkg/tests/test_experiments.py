import math

import numpy as np
import pytest

from starsketch.errors import InputError
from starsketch.experiments import (
    ExperimentConfig,
    convergence_study,
    fit_order,
    load_shape_dir,
    run_cluster_experiment,
    run_convergence,
    run_knn_experiment,
)
from starsketch.io import save_outline_csv
from starsketch.sketch import PhiSpec
from starsketch.synthesis import FourierProfile, random_spline_profile

SMALL = dict(m_values=[16, 64], n_originals=4, n_copies=3, trials=2)


def test_config_validation():
    for bad in (dict(m_values=[]), dict(m_values=[4]), dict(n_copies=0), dict(trials=0), dict(mode="nope")):
        with pytest.raises(InputError):
            ExperimentConfig(**bad).validate()
    with pytest.raises(InputError):
        ExperimentConfig(mode="convergence", m_values=[32, 64]).validate()


def test_config_from_mapping():
    c = ExperimentConfig.from_mapping(
        {"m_values": ["16", 32], "phi": {"kind": "laplace", "lambda": 2}, "shape": {"base": 0.6}, "seed": 4}
    )
    assert c.m_values == [16, 32] and c.phi == PhiSpec("laplace", 2.0) and c.shape.base == 0.6
    with pytest.raises(InputError, match="unknown config keys"):
        ExperimentConfig.from_mapping({"bogus": 1})
    assert c.with_overrides(seed=None, trials=3).trials == 3 and c.with_overrides(seed=None).seed == 4


def test_cluster_snap_is_perfect():
    s = run_cluster_experiment(ExperimentConfig(snap_rotations=True, **SMALL))
    assert [(r.m, r.trial) for r in s.rows] == [(16, 0), (16, 1), (64, 0), (64, 1)]
    assert all(r.accuracy == 1.0 for r in s.rows)
    assert s.table() == [(16, 1.0, 0.0), (64, 1.0, 0.0)]


def test_cluster_deterministic_across_workers():
    a = run_cluster_experiment(ExperimentConfig(seed=3, workers=1, **SMALL))
    b = run_cluster_experiment(ExperimentConfig(seed=3, workers=3, **SMALL))
    assert a.rows == b.rows


def test_cluster_summary_statistics():
    s = run_cluster_experiment(ExperimentConfig(seed=1, **SMALL))
    for m, mean, std in s.table():
        accs = [r.accuracy for r in s.rows if r.m == m]
        assert mean == pytest.approx(np.mean(accs)) and std == pytest.approx(np.std(accs))


def test_cluster_from_input_dir(tmp_path):
    th = 2 * np.pi * np.arange(90) / 90
    for i in range(5):
        r = 0.7 + 0.2 * np.cos((i + 2) * th)
        save_outline_csv(np.column_stack([r * np.cos(th), r * np.sin(th)]), tmp_path / f"shape{i}.csv")
    assert [n for n, _ in load_shape_dir(tmp_path)] == [f"shape{i}" for i in range(5)]
    s = run_cluster_experiment(
        ExperimentConfig(input_dir=str(tmp_path), m_values=[32], n_originals=3, n_copies=2, trials=2, snap_rotations=True)
    )
    assert all(r.accuracy == 1.0 for r in s.rows)
    with pytest.raises(InputError, match="need 6 shapes"):
        run_cluster_experiment(ExperimentConfig(input_dir=str(tmp_path), m_values=[32], n_originals=6, trials=1))
    with pytest.raises(InputError):
        load_shape_dir(tmp_path / "missing")


def test_knn_experiment_small():
    rows = run_knn_experiment(ExperimentConfig(mode="knn_demo", m_values=[64], n_shapes=12, trials=1, k=3))
    assert len(rows) == 12
    assert all(r.rank in (1, 2, 3, None) for r in rows)
    assert sum(r.rank == 1 for r in rows) >= 11


def test_fit_order():
    ms = [10, 20, 40, 80]
    assert fit_order(ms, [m**-2.0 for m in ms], 0.0) == pytest.approx(2.0)
    assert fit_order(ms, [1e-3, 1e-20, 0.0, 0.0], 1e-15) == math.inf


def test_convergence_constant_profile_is_exact():
    res = convergence_study(FourierProfile(0.6), [8, 16, 32])
    assert res.deviations == [0.0, 0.0, 0.0] and res.order == math.inf


def test_convergence_sinusoid_hits_float_floor():
    prof = FourierProfile(0.7, (0.0, 0.0, 0.1))
    res = convergence_study(prof, [16, 32, 64, 128])
    assert res.order >= 1.8 and max(res.deviations[1:]) <= res.floor


def test_convergence_spline_monotone():
    res = convergence_study(random_spline_profile(seed=2), [32, 64, 128, 256, 512])
    assert all(b < a for a, b in zip(res.deviations, res.deviations[1:]))
    assert res.order >= 1.8


def test_convergence_errors():
    with pytest.raises(InputError):
        convergence_study(FourierProfile(0.6), [32, 64])
    with pytest.raises(InputError, match="divide"):
        convergence_study(FourierProfile(0.6), [24, 32, 64], reference_factor=1)
    with pytest.raises(InputError):
        run_convergence(ExperimentConfig(mode="convergence", m_values=[8, 16, 32], profile="nope"))


def test_run_convergence_profiles():
    for profile in ("spline", "fourier", "constant"):
        res = run_convergence(ExperimentConfig(mode="convergence", m_values=[16, 32, 64], profile=profile))
        assert len(res.deviations) == 3
