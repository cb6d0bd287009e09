import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinsync.bath import BathParams
from spinsync.model import ModelParams, build_model, product_state
from spinsync.redfield import Trajectory, build_generator, propagate
from spinsync.sync import (SyncConfig, _locate, correlation_coefficient, sync_frequency, sync_map, sync_time,
                           windowed_correlation)


def synthetic(times, f1, f2):
    n = times.size
    zeros = np.zeros(n)
    return Trajectory(times, np.zeros((n, 4, 4)), np.asarray(f1, float), np.asarray(f2, float), zeros, zeros, zeros)


def canonical(omega2=1.02, g=-1.0, horizon=500.0):
    model = build_model(ModelParams(omega2=omega2, g=g))
    rho = product_state(np.pi / 4, 0.0, np.pi / 8, np.pi / 2).density()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return propagate(build_generator(model, BathParams()), rho, np.arange(int(horizon / 0.02) + 1) * 0.02)


T = np.linspace(0, 6, 301)


@pytest.mark.parametrize("fp, expected", [
    (np.sin(3 * T), 1.0),
    (-np.sin(3 * T), -1.0),
    (2.5 * np.sin(3 * T) + 7.0, 1.0),
])
def test_correlation_limits(fp, expected):
    assert correlation_coefficient(np.sin(3 * T), fp, T[1] - T[0]) == pytest.approx(expected, abs=1e-12)


def test_orthogonal_signals_uncorrelated():
    t = np.linspace(0, 2 * np.pi, 2001)
    assert abs(correlation_coefficient(np.sin(t), np.cos(t), t[1] - t[0])) < 1e-3


def test_constant_window_is_undefined():
    assert correlation_coefficient(np.ones(50), np.sin(np.arange(50.0))) is None
    with pytest.raises(ValueError):
        correlation_coefficient(np.ones(5), np.ones(5))


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3), st.floats(-5, 5))
def test_affine_invariance(a, b):
    rng = np.random.default_rng(1)
    f, fp = rng.normal(size=200), rng.normal(size=200)
    c = correlation_coefficient(f, fp)
    assert correlation_coefficient(f, a * fp + b) == pytest.approx(math.copysign(1, a) * c, abs=1e-9)


def test_windowed_correlation_grid_and_nan():
    t = np.arange(0, 20.0001, 0.02)
    f = np.where(t < 10.5, 0.0, np.sin(5 * t))
    starts, values = windowed_correlation(t, f, f, 6.0, 4.0)
    assert np.allclose(starts, [0, 4, 8, 12])
    assert np.isnan(values[0]) and np.isnan(values[1])
    assert values[3] == pytest.approx(1.0)
    with pytest.raises(ValueError, match="uniform"):
        windowed_correlation(np.array([0, 1, 3.0] + list(range(4, 20))), np.ones(19), np.ones(19), 6, 4)


def test_identical_signals_synchronize_immediately():
    cfg = SyncConfig(horizon=60.0)
    t = cfg.times()
    rep = sync_time(synthetic(t, np.sin(2 * t), np.sin(2 * t)), cfg)
    assert rep.t_synch == 0.0 and rep.sign == 1 and rep.skipped == 0


@pytest.mark.parametrize("rule, expected", [("sustained", 5), ("first", 1)])
def test_locate_rules(rule, expected):
    v = np.array([0.1, 0.95, 0.96, 0.97, 0.5, 0.93, -0.95, 0.99, 0.98])
    assert _locate(v, 0.92, 3, rule) == expected


def test_locate_requires_run_to_reach_horizon():
    assert _locate(np.array([0.95, 0.95, 0.95, 0.1]), 0.92, 3, "sustained") is None
    assert _locate(np.array([0.1, 0.95, 0.95]), 0.92, 3, "sustained") is None


@pytest.mark.parametrize("kwargs", [{"threshold": 1.0}, {"window": 0.1}, {"horizon": 5.0}, {"rule": "last"},
                                    {"persistence": 0}])
def test_sync_config_validation(kwargs):
    with pytest.raises(ValueError):
        SyncConfig(**kwargs)


def test_frequency_of_pure_tone():
    t = np.arange(0, 200.0001, 0.02)
    est = sync_frequency(synthetic(t, np.sin(2.0 * t) + 0.3, np.zeros_like(t)), t_from=20.0, cycles=50)
    assert est.omega == pytest.approx(2.0, abs=1e-5)
    omega, err = est
    assert 0 < err < 1e-3
    with pytest.raises(ValueError, match="cycles"):
        sync_frequency(synthetic(t, np.sin(2.0 * t), np.zeros_like(t)), t_from=190.0, cycles=50)


def test_canonical_run_anti_synchronizes():
    rep = sync_time(canonical())
    assert rep.reached and rep.sign == -1
    assert np.nanmin(np.abs(rep.c_values[:5])) < 0.92
    assert rep.t_synch == pytest.approx(188.0)


def test_single_cell_map_matches_sync_time(fig4_state):
    cfg = SyncConfig()
    m = sync_map([0.02], [-1.0], BathParams(), cfg, fig4_state)
    assert m.values[0, 0] == sync_time(canonical()).t_synch
    cell = m.cells[0].value
    assert cell.sign == -1 and cell.gap < 0 and cell.im_lambda1 > 0


def test_map_independent_of_workers(fig4_state):
    cfg = SyncConfig(horizon=200.0)
    a = sync_map([0.0, 0.3], [-1.0, 1.0], BathParams(), cfg, fig4_state, workers=1)
    b = sync_map([0.0, 0.3], [-1.0, 1.0], BathParams(), cfg, fig4_state, workers=2)
    assert np.array_equal(a.values, b.values, equal_nan=True)
    assert np.isnan(a.values[:, 1]).all()
