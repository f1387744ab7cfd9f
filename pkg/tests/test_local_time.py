import numpy as np
import pytest

from stable_rough.frac_calc import c_alpha
from stable_rough.local_time import (
    LocalTimeField,
    barlow_limit,
    barlow_modulus_ratio,
    default_bandwidth,
    default_grid,
    estimate_local_time,
    local_time_at,
    occupation_check,
    sigma_sq,
)
from stable_rough.stable_process import SamplePath, ensemble_seeds, simulate_path

from oracles import box_occupation


@pytest.fixture(scope="module")
def path15():
    return simulate_path(1.5, 1.0, 2 ** 14, 0.1, seed=21)


def test_constant_path_puts_all_time_in_one_bin():
    n = 1000
    p = SamplePath(np.linspace(0, 1, n + 1), np.zeros(n + 1), 1.5, 0, 1.0)
    grid = np.arange(-5, 6) * 0.1
    f = estimate_local_time(p, grid, 0.1)
    expect = np.where(np.isclose(grid, 0.0), 10.0, 0.0)
    assert np.allclose(f.values, expect)
    assert f.mass == pytest.approx(1.0)


def test_estimator_matches_naive_loop(path15):
    short = path15.truncated(3000)
    bw = 0.05
    grid = default_grid(short, bw)
    f = estimate_local_time(short, grid, bw)
    idx = np.arange(0, len(grid), max(1, len(grid) // 15))
    assert np.allclose(f.values[idx], box_occupation(short.values, short.dt, grid[idx], bw))
    assert local_time_at(short, grid[idx], bw) == pytest.approx(f.values[idx])


def test_mass_conservation_and_compact_support(path15):
    f = estimate_local_time(path15)
    assert f.mass == pytest.approx(1.0, rel=1e-2)
    assert f.values[0] == 0 and f.values[-1] == 0
    outside = (f.grid < path15.values.min() - f.bandwidth) | (f.grid > path15.values.max() + f.bandwidth)
    assert np.all(f.values[outside] == 0)


def test_monotone_in_time(path15):
    f_full = estimate_local_time(path15, bandwidth=0.02, grid=default_grid(path15, 0.02))
    f_half = estimate_local_time(path15.truncated(2 ** 13), grid=f_full.grid, bandwidth=0.02)
    assert np.all(f_half.values <= f_full.values)


def test_grid_must_cover_range_and_respect_spacing(path15):
    with pytest.raises(ValueError):
        estimate_local_time(path15, np.linspace(-0.1, 0.1, 50), 0.01)
    g = default_grid(path15, 0.02)
    with pytest.raises(ValueError):
        estimate_local_time(path15, g[::3], 0.02)
    with pytest.raises(ValueError):
        estimate_local_time(path15, g, 0.0)


def test_default_bandwidth_rule():
    assert default_bandwidth(1.5, 1.0, 2 ** 12) == pytest.approx(2 * 2 ** (-12 / 1.5))


def test_default_grid_contains_origin(path15):
    g = default_grid(path15, 0.0137)
    assert np.min(np.abs(g)) < 1e-12


def test_occupation_normalization_and_disjoint_support(path15):
    f = estimate_local_time(path15)
    lhs, rhs = occupation_check(path15, f, np.ones_like)
    assert lhs == pytest.approx(1.0)
    assert rhs == pytest.approx(1.0, rel=1e-2)
    far = path15.values.max() + 10

    def phi(x):
        return np.where(np.abs(x - far) < 1, 1.0, 0.0)

    assert occupation_check(path15, f, phi) == (0.0, 0.0)


def test_occupation_x_squared():
    p = simulate_path(1.5, 1.0, 2 ** 16, 0.1, seed=3)
    f = estimate_local_time(p, default_grid(p, 0.02), 0.02)
    lhs, rhs = occupation_check(p, f, np.square)
    assert abs(lhs - rhs) / abs(lhs) <= 0.05


def test_sigma_sq_zero_lag_and_small_ensemble(path15):
    f = estimate_local_time(path15)
    assert sigma_sq([f, f], 0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        sigma_sq([f], 0.0, 0.1)


@pytest.fixture(scope="module")
def ensemble15():
    out = []
    for s in ensemble_seeds(5, 300):
        p = simulate_path(1.5, 1.0, 2 ** 13, 1.0, int(s))
        bw = 0.02
        lo = min(p.values.min(), -0.6) - bw
        hi = max(p.values.max(), 0.6) + bw
        grid = np.arange(np.floor(lo / bw) - 1, np.ceil(hi / bw) + 2) * bw
        out.append(estimate_local_time(p, grid, bw))
    return out


def test_sigma_sq_scaling_exponent(ensemble15):
    hs = np.array([0.4, 0.2, 0.1, 0.05])
    s = np.array([sigma_sq(ensemble15, 0.0, h) for h in hs])
    slope = np.polyfit(np.log(hs), np.log(s), 1)[0]
    assert slope >= 1.5 - 1 - 0.15


def test_sigma_sq_symmetric(ensemble15):
    a = sigma_sq(ensemble15, 0.0, 0.2)
    b = sigma_sq(ensemble15, 0.0, -0.2)
    d = [np.interp(0.2, f.grid, f.values) - np.interp(0.0, f.grid, f.values) for f in ensemble15]
    se = np.std(np.square(d)) / np.sqrt(len(d))
    assert abs(a - b) < 4 * se * np.sqrt(2)


def test_barlow_ratio_trivial_cases():
    g = np.linspace(-1, 1, 41)
    flat = LocalTimeField(g, np.full_like(g, 0.7), 1.0, 0.05, alpha=1.7)
    assert barlow_modulus_ratio(flat, 0.2) == 0.0
    # delta below the grid spacing: empty supremum
    assert barlow_modulus_ratio(LocalTimeField(g, np.abs(g), 1.0, 0.05, alpha=1.7), 0.01) == 0.0


def test_barlow_ratio_near_limit_value():
    p = simulate_path(1.7, 1.0, 2 ** 16, 0.1, seed=17)
    f = estimate_local_time(p)
    ratio = barlow_modulus_ratio(f, 0.05)
    limit = barlow_limit(f, c_alpha(1.7))
    assert limit / 3 <= ratio <= 3 * limit
