import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stable_rough.frac_calc import GridFunction
from stable_rough.local_time import estimate_local_time
from stable_rough.rough_path import DyadicLift, TwoPath, lift_piecewise_linear
from stable_rough.stable_process import ensemble_seeds, simulate_path
from stable_rough.variation import (
    Partition,
    control_equalized_partition,
    dyadic_variation_bound,
    length_control,
    p_variation_exact,
    p_variation_prefix,
    theta_distance,
    total_variation_control,
)

from oracles import brute_force_pvar


def test_partition_invariants():
    with pytest.raises(ValueError):
        Partition(np.array([0.0, 0.5, 0.5, 1.0]))
    with pytest.raises(ValueError):
        Partition(np.array([1.0]))
    p = Partition(np.array([0.0, 0.5, 1.0]))
    r = p.refine()
    assert r.points.tolist() == [0, 0.25, 0.5, 0.75, 1.0]
    assert r.is_refinement_of(p) and not p.is_refinement_of(r)
    assert r.mesh == 0.25


# -- exact p-variation ---------------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_monotone_values_use_endpoints(p):
    v = np.cumsum(np.random.default_rng(0).random(30))
    assert p_variation_exact(v, p) == pytest.approx(abs(v[-1] - v[0]) ** p if p > 1 else v[-1] - v[0])


def test_peak_is_kept():
    assert p_variation_exact([0.0, 1.0, 0.0], 2) == 2.0


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("p", [1.0, 1.7, 2.5])
def test_dp_matches_brute_force(seed, p):
    v = np.random.default_rng(seed).normal(size=10 + seed % 5)
    assert p_variation_exact(v, p) == pytest.approx(brute_force_pvar(v, p), rel=1e-12)
    assert p_variation_exact(v, p, reduce=False) == pytest.approx(brute_force_pvar(v, p), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=9),
       st.floats(1.0, 4.0))
def test_dp_matches_brute_force_property(vals, p):
    assert p_variation_exact(vals, p) == pytest.approx(brute_force_pvar(vals, p), rel=1e-9, abs=1e-12)


def test_prefix_is_nondecreasing_and_ends_at_total():
    v = np.random.default_rng(3).normal(size=50)
    V = p_variation_prefix(v, 2.0)
    assert np.all(np.diff(V) >= 0)
    assert V[-1] == pytest.approx(p_variation_exact(v, 2.0))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        p_variation_exact([1.0], 2)
    with pytest.raises(ValueError):
        p_variation_exact([0.0, 1.0], 0.5)


def test_monotone_in_p_for_small_increments():
    v = 0.3 * np.random.default_rng(4).random(40)
    vals = [p_variation_exact(v, p) for p in (1.0, 1.5, 2.0, 3.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_subgrid_has_smaller_variation():
    v = np.random.default_rng(5).normal(size=60)
    assert p_variation_exact(v[::3], 2.0) <= p_variation_exact(v, 2.0)


def test_local_time_variation_stabilises_above_threshold():
    # alpha = 1.7: bounded p-variation for p > 2/(alpha - 1). A single field is
    # noisy, so compare the median last-step change over an ensemble.
    a = 1.7
    crit = 2 / (a - 1)
    above, below = [], []
    for seed in ensemble_seeds(2024, 12):
        f = estimate_local_time(simulate_path(a, 1.0, 2 ** 22, 0.1, int(seed)), bandwidth=0.0025).values
        for p, acc in ((crit + 0.5, above), (crit - 0.5, below)):
            coarse, fine = p_variation_exact(f[::2], p), p_variation_exact(f, p)
            acc.append((fine - coarse) / coarse)
    assert np.median(above) < 0.1
    assert np.median(below) > np.median(above)


# -- dyadic bound --------------------------------------------------------------------------

def test_dyadic_bound_constant_is_zero():
    b = dyadic_variation_bound(np.full(17, 2.0), 2.0)
    assert b.bound == 0.0


def test_dyadic_bound_ramp_partial_sum():
    N = 10
    v = np.linspace(0, 1, 2 ** N + 1)
    b = dyadic_variation_bound(v, 2.0, 1.5)
    expect = sum(n ** 1.5 * 2.0 ** -n for n in range(1, N + 1))
    assert b.raw_sum == pytest.approx(expect, rel=1e-12)
    assert b.tail > 0


@pytest.mark.parametrize("seed", range(5))
def test_dyadic_bound_dominates_exact(seed):
    v = np.cumsum(np.random.default_rng(seed).normal(size=2 ** 9 + 1)) / 20
    for p in (1.5, 2.5):
        assert dyadic_variation_bound(v, p).bound >= p_variation_exact(v, p)


def test_dyadic_bound_preconditions():
    with pytest.raises(ValueError):
        dyadic_variation_bound(np.zeros(10), 2.0)
    with pytest.raises(ValueError):
        dyadic_variation_bound(np.zeros(3), 2.0)
    with pytest.raises(ValueError):
        dyadic_variation_bound(np.zeros(17), 2.0, gamma=0.5)
    # default gamma sits just above p - 1
    assert dyadic_variation_bound(np.arange(17.0), 2.0).constant > 0


# -- controls --------------------------------------------------------------------------

def test_control_of_constant_is_zero():
    x = np.linspace(0, 1, 11)
    w = total_variation_control(GridFunction(x, np.ones_like(x)), 2.0)
    assert w(0.1, 0.9) == 0.0 and w(0.3, 0.3) == 0.0


def test_control_of_identity_is_length():
    x = np.linspace(0, 1, 11)
    w = total_variation_control(GridFunction(x, x), 1.0)
    for a, b in [(0.0, 1.0), (0.13, 0.77), (0.5, 0.55)]:
        assert w(a, b) == pytest.approx(b - a)


def test_control_superadditive_on_random_triples():
    rng = np.random.default_rng(7)
    x = np.linspace(0, 1, 12)
    w = total_variation_control(GridFunction(x, rng.normal(size=12)), 2.0)
    for _ in range(200):
        a, b, c = np.sort(rng.random(3))
        assert w(a, b) + w(b, c) <= w(a, c) + 1e-10
    for i in range(len(x) - 2):
        assert w(x[i], x[i + 1]) + w(x[i + 1], x[i + 2]) <= w(x[i], x[i + 2]) + 1e-12


def test_control_matches_dp_on_subgrid():
    x = np.linspace(0, 1, 13)
    v = np.random.default_rng(8).normal(size=13)
    w = total_variation_control(GridFunction(x, v), 1.5)
    assert w(x[2], x[9]) == pytest.approx(brute_force_pvar(v[2:10], 1.5))


def test_augmented_control_adds_length():
    x = np.linspace(0, 2, 21)
    w = total_variation_control(GridFunction(x, x ** 2), 1.0, augmented=True)
    assert w(0.5, 1.5) == pytest.approx(1.5 ** 2 - 0.5 ** 2 + 1.0)
    assert w.with_augmentation(False)(0.5, 1.5) == pytest.approx(2.0)


# -- equalised partitions --------------------------------------------------------------

def test_length_control_splits_uniformly():
    part = control_equalized_partition(length_control(0, 1), 0.0, 1.0, 2)
    assert np.allclose(part.points, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
    assert control_equalized_partition(length_control(0, 1), 0.0, 1.0, 0).points.tolist() == [0.0, 1.0]


def test_square_control_midpoint_is_golden():
    x = np.linspace(0, 1, 2 ** 12 + 1)
    w1 = total_variation_control(GridFunction(x, x ** 2), 1.0, augmented=True)
    part = control_equalized_partition(w1, 0.0, 1.0, 1)
    # piecewise-linear x^2 differs from x^2 by at most h^2/4 inside a cell
    assert part.points[1] == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-7)


def test_partitions_are_nested_and_equalised():
    rng = np.random.default_rng(9)
    x = np.linspace(-1, 1, 201)
    w1 = total_variation_control(GridFunction(x, np.cumsum(rng.normal(size=201)) / 10), 2.0,
                                 augmented=True)
    total = float(w1.cumulative(1.0) - w1.cumulative(-1.0))
    prev = None
    for m in range(6):
        part = control_equalized_partition(w1, -1.0, 1.0, m)
        assert len(part) == 2 ** m + 1
        target = w1.cumulative(-1.0) + total * np.arange(2 ** m + 1) / 2 ** m
        assert np.max(np.abs(w1.cumulative(part.points) - target)) <= 1e-10 * total
        if prev is not None:
            assert np.array_equal(part.points[::2], prev.points)
        prev = part


def test_flat_control_cannot_be_bracketed():
    x = np.linspace(0, 1, 11)
    w = total_variation_control(GridFunction(x, np.zeros_like(x)), 1.0, augmented=False)
    with pytest.raises(ValueError):
        control_equalized_partition(w, 0.0, 1.0, 2)


# -- theta distance ------------------------------------------------------------------------

def _lift(L, g, levels=2):
    x = np.linspace(0, 1, len(L))
    return lift_piecewise_linear(TwoPath(x, np.asarray(L, float), np.asarray(g, float)), levels)


def test_theta_distance_zero_on_equal_lifts():
    rng = np.random.default_rng(10)
    X = _lift(rng.normal(size=17), rng.normal(size=17))
    assert theta_distance(X, X, 2.5) == 0.0


def test_theta_distance_three_point_oracle():
    X = _lift([0.0, 1.0, 0.5], [0.0, 0.0, 0.0])
    Y = _lift([0.0, 0.2, 0.9], [0.0, 0.0, 0.0])
    # level-1 differences: whole interval 0.5 - 0.9; halves 0.8 and -1.2
    whole, halves = 0.4 ** 2, 0.8 ** 2 + 1.2 ** 2
    assert theta_distance(X, Y, 2.0, levels=1) == pytest.approx(max(whole, halves) ** 0.5, rel=1e-14)


def test_theta_distance_level_one_only_difference():
    rng = np.random.default_rng(13)
    X = _lift(rng.normal(size=9), rng.normal(size=9))
    bumped = tuple((t[0] + rng.normal(size=t[0].shape),) + tuple(t[1:]) for t in X.tensors)
    Y = DyadicLift(X.points, X.path, bumped, X.levels)
    assert theta_distance(X, Y, 2.5) == pytest.approx(theta_distance(X, Y, 2.5, levels=1), rel=1e-14)


def test_theta_distance_grid_restriction_dominates_dyadic():
    rng = np.random.default_rng(11)
    X = _lift(rng.normal(size=9), rng.normal(size=9))
    Y = _lift(rng.normal(size=9), rng.normal(size=9))
    assert theta_distance(X, Y, 2.5, restrict="grid") >= theta_distance(X, Y, 2.5) - 1e-14


def test_theta_distance_triangle_inequality_level_one():
    rng = np.random.default_rng(12)
    for _ in range(20):
        X, Y, W = (_lift(rng.normal(size=9), rng.normal(size=9)) for _ in range(3))
        for restrict in ("dyadic", "grid"):
            d = lambda a, b: theta_distance(a, b, 2.0, levels=1, restrict=restrict)  # noqa: E731
            assert d(X, Y) <= d(X, W) + d(W, Y) + 1e-12


def test_theta_distance_rejects_mismatch():
    X = _lift(np.zeros(9), np.zeros(9))
    Y = _lift(np.zeros(17), np.zeros(17))
    with pytest.raises(ValueError):
        theta_distance(X, Y, 2.5)
    with pytest.raises(ValueError):
        theta_distance(X, X, 4.5)
