"""Occupation-density estimates of the local time field ``x -> L_t^x``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .stable_process import SamplePath

__all__ = [
    "LocalTimeField",
    "default_bandwidth",
    "default_grid",
    "estimate_local_time",
    "local_time_at",
    "occupation_check",
    "sigma_sq",
    "barlow_modulus_ratio",
    "barlow_limit",
]


@dataclass(frozen=True, eq=False)
class LocalTimeField:
    grid: np.ndarray
    values: np.ndarray
    t: float
    bandwidth: float
    source_seed: int = -1
    alpha: float | None = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(v < 0):
            raise ValueError("local time must be nonnegative")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def mass(self) -> float:
        return _trapz(self.values, self.grid)

    def at(self, x):
        """Piecewise-linear evaluation; zero outside the grid."""
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def padded(self) -> "LocalTimeField":
        """Add one zero sample at each end unless the field already vanishes there."""
        g, v = self.grid, self.values
        if v[0] == 0 and v[-1] == 0:
            return self
        h = g[1] - g[0]
        g = np.concatenate(([g[0] - h], g, [g[-1] + h]))
        v = np.concatenate(([0.0], v, [0.0]))
        return LocalTimeField(g, v, self.t, self.bandwidth, self.source_seed, self.alpha)


def _trapz(y, x) -> float:
    fn = getattr(np, "trapezoid", None) or np.trapz
    return float(fn(y, x))


def default_bandwidth(alpha: float, t: float, n_steps: int) -> float:
    """Twice the typical step scale ``(t/n)^(1/alpha)``."""
    return 2.0 * (t / n_steps) ** (1.0 / alpha)


def default_grid(path: SamplePath, bandwidth: float, spacing: float | None = None) -> np.ndarray:
    """Uniform grid covering the path range plus one bandwidth on each side.

    The grid is anchored at multiples of ``spacing`` (default: the bandwidth),
    so it contains 0.
    """
    h = bandwidth if spacing is None else spacing
    lo = np.floor((path.values.min() - bandwidth) / h) - 1
    hi = np.ceil((path.values.max() + bandwidth) / h) + 1
    return np.arange(lo, hi + 1) * h


def _occupation(sorted_x: np.ndarray, points: np.ndarray, bandwidth: float, dt: float) -> np.ndarray:
    half = 0.5 * bandwidth
    lo = np.searchsorted(sorted_x, points - half, side="right")
    hi = np.searchsorted(sorted_x, points + half, side="left")
    return (hi - lo) * dt / bandwidth


def estimate_local_time(path: SamplePath, grid=None, bandwidth: float | None = None) -> LocalTimeField:
    """Box-kernel occupation density.

    ``values[i] = (1/bandwidth) sum_k dt 1{|X_k - x_i| < bandwidth/2}`` over the
    left endpoints ``k = 0..n-1`` of the time steps.
    """
    t = path.t_end
    if bandwidth is None:
        bandwidth = default_bandwidth(path.alpha, t, path.n_steps)
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    if grid is None:
        grid = default_grid(path, bandwidth)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing")
    if np.max(np.diff(grid)) > bandwidth * (1 + 1e-9):
        raise ValueError("grid spacing must not exceed the bandwidth")
    x = path.values[:-1]
    if grid[0] > x.min() - bandwidth or grid[-1] < x.max() + bandwidth:
        raise ValueError("grid does not cover the path range plus one bandwidth")
    vals = _occupation(np.sort(x), grid, bandwidth, path.dt)
    return LocalTimeField(grid, vals, t, float(bandwidth), path.seed, path.alpha)


def local_time_at(path: SamplePath, x, bandwidth: float | None = None):
    """The estimator of :func:`estimate_local_time` evaluated at arbitrary points."""
    if bandwidth is None:
        bandwidth = default_bandwidth(path.alpha, path.t_end, path.n_steps)
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    out = _occupation(np.sort(path.values[:-1]), pts, bandwidth, path.dt)
    return float(out[0]) if np.ndim(x) == 0 else out


def occupation_check(path: SamplePath, field: LocalTimeField, phi: Callable) -> tuple[float, float]:
    """``(int_0^t phi(X_s) ds, int phi(x) L_t^x dx)`` from the same path."""
    lhs = float(np.sum(phi(path.values[:-1])) * path.dt)
    rhs = _trapz(phi(field.grid) * field.values, field.grid)
    return lhs, rhs


def sigma_sq(ensemble: Sequence[LocalTimeField], x: float, h: float) -> float:
    """Monte-Carlo ``E (L^{x+h} - L^x)^2``."""
    if len(ensemble) < 2:
        raise ValueError("need at least two fields")
    if h == 0:
        return 0.0
    d = []
    for f in ensemble:
        if not (f.grid[0] <= min(x, x + h) and max(x, x + h) <= f.grid[-1]):
            raise ValueError("x and x+h must lie inside every field's grid")
        a, b = np.interp([x, x + h], f.grid, f.values)
        d.append(b - a)
    return float(np.mean(np.square(d)))


def barlow_modulus_ratio(field: LocalTimeField, delta: float) -> float:
    """``sup |L^a - L^b| / (|b-a|^((alpha-1)/2) log(1/|b-a|)^(1/2))`` over ``|a-b| < delta``.

    Only pairs with ``|a-b| < 1`` enter, where the logarithm is positive.
    """
    if field.alpha is None:
        raise ValueError("the field must record alpha")
    g, v = field.grid, field.values
    e = 0.5 * (field.alpha - 1.0)
    best = 0.0
    for lag in range(1, len(g)):
        d = g[lag:] - g[:-lag]
        ok = (d < delta) & (d < 1.0)
        if not np.any(ok):
            break
        num = np.abs(v[lag:] - v[:-lag])[ok]
        den = d[ok] ** e * np.sqrt(np.log(1.0 / d[ok]))
        best = max(best, float(np.max(num / den)))
    return best


def barlow_limit(field: LocalTimeField, c: float) -> float:
    """``2 c^(1/2) (sup L)^(1/2)``, the symmetric-case limit value."""
    return 2.0 * np.sqrt(c) * np.sqrt(float(field.values.max()))
