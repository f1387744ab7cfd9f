"""p-variation on grids, control functions, control-equalised partitions and
the theta-variation distance between multiplicative functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

__all__ = [
    "Partition",
    "ControlFunction",
    "p_variation_exact",
    "p_variation_prefix",
    "DyadicBound",
    "dyadic_variation_bound",
    "total_variation_control",
    "length_control",
    "control_equalized_partition",
    "theta_distance",
]


@dataclass(frozen=True, eq=False)
class Partition:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or len(pts) < 2:
            raise ValueError("a partition needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.points)))

    def refine(self) -> "Partition":
        """Insert every midpoint."""
        p = self.points
        out = np.empty(2 * len(p) - 1)
        out[0::2] = p
        out[1::2] = 0.5 * (p[:-1] + p[1:])
        return Partition(out)

    def union(self, other: "Partition") -> "Partition":
        return Partition(np.union1d(self.points, other.points))

    def is_refinement_of(self, other: "Partition") -> bool:
        return bool(np.all(np.isin(other.points, self.points)))


def _turning_points(v: np.ndarray) -> np.ndarray:
    """Indices of the endpoints and strict turning points of a sequence.

    For p >= 1, dropping a point that sits inside a monotone run never lowers the
    p-variation sum, so the supremum is attained on these indices.
    """
    d = np.diff(v)
    nz = np.flatnonzero(d != 0)
    if len(nz) == 0:
        return np.array([0, len(v) - 1])
    s = np.sign(d[nz])
    # a run ends where the sign of the next nonzero increment flips
    turn = nz[np.flatnonzero(s[1:] != s[:-1])] + 1
    idx = np.concatenate(([0], turn, [len(v) - 1]))
    return np.unique(idx)


def p_variation_prefix(values, p: float) -> np.ndarray:
    """``V[j]`` = exact p-variation of ``values[0..j]`` for every ``j``.

    Plain O(G^2) dynamic programme: ``V[j] = max_{k<j} V[k] + |v_j - v_k|^p``.
    """
    v = np.asarray(values, dtype=float)
    if p < 1:
        raise ValueError("p must be at least 1")
    V = np.zeros(len(v))
    for j in range(1, len(v)):
        V[j] = np.max(V[:j] + np.abs(v[j] - v[:j]) ** p)
    return V


def p_variation_exact(values, p: float, *, reduce: bool = True) -> float:
    """Supremum over sub-partitions of the grid of ``sum |f(x_i) - f(x_{i-1})|^p``.

    With ``reduce`` the dynamic programme runs on turning points only, which is
    exact for ``p >= 1`` and much faster on long, locally monotone inputs.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        raise ValueError("need at least two values")
    if p < 1:
        raise ValueError("p must be at least 1")
    if reduce:
        v = v[_turning_points(v)]
    return float(p_variation_prefix(v, p)[-1])


class DyadicBound(NamedTuple):
    bound: float
    raw_sum: float
    constant: float
    tail: float
    level_sums: np.ndarray


def dyadic_variation_bound(values_on_dyadics, p: float, gamma: float | None = None) -> DyadicBound:
    """Dyadic upper bound for the p-variation on ``2^N + 1`` dyadic samples.

    Returns ``C(p, gamma) sum_{n=1}^N n^gamma sum_k |Delta_{n,k}|^p`` with
    ``C = 2^(p-1) zeta(gamma/(p-1))^(p-1)``. Any sub-partition increment splits
    into at most two dyadic intervals per level, and Hoelder's inequality with
    weights ``n^gamma`` gives the constant. ``tail`` is the last level's term times
    the ratio of the last two level terms, summed geometrically (0 when that
    ratio is not below 1), as an estimate of the truncated remainder.
    """
    v = np.asarray(values_on_dyadics, dtype=float)
    N = int(round(math.log2(len(v) - 1))) if len(v) > 1 else 0
    if len(v) != 2 ** N + 1:
        raise ValueError("expected 2^N + 1 dyadic samples")
    if N < 2:
        raise ValueError("need at least two dyadic levels")
    if not p > 1:
        raise ValueError("p must exceed 1")
    if gamma is None:
        gamma = p - 1.0 + 1e-6
    if not gamma > p - 1:
        raise ValueError("gamma must exceed p - 1")
    terms = np.empty(N)
    for n in range(1, N + 1):
        coarse = v[:: 2 ** (N - n)]
        terms[n - 1] = n ** gamma * np.sum(np.abs(np.diff(coarse)) ** p)
    raw = float(terms.sum())
    const = 2.0 ** (p - 1.0) * float(special.zeta(gamma / (p - 1.0))) ** (p - 1.0)
    tail = 0.0
    if terms[-2] > 0:
        r = terms[-1] / terms[-2]
        tail = float(terms[-1] * r / (1.0 - r)) if r < 1 else float("inf")
    return DyadicBound(const * raw, raw, const, tail, terms)


@dataclass(frozen=True, eq=False)
class ControlFunction:
    """A control ``w(a, b)`` with an optional length augmentation.

    ``cumulative(x)`` is ``w(x_lo, x)``; with ``augmented`` the length ``x - x_lo``
    is added, which makes it strictly increasing.
    """

    evaluator: Callable[[float, float], float]
    cumulative_base: Callable
    x_lo: float
    x_hi: float
    augmented: bool = True

    def __call__(self, a: float, b: float) -> float:
        w = self.evaluator(a, b)
        return w + (b - a) if self.augmented else w

    def cumulative(self, x):
        x = np.asarray(x, dtype=float)
        w = self.cumulative_base(x)
        return w + (x - self.x_lo) if self.augmented else w

    def with_augmentation(self, augmented: bool = True) -> "ControlFunction":
        return ControlFunction(self.evaluator, self.cumulative_base, self.x_lo, self.x_hi, augmented)


def length_control(x_lo: float, x_hi: float) -> ControlFunction:
    """``w = 0``; augmented this is the plain length ``b - a``."""
    return ControlFunction(lambda a, b: 0.0, lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                           float(x_lo), float(x_hi), True)


def total_variation_control(g, q: float, augmented: bool = False) -> ControlFunction:
    """q-variation control of the piecewise-linear interpolant of ``g``.

    ``w(a, b)`` is evaluated exactly: for ``q >= 1`` the supremum over partitions
    of a piecewise-linear function is attained on its breakpoints in ``(a, b)``
    together with ``a`` and ``b``. The one-variable map ``w(x_lo, x)`` is the
    exact dynamic-programme prefix at grid points, interpolated linearly inside
    cells.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    grid = np.asarray(g.grid, dtype=float)
    vals = np.asarray(g.values, dtype=float)
    prefix = p_variation_prefix(vals, q)

    def evaluator(a: float, b: float) -> float:
        if b < a:
            raise ValueError("need a <= b")
        if b == a:
            return 0.0
        inner = (grid > a) & (grid < b)
        xs = np.concatenate(([a], grid[inner], [b]))
        return p_variation_exact(np.interp(xs, grid, vals), q)

    def cumulative(x):
        return np.interp(x, grid, prefix)

    return ControlFunction(evaluator, cumulative, float(grid[0]), float(grid[-1]), augmented)


def control_equalized_partition(w1: ControlFunction, x_lo: float, x_hi: float, m: int,
                                rtol: float = 1e-10, max_iter: int = 200) -> Partition:
    """Points with ``w1(x_lo, x_l) = (l / 2^m) w1(x_lo, x_hi)``, by bisection.

    Targets at lower levels are exact dyadic fractions of the same total, so the
    partitions are nested across ``m``.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if not x_hi > x_lo:
        raise ValueError("need x_lo < x_hi")
    base = float(w1.cumulative(np.asarray(x_lo)))
    total = float(w1.cumulative(np.asarray(x_hi))) - base
    if not total > 0:
        raise ValueError("control is not strictly increasing on the interval")
    k = 2 ** m
    targets = base + total * np.arange(1, k) / k
    lo = np.full(k - 1, float(x_lo))
    hi = np.full(k - 1, float(x_hi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = w1.cumulative(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-15 * max(1.0, abs(x_lo), abs(x_hi))):
            break
    mid = 0.5 * (lo + hi)
    err = np.abs(w1.cumulative(mid) - targets)
    if np.any(err > rtol * total):
        raise ValueError("control could not be bracketed; is it strictly increasing?")
    pts = np.concatenate(([x_lo], mid, [x_hi]))
    if np.any(np.diff(pts) <= 0):
        raise ValueError("control is not strictly increasing on the interval")
    return Partition(pts)


def _dyadic_tree_sup(diff_levels: list[np.ndarray], exponent: float) -> float:
    """Sup over partitions made of whole dyadic intervals.

    ``diff_levels[n]`` holds the norms of the differences on the ``2^n`` level-n
    intervals. ``best(n, k) = max(|d_{n,k}|^e, best(n+1, 2k) + best(n+1, 2k+1))``.
    """
    best = diff_levels[-1] ** exponent
    for n in range(len(diff_levels) - 2, -1, -1):
        best = np.maximum(diff_levels[n] ** exponent, best[0::2] + best[1::2])
    return float(best[0])


def _grid_sup(column_norm: Callable[[int], np.ndarray], n_pts: int, exponent: float) -> float:
    V = np.zeros(n_pts)
    for j in range(1, n_pts):
        V[j] = np.max(V[:j] + column_norm(j) ** exponent)
    return float(V[-1])


def theta_distance(X, Y, theta: float, levels: int | None = None, *, restrict: str = "dyadic") -> float:
    """``max_i (sup_D sum |X^i - Y^i|^(theta/i))^(i/theta)`` over ``i <= levels``.

    ``X`` and ``Y`` are :class:`~stable_rough.rough_path.DyadicLift` objects of
    equal depth over the same points. With ``restrict="dyadic"`` the sup runs
    over partitions made of whole dyadic intervals (linear time); ``"grid"``
    runs the quadratic programme over every pair of finest-level points.
    """
    if X.depth != Y.depth or len(X.points) != len(Y.points):
        raise ValueError("lifts are defined on different dyadic families")
    if not 2 <= theta < 4:
        raise ValueError("theta must lie in [2, 4)")
    if levels is None:
        levels = int(math.floor(theta))
    levels = min(levels, X.levels, Y.levels)
    out = 0.0
    for i in range(1, levels + 1):
        e = theta / i
        if restrict == "dyadic":
            diffs = [np.sqrt(np.sum((X.level(n, i) - Y.level(n, i)).reshape(2 ** n, -1) ** 2, axis=1))
                     for n in range(X.depth + 1)]
            s = _dyadic_tree_sup(diffs, e)
        elif restrict == "grid":
            s = _grid_sup(lambda j: np.linalg.norm(
                (X.column(j, i) - Y.column(j, i)).reshape(j, -1), axis=1), len(X.points), e)
        else:
            raise ValueError("restrict must be 'dyadic' or 'grid'")
        out = max(out, s ** (1.0 / e))
    return out
