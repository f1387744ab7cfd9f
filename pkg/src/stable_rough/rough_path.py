"""Piecewise-linear lifts over ``Z = (L, g)``, Chen products, the geometric rough
path built as a Cauchy limit in theta-variation, and integrals against it.

Component 1 of ``Z`` is the local time ``L`` and component 2 the integrand
``g`` (array indices 0 and 1). ``Z2[i, j]`` is the iterated integral
``int_{s<u} dZ^i_s dZ^j_u``; in particular ``Z2[1, 0] = int (g_s - g_a) dL_s``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, NonCauchyWarning, RegimeError
from .variation import (ControlFunction, control_equalized_partition, theta_distance,
                        total_variation_control)

__all__ = [
    "TensorLevels",
    "TwoPath",
    "DyadicLift",
    "chen_multiply",
    "tensor_inverse",
    "segment_tensors",
    "signature",
    "interpolate_Zm",
    "lift_piecewise_linear",
    "refine_lift",
    "build_geometric_rough_path",
    "theta_window",
    "default_theta",
    "two_path_from_field",
    "rough_integral_gdL",
    "rough_integral_LdL",
    "rough_integral_pipeline",
    "rough_integral_twopath",
    "one_form_integral",
    "tau_delta_transform",
    "cadlag_integral_L_dg",
    "integrand_continuity_check",
    "lift_to_json",
]


# -- tensor algebra ------------------------------------------------------------

def _chen(a, b):
    """Batched truncated tensor product; ``a`` and ``b`` are tuples of levels."""
    a1, a2, a3 = a
    b1, b2, b3 = b
    c1 = a1 + b1
    c2 = a2 + b2 + np.einsum("...i,...j->...ij", a1, b1)
    c3 = None
    if a3 is not None and b3 is not None:
        c3 = (a3 + b3 + np.einsum("...i,...jk->...ijk", a1, b2)
              + np.einsum("...ij,...k->...ijk", a2, b1))
    return c1, c2, c3


def _inverse(a):
    a1, a2, a3 = a
    i2 = -a2 + np.einsum("...i,...j->...ij", a1, a1)
    i3 = None
    if a3 is not None:
        i3 = (-a3 + np.einsum("...i,...jk->...ijk", a1, a2)
              + np.einsum("...ij,...k->...ijk", a2, a1)
              - np.einsum("...i,...j,...k->...ijk", a1, a1, a1))
    return -a1, i2, i3


@dataclass(frozen=True, eq=False)
class TensorLevels:
    """Truncated multiplicative functional ``(1, Z1, Z2, Z3)`` on a pair ``(a, b)``."""

    level1: np.ndarray
    level2: np.ndarray
    level3: np.ndarray | None = None
    pair: tuple = (None, None)

    @classmethod
    def identity(cls, levels: int = 3, pair=(None, None)) -> "TensorLevels":
        return cls(np.zeros(2), np.zeros((2, 2)), np.zeros((2, 2, 2)) if levels >= 3 else None, pair)

    @property
    def levels(self) -> int:
        return 3 if self.level3 is not None else 2

    def as_tuple(self):
        return (self.level1, self.level2, self.level3)

    def max_abs_diff(self, other: "TensorLevels") -> float:
        d = max(np.max(np.abs(self.level1 - other.level1)), np.max(np.abs(self.level2 - other.level2)))
        if self.level3 is not None and other.level3 is not None:
            d = max(d, np.max(np.abs(self.level3 - other.level3)))
        return float(d)

    def to_dict(self) -> dict:
        out = {"pair": list(self.pair), "level0": 1.0, "level1": self.level1.tolist(),
               "level2": self.level2.tolist()}
        if self.level3 is not None:
            out["level3"] = self.level3.tolist()
        return out


def chen_multiply(A: TensorLevels, B: TensorLevels) -> TensorLevels:
    """``A`` on ``(a, b)`` times ``B`` on ``(b, c)``."""
    if A.pair[1] is not None and B.pair[0] is not None and A.pair[1] != B.pair[0]:
        raise ValueError(f"pairs {A.pair} and {B.pair} do not share a midpoint")
    c1, c2, c3 = _chen(A.as_tuple(), B.as_tuple())
    return TensorLevels(c1, c2, c3, (A.pair[0], B.pair[1]))


def tensor_inverse(A: TensorLevels) -> TensorLevels:
    i1, i2, i3 = _inverse(A.as_tuple())
    return TensorLevels(i1, i2, i3, (A.pair[1], A.pair[0]))


def segment_tensors(dz: np.ndarray, levels: int = 3):
    """Lifts of straight segments: level ``j`` is ``dz^{(x) j} / j!``."""
    dz = np.asarray(dz, dtype=float)
    l2 = 0.5 * np.einsum("...i,...j->...ij", dz, dz)
    l3 = np.einsum("...i,...j,...k->...ijk", dz, dz, dz) / 6.0 if levels >= 3 else None
    return dz.copy(), l2, l3


# -- paths -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwoPath:
    """Samples of ``Z = (L, g)`` on an increasing (not necessarily uniform) grid.

    ``jumps`` are pairs ``(x_r, g_left)``; the sample at ``x_r`` is the right value
    of ``g``. ``L`` is continuous and carries no tags.
    """

    x: np.ndarray
    L: np.ndarray
    g: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        L = np.asarray(self.L, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if not (x.shape == L.shape == g.shape) or x.ndim != 1 or len(x) < 2:
            raise ValueError("x, L and g must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        jumps = tuple(sorted((float(a), float(b)) for a, b in self.jumps))
        for xr, _ in jumps:
            i = int(np.searchsorted(x, xr))
            if i >= len(x) or x[i] != xr or i == 0:
                raise ValueError(f"jump at {xr} is not an interior sample point")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "jumps", jumps)

    @property
    def values(self) -> np.ndarray:
        return np.stack([self.L, self.g], axis=1)

    def at(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.stack([np.interp(xs, self.x, self.L), np.interp(xs, self.x, self.g)], axis=-1)


def signature(Z: TwoPath | np.ndarray, levels: int = 3) -> TensorLevels:
    """Lift of the whole piecewise-linear path, by a balanced Chen reduction."""
    vals = Z.values if isinstance(Z, TwoPath) else np.asarray(Z, dtype=float)
    t = segment_tensors(np.diff(vals, axis=0), levels)
    while len(t[0]) > 1:
        n = len(t[0])
        odd = n % 2
        left = tuple(None if a is None else a[0:n - odd:2] for a in t)
        right = tuple(None if a is None else a[1:n - odd:2] for a in t)
        c = _chen(left, right)
        if odd:
            c = tuple(None if a is None else np.concatenate([a, b[-1:]]) for a, b in zip(c, t))
        t = c
    x = Z.x if isinstance(Z, TwoPath) else None
    pair = (float(x[0]), float(x[-1])) if x is not None else (0, len(vals) - 1)
    return TensorLevels(t[0][0], t[1][0], None if t[2] is None else t[2][0], pair)


@dataclass(frozen=True, eq=False)
class DyadicLift:
    """Lifts on every dyadic pair of a piecewise-linear path.

    ``tensors[n]`` holds the three level arrays for the ``2^n`` intervals of level
    ``n`` (level 3 is ``None`` for two-level lifts). ``path`` holds the values of
    ``Z`` at the ``2^depth + 1`` finest points ``points``.
    """

    points: np.ndarray
    path: np.ndarray
    tensors: tuple
    levels: int

    @property
    def depth(self) -> int:
        return len(self.tensors) - 1

    def level(self, n: int, i: int) -> np.ndarray:
        return self.tensors[n][i - 1]

    def __getitem__(self, key) -> TensorLevels:
        n, k = key
        t = self.tensors[n]
        step = 2 ** (self.depth - n)
        pair = (k * step, (k + 1) * step)
        return TensorLevels(t[0][k], t[1][k], None if t[2] is None else t[2][k], pair)

    @property
    def total(self) -> TensorLevels:
        return self[0, 0]

    def prefix(self):
        """Lifts over ``(0, j)`` for every finest point ``j`` (``j = 0`` is the identity)."""
        fine = self.tensors[self.depth]
        n = len(fine[0])
        out = [np.zeros((n + 1,) + a.shape[1:]) if a is not None else None for a in fine]
        acc = tuple(np.zeros(a.shape[1:]) if a is not None else None for a in fine)
        for j in range(n):
            acc = _chen(acc, tuple(None if a is None else a[j] for a in fine))
            for lvl, a in enumerate(acc):
                if a is not None:
                    out[lvl][j + 1] = a
        return tuple(out)

    def column(self, j: int, i: int) -> np.ndarray:
        """Level ``i`` of the lifts over ``(a, j)`` for all finest points ``a < j``."""
        pre = self._prefix_cache()
        inv = _inverse(tuple(None if a is None else a[:j] for a in pre))
        tail = tuple(None if a is None else np.broadcast_to(a[j], a[:j].shape) for a in pre)
        return _chen(inv, tail)[i - 1]

    def _prefix_cache(self):
        cache = self.__dict__.get("_prefix")
        if cache is None:
            cache = self.prefix()
            object.__setattr__(self, "_prefix", cache)
        return cache

    def between(self, i: int, j: int) -> TensorLevels:
        pre = self._prefix_cache()
        inv = _inverse(tuple(None if a is None else a[i] for a in pre))
        out = _chen(inv, tuple(None if a is None else a[j] for a in pre))
        return TensorLevels(out[0], out[1], out[2], (i, j))


def _fold_up(finest, depth: int):
    levels = [finest]
    cur = finest
    for _ in range(depth):
        left = tuple(None if a is None else a[0::2] for a in cur)
        right = tuple(None if a is None else a[1::2] for a in cur)
        cur = _chen(left, right)
        levels.append(cur)
    return tuple(reversed(levels))


def lift_piecewise_linear(Z: TwoPath, levels: int = 3, depth: int | None = None) -> DyadicLift:
    """Dyadic lift of a path with ``2^m + 1`` breakpoints.

    Breakpoints are the level-``m`` dyadic points. For ``depth > m`` each
    segment is cut into ``2^(depth-m)`` equal pieces, whose lifts are
    ``(dZ / 2^(depth-m))^{(x) j} / j!``. Coarser levels come from Chen products.
    """
    if levels not in (2, 3):
        raise ValueError("levels must be 2 or 3")
    n_seg = len(Z.x) - 1
    m = int(round(math.log2(n_seg)))
    if 2 ** m != n_seg:
        raise ValueError("lift_piecewise_linear needs 2^m + 1 breakpoints; use interpolate_Zm")
    if Z.jumps:
        raise ValueError("remove tagged jumps first (tau_delta_transform)")
    depth = m if depth is None else int(depth)
    if depth < m:
        raise ValueError("depth must be at least log2 of the segment count")
    sub = 2 ** (depth - m)
    vals = Z.values
    if sub > 1:
        frac = np.arange(sub) / sub
        inner = vals[:-1, None, :] + frac[None, :, None] * np.diff(vals, axis=0)[:, None, :]
        vals = np.concatenate([inner.reshape(-1, 2), vals[-1:]])
        xin = Z.x[:-1, None] + frac[None, :] * np.diff(Z.x)[:, None]
        pts = np.concatenate([xin.ravel(), Z.x[-1:]])
    else:
        pts = Z.x.copy()
    finest = segment_tensors(np.diff(vals, axis=0), levels)
    return DyadicLift(pts, vals, _fold_up(finest, depth), levels)


def refine_lift(lift: DyadicLift) -> DyadicLift:
    """The same piecewise-linear path viewed one dyadic level deeper."""
    vals = lift.path
    mid = 0.5 * (vals[:-1] + vals[1:])
    new = np.empty((2 * len(vals) - 1, 2))
    new[0::2] = vals
    new[1::2] = mid
    pts = np.empty(2 * len(lift.points) - 1)
    pts[0::2] = lift.points
    pts[1::2] = 0.5 * (lift.points[:-1] + lift.points[1:])
    finest = segment_tensors(np.diff(new, axis=0), lift.levels)
    return DyadicLift(pts, new, lift.tensors + (finest,), lift.levels)


# -- Z(m) and the Cauchy construction --------------------------------------------

def interpolate_Zm(Z: TwoPath, w1: ControlFunction, m: int) -> TwoPath:
    """``Z(m)``: the interpolation of ``Z`` through its control-equalised anchors.

    Between anchors ``Z(m)`` is linear in the ``w1`` parameter; the returned
    path holds its ``2^m + 1`` anchor samples.
    """
    if Z.jumps:
        raise ValueError("remove tagged jumps first (tau_delta_transform)")
    part = control_equalized_partition(w1, Z.x[0], Z.x[-1], m)
    v = Z.at(part.points)
    # anchors at the ends are exact; keep them bit-identical
    v[0], v[-1] = Z.values[0], Z.values[-1]
    return TwoPath(part.points, v[:, 0], v[:, 1])


def theta_window(alpha: float, q: float, p: float | None = None, levels: int = 2) -> tuple[float, float]:
    """Admissible ``theta`` interval ``(4/(2h + alpha - 1), 3 or 4)`` with ``h = 1/max(p, q)``."""
    if p is None:
        p = 2.0 / (alpha - 1.0) + 0.05
    h = 1.0 / max(p, q)
    return 4.0 / (2.0 * h + alpha - 1.0), 3.0 if levels == 2 else 4.0


def default_theta(alpha: float, q: float, p: float | None = None) -> tuple[float, int]:
    """Midpoint of the level-2 window if it is nonempty, else of the level-3 window."""
    lo, hi = theta_window(alpha, q, p, 2)
    if lo < hi and lo >= 2.0:
        return 0.5 * (lo + hi), 2
    if lo < 2.0:
        return 0.5 * (2.0 + hi), 2
    lo, hi = theta_window(alpha, q, p, 3)
    if lo < hi:
        return 0.5 * (max(lo, 3.0) + hi), 3
    raise RegimeError(f"no admissible theta for alpha={alpha}, q={q}")


def build_geometric_rough_path(Z: TwoPath, w1: ControlFunction, theta: float, m_max: int = 12,
                               tol: float = 1e-8, levels: int | None = None, m_min: int = 0,
                               restrict: str = "dyadic"):
    """Lift ``Z(m*)`` where ``m*`` is the first ``m`` with ``d_theta(Z(m+1), Z(m)) < tol``.

    Returns ``(lift, gaps)`` with ``gaps[m - m_min] = d_theta(Z(m+1), Z(m))`` computed
    on the dyadic family of depth ``m + 1``. Emits :class:`NonCauchyWarning` when the
    gaps fail to decrease three times in a row, and a warning if ``m_max`` is
    reached without meeting ``tol``.
    """
    if levels is None:
        levels = min(3, int(math.floor(theta)))
    gaps = []
    current = lift_piecewise_linear(interpolate_Zm(Z, w1, m_min), levels)
    m_star = None
    rises = 0
    for m in range(m_min, m_max):
        nxt = lift_piecewise_linear(interpolate_Zm(Z, w1, m + 1), levels)
        gap = theta_distance(refine_lift(current), nxt, theta, levels, restrict=restrict)
        gaps.append(gap)
        if len(gaps) > 1 and gaps[-1] >= gaps[-2]:
            rises += 1
            if rises >= 3:
                warnings.warn(f"theta-variation gaps stopped decreasing near m={m}",
                              NonCauchyWarning, stacklevel=2)
                rises = 0
        else:
            rises = 0
        if gap < tol:
            m_star = m
            break
        current = nxt
    gaps = np.asarray(gaps)
    if m_star is None:
        warnings.warn(f"tolerance {tol} not reached by m_max={m_max}", NonCauchyWarning, stacklevel=2)
        return current, gaps
    return current, gaps


# -- integrals -----------------------------------------------------------------

def _field_values(g, xs):
    return np.asarray(g(xs), dtype=float) * np.ones_like(xs)


def two_path_from_field(g, field) -> TwoPath:
    """``Z = (L, g)`` sampled on the local-time grid (padded with zero ends)."""
    f = field.padded()
    return TwoPath(f.grid, f.values, _field_values(g, f.grid))


def _compensated_sums(RP: DyadicLift, i: int, j: int, base: int):
    """Sums ``sum (Z2_{i,j}) + Z^i(x_{k-1}) dZ^j`` on each dyadic level."""
    out = []
    for n in range(RP.depth + 1):
        step = 2 ** (RP.depth - n)
        left = RP.path[:-1:step, i]
        t = RP.tensors[n]
        out.append(float(np.sum(t[1][:, i, j] + left * t[0][:, j])))
    return np.asarray(out)


def _limit(sums: np.ndarray, rtol: float = 1e-8) -> float:
    for n in range(1, len(sums)):
        if abs(sums[n] - sums[n - 1]) <= rtol * (1.0 + abs(sums[n])):
            return float(sums[n])
    if len(sums) == 1:
        return float(sums[0])
    raise ConvergenceError("compensated sums did not settle under refinement")


def rough_integral_gdL(g, field, RP: DyadicLift) -> float:
    """``int g dL`` as the limit of ``sum Z2_{(2,1)} + g(x_{k-1}) (L(x_k) - L(x_{k-1}))``."""
    if g is not None and field is not None:
        z0 = np.array([field.padded().values[0], _field_values(g, RP.points[:1])[0]])
        if np.max(np.abs(RP.path[0] - z0)) > 1e-9 * (1 + np.max(np.abs(z0))):
            raise ValueError("rough path was not built over this (L, g) pair")
    return _limit(_compensated_sums(RP, 1, 0, 0))


def rough_integral_LdL(RP: DyadicLift) -> float:
    """``int L dL`` via the ``(1,1)`` area entry."""
    return _limit(_compensated_sums(RP, 0, 0, 0))


def rough_integral_twopath(Z: TwoPath, alpha: float, q: float = 1.0, theta: float | None = None,
                           m_max: int = 18, tol: float = 1e-10, m_min: int = 0,
                           levels: int | None = None):
    """``int g dL`` along a continuous two-path ``Z = (L, g)`` through its lift.

    The control is the q-variation of ``g`` augmented by length. Returns
    ``(value, lift, gaps)``.
    """
    if Z.jumps:
        raise ValueError("g carries jumps; apply tau_delta_transform first")
    if theta is None:
        theta, lv = default_theta(alpha, q)
        levels = levels or lv
    w1 = total_variation_control(_Sampled(Z.x, Z.g), q, augmented=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCauchyWarning)
        RP, gaps = build_geometric_rough_path(Z, w1, theta, m_max=m_max, tol=tol,
                                              levels=levels, m_min=m_min)
    return rough_integral_gdL(None, None, RP), RP, gaps


def rough_integral_pipeline(g, field, q: float = 1.0, theta: float | None = None,
                            m_max: int = 18, tol: float = 1e-10, m_min: int = 0,
                            levels: int | None = None):
    """Build the lift over ``(L, g)`` on the (padded) field grid and integrate.

    Returns ``(value, lift, gaps)``.
    """
    Z = two_path_from_field(g, field)
    alpha = field.alpha if field.alpha is not None else 1.8
    return rough_integral_twopath(Z, alpha, q, theta, m_max, tol, m_min, levels)


@dataclass(frozen=True)
class _Sampled:
    grid: np.ndarray
    values: np.ndarray


def one_form_integral(RP: DyadicLift, Z: TwoPath | None = None) -> DyadicLift:
    """Integral of the one-form ``f(z) xi = (xi_1, z_2 xi_1)`` along the lift.

    On each finest dyadic segment ``(a, b)``, with ``F = f(Z_a)``, the almost
    rough path is

    * ``Y1 = F Z1 + (0, Z2_{21})``
    * ``Y2 = (F x F) Z2 + (F x F2)(Z3 + P Z3) + (F2 x F) Z3``
    * ``Y3 = (F x F x F) Z3``

    where ``F2(T) = (0, T_{21})`` and ``P`` swaps the first two indices. Second
    derivatives of the form vanish. Segments are combined by Chen products.
    """
    if RP.levels < 3:
        raise ValueError("the one-form integral needs a level-3 lift")
    if Z is not None and abs(Z.L[0] - RP.path[0, 0]) + abs(Z.g[0] - RP.path[0, 1]) > 1e-9:
        raise ValueError("path and lift start at different points")
    z1, z2, z3 = RP.tensors[RP.depth]
    ga = RP.path[:-1, 1]
    n = len(ga)
    F = np.zeros((n, 2, 2))
    F[:, 0, 0] = 1.0
    F[:, 1, 0] = ga
    y1 = np.einsum("nij,nj->ni", F, z1)
    y1[:, 1] += z2[:, 1, 0]
    y2 = np.einsum("npi,nqj,nij->npq", F, F, z2)
    sym = z3 + np.swapaxes(z3, 1, 2)
    y2[:, :, 1] += np.einsum("npi,ni->np", F, sym[:, :, 1, 0])
    y2[:, 1, :] += np.einsum("nqk,nk->nq", F, z3[:, 1, 0, :])
    y3 = np.einsum("npi,nqj,nrk,nijk->npqr", F, F, F, z3)
    path = np.concatenate([np.zeros((1, 2)), np.cumsum(y1, axis=0)])
    return DyadicLift(RP.points, path, _fold_up((y1, y2, y3), RP.depth), 3)


# -- cadlag integrands -------------------------------------------------------------

def tau_delta_transform(Z: TwoPath, delta: float = 1.0, q: float = 1.0):
    """Replace each tagged jump of ``g`` by a linear segment of length ``delta |jump|^q``.

    Returns ``(Z_delta, index_map)``. ``index_map[k]`` is the original sample index
    of point ``k`` of the new path, or ``-1`` for an inserted left-limit point.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    x, L, g = Z.x, Z.L, Z.g
    jump_at = {xr: gl for xr, gl in Z.jumps}
    shift = 0.0
    xs, Ls, gs, idx = [], [], [], []
    for i in range(len(x)):
        xi = float(x[i])
        if xi in jump_at:
            gl = jump_at[xi]
            xs.append(xi + shift)
            Ls.append(L[i])
            gs.append(gl)
            idx.append(-1)
            shift += delta * abs(g[i] - gl) ** q
        xs.append(xi + shift)
        Ls.append(L[i])
        gs.append(g[i])
        idx.append(i)
    xs = np.asarray(xs)
    # a zero-size jump inserts a zero-length segment; drop the duplicate point
    keep = np.concatenate(([True], np.diff(xs) > 0))
    out = TwoPath(xs[keep], np.asarray(Ls)[keep], np.asarray(gs)[keep])
    return out, np.asarray(idx)[keep]


def cadlag_integral_L_dg(Z: TwoPath, delta: float | None = None, q: float = 1.0,
                         levels: int = 2) -> float:
    """``int L dg`` for piecewise-linear ``L`` and cadlag ``g``.

    With ``delta=None`` the decomposition ``int L dg^c + sum_r L(x_r) (g(x_r) - g(x_r-))``
    is used. Otherwise the integral runs over the ``tau_delta`` extended path as
    ``L_a (g_b - g_a) + Z2_{(1,2)}`` from its lift.
    """
    if delta is None:
        gl = Z.g.copy()
        for xr, left in Z.jumps:
            gl[np.searchsorted(Z.x, xr)] = left
        dgc = gl[1:] - Z.g[:-1]
        cont = float(np.sum(0.5 * (Z.L[:-1] + Z.L[1:]) * dgc))
        jumps = sum(float(Z.L[np.searchsorted(Z.x, xr)]) * (Z.g[np.searchsorted(Z.x, xr)] - left)
                    for xr, left in Z.jumps)
        return cont + jumps
    ext, _ = tau_delta_transform(Z, delta, q)
    sig = signature(ext, levels)
    return float(ext.L[0] * sig.level1[1] + sig.level2[0, 1])


def integrand_continuity_check(g_seq: Sequence, g, field, theta: float | None = None,
                               q: float = 1.0, m_max: int = 14) -> np.ndarray:
    """``|int g_j dL - int g dL|`` with every integral taken through the rough pipeline."""
    ref, _, _ = rough_integral_pipeline(g, field, q=q, theta=theta, m_max=m_max)
    out = []
    for gj in g_seq:
        v, _, _ = rough_integral_pipeline(gj, field, q=q, theta=theta, m_max=m_max)
        out.append(abs(v - ref))
    return np.asarray(out)


def lift_to_json(lift: DyadicLift, max_level: int | None = None) -> str:
    """Nested-array JSON of every dyadic pair up to ``max_level``."""
    top = lift.depth if max_level is None else min(max_level, lift.depth)
    body = {"levels": lift.levels, "depth": lift.depth,
            "points": lift.points.tolist(), "path": lift.path.tolist(), "pairs": []}
    for n in range(top + 1):
        for k in range(2 ** n):
            d = lift[n, k].to_dict()
            d["dyadic"] = [n, k]
            body["pairs"].append(d)
    return json.dumps(body, sort_keys=True)
