"""Young integrals of sampled functions.

Samples are read as piecewise-linear interpolants (with tagged jumps). The
left-point Riemann-Stieltjes sum over the ``r``-fold uniform refinement of the
grid then has a closed form per cell, so refinement costs O(G) per level.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, YoungConditionError
from .frac_calc import GridFunction, _check_same_grid

__all__ = ["YoungResult", "young_integral", "young_integral_vs_local_time", "term_by_term_check",
           "check_young_exponents"]


class YoungResult(NamedTuple):
    value: float
    gap: float
    richardson: float
    levels: int


def check_young_exponents(p: float, q: float) -> None:
    if p < 1 or q < 1:
        raise YoungConditionError("variation exponents must be at least 1")
    if 1.0 / p + 1.0 / q <= 1.0:
        raise YoungConditionError(f"1/p + 1/q = {1 / p + 1 / q:.6g} <= 1; use the rough-path integral")


def _refined_sum(f0, df, g0, dg, jump_g, r: float) -> float:
    # cell i: f runs f0 -> f0 + df linearly, g likewise; r equal sub-steps.
    # r = inf gives the limit.
    w = 1.0 if np.isinf(r) else (r - 1.0) / r
    cells = dg * (f0 + 0.5 * w * df)
    jumps = jump_g * (f0 + w * df)
    return float(np.sum(cells) + np.sum(jumps))


def young_integral(f: GridFunction, g: GridFunction, p: float, q: float, *,
                   rtol: float = 1e-8, max_levels: int = 60) -> YoungResult:
    """``int f dg`` as the limit of left-point sums over dyadic refinements.

    ``p`` is the variation exponent of ``f`` and ``q`` that of ``g``. Refinement
    stops once three successive gaps are non-increasing and the last is below
    ``rtol (1 + |value|)``. The returned value is the limit of those sums, which
    is closed form for piecewise-linear inputs; ``gap`` is the last refinement
    gap and ``richardson`` the estimate ``2 S_{2r} - S_r``.
    """
    check_young_exponents(p, q)
    _check_same_grid(f, g)
    shared = {x for x, _ in f.jumps} & {x for x, _ in g.jumps}
    if shared:
        raise ValueError(f"f and g jump at the same points {sorted(shared)}")
    fl, gl = f.left_values(), g.left_values()
    f0, g0 = f.values[:-1], g.values[:-1]
    df = fl[1:] - f0
    dg = gl[1:] - g0
    jump_g = g.values[1:] - gl[1:]
    prev = _refined_sum(f0, df, g0, dg, jump_g, 1.0)
    gaps: list[float] = []
    for k in range(1, max_levels + 1):
        cur = _refined_sum(f0, df, g0, dg, jump_g, 2.0 ** k)
        gaps.append(abs(cur - prev))
        settled = len(gaps) >= 3 and gaps[-1] <= gaps[-2] <= gaps[-3]
        if gaps[-1] <= rtol * (1.0 + abs(cur)) and (settled or gaps[-1] == 0.0):
            limit = _refined_sum(f0, df, g0, dg, jump_g, np.inf)
            return YoungResult(limit, gaps[-1], 2.0 * cur - prev, k)
        if len(gaps) >= 4 and gaps[-1] > gaps[-2] > gaps[-3] > gaps[-4]:
            raise ConvergenceError("refinement gaps are growing")
        prev = cur
    raise ConvergenceError(f"no convergence after {max_levels} refinements (gap {gaps[-1]:.3g})")


def _on_grid(g, grid: np.ndarray) -> GridFunction:
    if isinstance(g, GridFunction) and len(g.grid) == len(grid) and np.allclose(g.grid, grid, atol=1e-12):
        return g
    vals = np.asarray(g(grid), dtype=float) * np.ones_like(grid)
    return GridFunction(grid, vals)


def young_integral_vs_local_time(g, field, p: float, q: float, **kw) -> float:
    """``int g(x) d_x L_t^x`` on the field grid, padded with zero local time.

    ``q`` is the variation exponent of ``g`` and ``p`` that of the field. When the
    field records ``alpha`` the exponents must also satisfy ``p > 2/(alpha-1)``.
    """
    check_young_exponents(p, q)
    alpha = getattr(field, "alpha", None)
    if alpha is not None and not p > 2.0 / (alpha - 1.0):
        raise YoungConditionError(f"local time has finite p-variation only for p > {2 / (alpha - 1):.4g}")
    fld = field.padded()
    L = GridFunction(fld.grid, fld.values)
    return young_integral(_on_grid(g, fld.grid), L, q, p, **kw).value


def term_by_term_check(f_seq: Sequence[GridFunction], g_seq: Sequence[GridFunction],
                       f: GridFunction, g: GridFunction, p: float, q: float) -> np.ndarray:
    """``|int f_n dg_n - int f dg|`` for each ``n``."""
    if len(f_seq) != len(g_seq):
        raise ValueError("sequences must have equal length")
    ref = young_integral(f, g, p, q).value
    return np.array([abs(young_integral(fn, gn, p, q).value - ref) for fn, gn in zip(f_seq, g_seq)])
