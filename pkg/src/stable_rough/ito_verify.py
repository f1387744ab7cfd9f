"""Monte-Carlo check of the Ito formula with a local-time term.

For a test function ``f`` and a simulated path ``X`` each report splits

    f(X_t) - f(X_0) = int f'(X_-) dX + J + T + residual

where ``J`` is the compensated sum of jumps above the threshold and ``T`` is the
local-time term ``-c int grad^{alpha-1} f(x) d_x L_t^x`` with
``c = C / A(1, -alpha)``. The residual is a mean-zero fluctuation when the
formula and the constants are right.
"""

from __future__ import annotations

import math
import os
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import RegimeError, YoungConditionError
from .frac_calc import (C_alpha, GridFunction, frac_gradient, frac_laplacian, laplacian_constant)
from .local_time import default_bandwidth, default_grid, estimate_local_time
from .rough_path import TwoPath, rough_integral_twopath, tau_delta_transform
from .stable_process import SamplePath, check_alpha, simulate_path
from .variation import p_variation_exact
from .young import young_integral

__all__ = [
    "ItoReport",
    "verify_smooth",
    "verify_young",
    "verify_rough",
    "path_report",
    "local_time_term_rough",
    "calibrate_levy_constant",
    "DEFAULT_THRESHOLD",
]

DEFAULT_THRESHOLD = 0.1
TERMS = ("lhs", "drift_free_integral", "jump_term", "local_time_term", "residual")


@dataclass
class ItoReport:
    """One path (``ensemble=False``) or ensemble means (``ensemble=True``).

    ``extras`` holds the alternative local-time route, the residual under the
    printed constant and, for ensembles, standard errors and per-path rows.
    """

    lhs: float
    drift_free_integral: float
    jump_term: float
    local_time_term: float
    residual: float
    config: dict
    ensemble: bool = False
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def residual_se(self) -> float:
        return float(self.extras.get("residual_se", float("nan")))


# -- tabulated functions of x ---------------------------------------------------

class _Table:
    """Values of ``fn`` on multiples of ``h``, extended on demand, read by linear interpolation."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], h: float = 0.005):
        self.fn, self.h = fn, h
        self.lo = self.hi = 0
        self.vals = np.asarray(fn(np.zeros(1)), dtype=float)

    def _extend(self, lo: int, hi: int):
        if lo < self.lo:
            left = self.fn(np.arange(lo, self.lo) * self.h)
            self.vals = np.concatenate([left, self.vals])
            self.lo = lo
        if hi > self.hi:
            right = self.fn(np.arange(self.hi + 1, hi + 1) * self.h)
            self.vals = np.concatenate([self.vals, right])
            self.hi = hi

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo = int(math.floor(x.min() / self.h)) - 64
        hi = int(math.ceil(x.max() / self.h)) + 64
        self._extend(lo, hi)
        grid = np.arange(self.lo, self.hi + 1) * self.h
        return np.interp(x, grid, self.vals)


_TQ_NODES, _TQ_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _tail_nodes(thr: float, reach: float = 400.0):
    edges = np.concatenate([thr + np.arange(0.0, 10.0, 0.01), np.arange(thr + 10.0, reach, 0.1), [reach]])
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (_TQ_NODES + 1.0)).ravel(), (half * _TQ_WEIGHTS).ravel()


def _tail_integrals(f: Callable, xs: np.ndarray, thr: float, power: float,
                    reach: float = 400.0) -> np.ndarray:
    """``int_thr^inf (f(x+y) + f(x-y) - 2 f(x)) y^(-power) dy`` for each ``x``.

    Panels of width 0.01 (then 0.1) reach ``y = reach``; beyond it ``f`` is taken
    affine on each side, fitted at ``+-reach`` and ``+-2 reach``, which is exact
    for functions that are eventually affine and a small error for bounded ones.
    """
    z, w = _tail_nodes(thr, reach)
    kern = w * z ** (-power)
    xs = np.asarray(xs, dtype=float)
    out = np.empty(len(xs))
    fx = np.asarray(f(xs), dtype=float) * np.ones_like(xs)
    R = reach
    for a in range(0, len(xs), 32):
        xa = xs[a:a + 32, None]
        out[a:a + 32] = (f(xa + z) + f(xa - z) - 2.0 * fx[a:a + 32, None]) @ kern
    # affine tails: f(x + y) ~ c0 + c1 (x + y) for x + y > R, same on the left
    fR, f2R, fmR, fm2R = (float(np.asarray(f(np.asarray(v)))) for v in (R, 2 * R, -R, -2 * R))
    s_r, s_l = (f2R - fR) / R, (fm2R - fmR) / (-R)
    c_r, c_l = fR - s_r * R, fmR + s_l * R
    i0 = R ** (1.0 - power) / (power - 1.0)
    i1 = R ** (2.0 - power) / (power - 2.0)
    # sum of the two affine branches at y: (c_r + c_l - 2 f(x)) + (s_r + s_l) x + (s_r - s_l) y
    out += (c_r + c_l - 2.0 * fx + (s_r + s_l) * xs) * i0 + (s_r - s_l) * i1
    return out


def _tail_table(f: Callable, thr: float, power: float, h: float) -> _Table:
    return _Table(lambda xs: _tail_integrals(f, xs, thr, power), h)


def _second_density_coefficient(alpha: float) -> float:
    """Coefficient of ``|y|^(-1-2 alpha)`` in the large-``y`` expansion of the unit stable density."""
    return -special.gamma(2.0 * alpha + 1.0) * math.sin(math.pi * alpha) / (2.0 * math.pi)


# -- local-time routes ----------------------------------------------------------

def _gradient_values(f: GridFunction, alpha: float, xs: np.ndarray) -> np.ndarray:
    return np.asarray(frac_gradient(f, alpha, x=xs), dtype=float)


def local_time_term_rough(grad: Callable, field_, alpha: float, q: float = 1.0, *,
                          jumps: Sequence[tuple[float, float]] = (), delta: float = 1.0,
                          m_max: int = 18, tol: float = 1e-10) -> float:
    """``int grad(x) d_x L`` through the rough pipeline.

    ``jumps`` lists ``(x_r, left_limit)`` of a cadlag ``grad``; jump points are
    inserted into the field grid and the path is extended by ``tau_delta``
    before lifting.
    """
    fld = field_.padded()
    x, L = fld.grid, fld.values
    extra = np.array([xr for xr, _ in jumps], dtype=float)
    if len(extra):
        x = np.union1d(x, extra)
        L = fld.at(x)
    g = np.asarray(grad(x), dtype=float) * np.ones_like(x)
    Z = TwoPath(x, L, g, jumps=tuple(jumps))
    if Z.jumps:
        Z, _ = tau_delta_transform(Z, delta, q)
    value, _, _ = rough_integral_twopath(Z, alpha, q, m_max=m_max, tol=tol)
    return value


def _young_lt(gvals: np.ndarray, fld, alpha: float, q: float, p: float) -> float:
    L = GridFunction(fld.grid, fld.values)
    return young_integral(GridFunction(fld.grid, gvals), L, q, p).value


# -- per-path decomposition ------------------------------------------------------

@dataclass
class _Context:
    f: GridFunction
    alpha: float
    regime: str
    q: float
    p: float
    C: float
    threshold: float
    bandwidth: float | None
    spacing: float | None
    time_route: bool
    gradient: Callable | None = None
    gradient_jumps: tuple = ()
    delta: float = 1.0
    m_max: int = 18
    tables: dict = field(default_factory=dict)

    def table(self, key: str, build: Callable[[], _Table]) -> _Table:
        if key not in self.tables:
            self.tables[key] = build()
        return self.tables[key]


def _deriv(f: GridFunction, x: np.ndarray) -> np.ndarray:
    if f.deriv is not None:
        return np.asarray(f.deriv(x), dtype=float) * np.ones_like(x)
    h = f.spacing
    return (f(x + 0.5 * h) - f(x - 0.5 * h)) / h


def path_report(path: SamplePath, ctx: _Context, config: dict) -> ItoReport:
    f, alpha = ctx.f, ctx.alpha
    A = laplacian_constant(alpha)
    c = ctx.C / A
    X = path.values
    Xl = X[:-1]
    dX = np.diff(X)
    dt = path.dt
    fX = np.asarray(f(X), dtype=float) * np.ones_like(X)
    lhs = float(fX[-1] - fX[0])
    fp = _deriv(f, Xl)
    drift = float(np.sum(fp * dX))

    big = path.jump_index
    jumps_raw = float(np.sum(fX[big + 1] - fX[big] - fp[big] * dX[big]))
    func = f.func if f.func is not None else f
    comp = ctx.table("comp", lambda: _tail_table(func, ctx.threshold, 1.0 + alpha, 0.005))
    compensator = ctx.C * dt * float(np.sum(comp(Xl)))
    jump_term = jumps_raw - compensator

    bw = ctx.bandwidth or default_bandwidth(alpha, path.t_end, path.n_steps)
    grid = default_grid(path, bw, ctx.spacing)
    fld = estimate_local_time(path, grid, bw).padded()
    extras: dict = {"seed": path.seed, "n_jumps": int(len(big)), "jump_sum": jumps_raw,
                    "compensator_unit": compensator / ctx.C if ctx.C else 0.0}

    if ctx.gradient is not None:
        grad = ctx.gradient
    else:
        def grad(xs):
            return _gradient_values(f, alpha, xs)

    if ctx.regime == "rough":
        integral = local_time_term_rough(grad, fld, alpha, ctx.q, jumps=ctx.gradient_jumps,
                                         delta=ctx.delta, m_max=ctx.m_max)
    else:
        gv = grad(fld.grid)
        integral = _young_lt(gv, fld, alpha, ctx.q, ctx.p)
        if ctx.regime == "young":
            extras["q_variation"] = p_variation_exact(gv, ctx.q)
            extras["q_variation_coarse"] = p_variation_exact(gv[::2], ctx.q)
    local_time_term = -c * integral
    extras["local_time_unit"] = -integral / A
    residual = lhs - (drift + jump_term + local_time_term)

    extras["residual_printed_constant"] = float(lhs - (drift + jump_term - C_alpha(alpha) * integral))
    if ctx.time_route:
        lap = ctx.table("lap", lambda: _Table(
            lambda xs: frac_laplacian(GridFunction.from_callable(func, np.array([0.0, 1.0])),
                                      alpha, x=xs) if len(xs) else np.zeros(0), 0.005))
        extras["time_route_term"] = c * dt * float(np.sum(lap(Xl)))
    bias = ctx.table("bias", lambda: _tail_table(func, ctx.threshold, 1.0 + 2.0 * alpha, 0.02))
    extras["threshold_bias_estimate"] = (dt ** 2 * _second_density_coefficient(alpha)
                                         * float(np.sum(bias(Xl))))
    return ItoReport(float(lhs), float(drift), float(jump_term), float(local_time_term),
                     float(residual), config, False, extras)


def _one_seed(args) -> ItoReport:
    ctx, config, seed = args
    path = simulate_path(ctx.alpha, config["t"], config["n_steps"], ctx.threshold, int(seed))
    return path_report(path, ctx, config)


def _workers(requested: int | None) -> int:
    if requested is None:
        requested = int(os.environ.get("RL_THREADS", "1") or 1)
    return max(1, min(int(requested), os.cpu_count() or 1))


def _run(ctx: _Context, config: dict, seeds, workers: int | None) -> list[ItoReport]:
    jobs = [(ctx, config, int(s)) for s in seeds]
    n = _workers(workers)
    if n > 1 and len(jobs) > 1:
        try:
            pickle.dumps(ctx)
        except Exception:
            n = 1
    if n == 1:
        return [_one_seed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        # map keeps seed order, so the merge below is deterministic
        return list(pool.map(_one_seed, jobs, chunksize=max(1, len(jobs) // (4 * n))))


class _Stream:
    """Running mean and variance (Welford)."""

    def __init__(self):
        self.n, self.mean, self.m2 = 0, 0.0, 0.0

    def push(self, x: float):
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    @property
    def se(self) -> float:
        if self.n < 2:
            return float("nan")
        return math.sqrt(self.m2 / (self.n - 1) / self.n)


def _ensemble(reports: list[ItoReport], config: dict) -> ItoReport:
    keys = list(TERMS) + sorted({k for r in reports for k, v in r.extras.items()
                                 if isinstance(v, float) and k != "seed"})
    streams = {k: _Stream() for k in keys}
    for r in reports:
        for k in TERMS:
            streams[k].push(getattr(r, k))
        for k in keys[len(TERMS):]:
            if k in r.extras:
                streams[k].push(r.extras[k])
    extras = {f"{k}_se": streams[k].se for k in keys}
    extras.update({k: streams[k].mean for k in keys[len(TERMS):]})
    extras["n_paths"] = len(reports)
    if "time_route_term" in streams and streams["time_route_term"].n:
        a, b = streams["time_route_term"].mean, streams["local_time_term"].mean
        extras["route_relative_discrepancy"] = abs(a - b) / max(abs(b), 1e-300)
        extras["route_max_path_discrepancy"] = max(
            abs(r.extras["time_route_term"] - r.local_time_term) / max(abs(r.local_time_term), 1e-300)
            for r in reports)
    extras["per_path"] = [dict({k: getattr(r, k) for k in TERMS}, **r.extras) for r in reports]
    return ItoReport(*(streams[k].mean for k in TERMS), config, True, extras)


def _config(regime: str, f: GridFunction, alpha: float, t: float, n_steps: int, seeds,
            threshold: float, C: float, q: float, p: float, bandwidth, spacing, **more) -> dict:
    cfg = {
        "schema": "rlv1",
        "regime": regime,
        "function": f.name or "f",
        "alpha": float(alpha),
        "t": float(t),
        "n_steps": int(n_steps),
        "seeds": [int(s) for s in seeds],
        "threshold": float(threshold),
        "levy_constant": float(C),
        "ito_constant": float(C / laplacian_constant(alpha)),
        "C_alpha_printed": float(C_alpha(alpha)),
        "q": float(q),
        "p": float(p),
        "bandwidth": None if bandwidth is None else float(bandwidth),
        "spacing": None if spacing is None else float(spacing),
        "residual_tolerance_se": 3.0,
    }
    cfg.update(more)
    return cfg


def _default_p(alpha: float, q: float) -> float:
    p = 2.0 / (alpha - 1.0) + 0.05
    if 1.0 / p + 1.0 / q <= 1.0:
        raise YoungConditionError(f"no Young pairing for alpha={alpha}, q={q}")
    return p


def _finish(ctx, cfg, seeds, ensemble, workers):
    reports = _run(ctx, cfg, seeds, workers)
    if not ensemble:
        return reports
    return _ensemble(reports, cfg)


def verify_smooth(g: GridFunction, alpha: float, t: float, n_steps: int, seeds, *,
                  threshold: float = DEFAULT_THRESHOLD, C: float | None = None,
                  bandwidth: float | None = None, spacing: float | None = None,
                  gradient: Callable | None = None,
                  ensemble: bool = True, workers: int | None = None):
    """Smooth test function; the local-time term is computed along space and along time.

    ``g`` needs ``func`` and ``deriv`` tags. ``local_time_term`` is the spatial
    (Young) route and ``extras["time_route_term"]`` is ``c dt sum Delta^{alpha/2} g(X_k)``.
    ``gradient`` supplies ``grad^{alpha-1} g`` in closed form; otherwise it is
    computed from the samples, which needs ``g`` to decay (or be affine) beyond
    its grid. Returns the ensemble report, or the list of per-path reports.
    """
    alpha = check_alpha(alpha)
    if g.func is None or g.deriv is None:
        raise ValueError("verify_smooth needs a function with func and deriv tags")
    C = laplacian_constant(alpha) if C is None else float(C)
    p = _default_p(alpha, 1.0)
    cfg = _config("smooth", g, alpha, t, n_steps, seeds, threshold, C, 1.0, p, bandwidth, spacing)
    ctx = _Context(g, alpha, "smooth", 1.0, p, C, threshold, bandwidth, spacing, True, gradient)
    return _finish(ctx, cfg, seeds, ensemble, workers)


def verify_young(f: GridFunction, q: float, alpha: float, t: float, n_steps: int, seeds, *,
                 threshold: float = DEFAULT_THRESHOLD, C: float | None = None,
                 bandwidth: float | None = None, spacing: float | None = None,
                 ensemble: bool = True, workers: int | None = None):
    """Young regime ``1 <= q < 2/(3-alpha)``.

    The gradient is certified by reporting its q-variation on the field grid and
    on the grid with every other point dropped (``extras``).
    """
    alpha = check_alpha(alpha)
    if not 1.0 <= q < 2.0 / (3.0 - alpha):
        raise YoungConditionError(f"q={q} is outside the Young range [1, {2 / (3 - alpha):.4g})")
    C = laplacian_constant(alpha) if C is None else float(C)
    p = 2.0 / (alpha - 1.0) + 0.5 * (q / (q - 1.0) - 2.0 / (alpha - 1.0)) if q > 1 else _default_p(alpha, q)
    cfg = _config("young", f, alpha, t, n_steps, seeds, threshold, C, q, p, bandwidth, spacing)
    ctx = _Context(f, alpha, "young", q, p, C, threshold, bandwidth, spacing, False)
    return _finish(ctx, cfg, seeds, ensemble, workers)


def verify_rough(f: GridFunction, q: float, alpha: float, t: float, n_steps: int, seeds, *,
                 threshold: float = DEFAULT_THRESHOLD, C: float | None = None,
                 bandwidth: float | None = None, spacing: float | None = None,
                 gradient: Callable | None = None, gradient_jumps: Sequence = (),
                 delta: float = 1.0, m_max: int = 18,
                 ensemble: bool = True, workers: int | None = None):
    """Rough regime ``q < 4``, ``alpha > 3/2``; the local-time term goes through a lift.

    Values of ``q`` below ``2/(3-alpha)`` are accepted as well, since a rough
    integral exists wherever a Young one does. ``gradient`` overrides the
    computed ``grad^{alpha-1} f``; with ``gradient_jumps`` the integrand is cadlag
    and the path is extended by ``tau_delta`` before lifting.
    """
    alpha = check_alpha(alpha)
    if not alpha > 1.5:
        raise RegimeError("the rough regime needs alpha > 3/2")
    if not 1.0 <= q < 4.0:
        raise RegimeError(f"q={q} is outside [1, 4)")
    C = laplacian_constant(alpha) if C is None else float(C)
    cfg = _config("rough", f, alpha, t, n_steps, seeds, threshold, C, q, float("nan"), bandwidth,
                  spacing, delta=float(delta), m_max=int(m_max),
                  gradient_jumps=[list(map(float, j)) for j in gradient_jumps])
    ctx = _Context(f, alpha, "rough", q, float("nan"), C, threshold, bandwidth, spacing, False,
                   gradient, tuple(tuple(map(float, j)) for j in gradient_jumps), float(delta), m_max)
    return _finish(ctx, cfg, seeds, ensemble, workers)


def _neg_sin(x):
    # grad^{alpha-1} cos = -sin for every alpha
    return -np.sin(x)


def calibrate_levy_constant(alpha: float, t: float, n_steps: int, seeds, *,
                            threshold: float = DEFAULT_THRESHOLD, grid_half_width: float = 10.0,
                            bandwidth: float | None = None) -> dict:
    """Levy constant that makes the smooth residual on ``cos`` unbiased.

    The residual is affine in ``C``: ``R(C) = a - C b``. The ratio estimate
    ``sum a / sum b`` is returned with a delta-method standard error and the
    theoretical value ``A(1, -alpha)`` for comparison.
    """
    alpha = check_alpha(alpha)
    grid = np.arange(-grid_half_width, grid_half_width + 1e-9, 0.01)
    g = GridFunction.from_callable(np.cos, grid, deriv=lambda x: -np.sin(x), name="cos")
    reports = verify_smooth(g, alpha, t, n_steps, seeds, threshold=threshold,
                            bandwidth=bandwidth, gradient=_neg_sin, ensemble=False)
    x = np.array([[r.lhs - r.drift_free_integral - r.extras["jump_sum"],
                   r.extras["local_time_unit"] - r.extras["compensator_unit"]] for r in reports])
    a, b = x[:, 0], x[:, 1]
    est = float(a.sum() / b.sum())
    n = len(a)
    se = float(np.std(a - est * b, ddof=1) / math.sqrt(n) / abs(b.mean())) if n > 1 else float("nan")
    A = laplacian_constant(alpha)
    return {"alpha": alpha, "levy_constant": est, "se": se, "theory": A,
            "relative_offset": est / A - 1.0, "n_paths": n, "threshold": threshold}
