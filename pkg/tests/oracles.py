"""Reference computations that share no code with the package."""

import itertools
import math

import numpy as np
from scipy import integrate, stats


def brute_force_pvar(values, p):
    """Max over every subset of interior points (endpoints always kept)."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    best = 0.0
    inner = range(1, n - 1)
    for k in range(n - 1):
        for pick in itertools.combinations(inner, k):
            idx = (0,) + pick + (n - 1,)
            s = 0.0
            for term in np.abs(np.diff(v[list(idx)])) ** p:
                s += float(term)
            best = max(best, s)
    return best


def fft_multiplier(func, symbol, half_width=60.0, n=2 ** 16):
    """Apply a Fourier multiplier to a rapidly decaying function on a wide periodic box.

    Returns ``(x, values)``; ``symbol`` maps angular frequency to a complex factor.
    """
    x = np.linspace(-half_width, half_width, n, endpoint=False)
    fx = func(x)
    xi = 2 * np.pi * np.fft.fftfreq(n, d=x[1] - x[0])
    out = np.fft.ifft(np.fft.fft(fx) * symbol(xi))
    return x, out.real


def fft_laplacian(func, alpha, **kw):
    return fft_multiplier(func, lambda xi: -np.abs(xi) ** alpha, **kw)


def fft_gradient(func, alpha, **kw):
    return fft_multiplier(func, lambda xi: 1j * np.sign(xi) * np.abs(xi) ** (alpha - 1), **kw)


def stable_pdf(alpha, t, x):
    """Symmetric stable density with characteristic function ``exp(-t |u|^alpha)``."""
    scale = t ** (1.0 / alpha)
    return stats.levy_stable.pdf(x, alpha, 0.0, loc=0.0, scale=scale)


def expected_local_time_at_zero(alpha, t=1.0):
    """``int_0^t p_s(0) ds`` by quadrature of the inverse Fourier integral."""

    def p0(s):
        val, _ = integrate.quad(lambda u: math.exp(-s * u ** alpha), 0.0, np.inf, limit=200)
        return val / math.pi

    val, _ = integrate.quad(p0, 0.0, t, limit=200)
    return val


def riemann_liouville(func, order, x, lower):
    """Left RL integral ``(1/Gamma(a)) int_lower^x (x-y)^(a-1) f(y) dy``."""
    if x <= lower:
        return 0.0
    val, _ = integrate.quad(func, lower, x, weight="alg", wvar=(0.0, order - 1.0), limit=200)
    return val / math.gamma(order)


def stieltjes(f, dg, a, b):
    """``int_a^b f dg`` for smooth ``g`` by quadrature of ``f g'``."""
    val, _ = integrate.quad(lambda x: f(x) * dg(x), a, b, limit=200, epsabs=1e-13)
    return val


def box_occupation(path_values, dt, x, bandwidth):
    """Naive loop version of the box-kernel occupation density."""
    xs = path_values[:-1]
    out = []
    for xi in np.atleast_1d(x):
        out.append(sum(dt for v in xs if abs(v - xi) < bandwidth / 2) / bandwidth)
    return np.array(out)


def iterated_integrals_pl(points):
    """Level-2 iterated integrals of a piecewise-linear 2-d path by the segment formula."""
    pts = np.asarray(points, dtype=float)
    z2 = np.zeros((2, 2))
    for k in range(1, len(pts)):
        d = pts[k] - pts[k - 1]
        before = pts[k - 1] - pts[0]
        z2 += np.outer(before, d) + 0.5 * np.outer(d, d)
    return pts[-1] - pts[0], z2
