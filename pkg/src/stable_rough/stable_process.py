"""Symmetric alpha-stable sample paths, transition density and Levy density.

The process has characteristic function ``E exp(i theta X_t) = exp(-t |theta|^alpha)``.
Increments are drawn with the Chambers-Mallows-Stuck transform.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "SamplePath",
    "check_alpha",
    "simulate_path",
    "stable_increments",
    "ensemble_seeds",
    "transition_density",
    "mean_local_time_at_origin",
    "levy_density",
    "write_path_csv",
    "write_path_binary",
    "read_path_binary",
    "BINARY_MAGIC",
    "BINARY_VERSION",
]

BINARY_MAGIC = b"RLSP"
BINARY_VERSION = 1


def check_alpha(alpha: float, lo: float = 1.0, hi: float = 2.0) -> float:
    alpha = float(alpha)
    if not lo < alpha < hi:
        raise ValueError(f"alpha must lie in ({lo}, {hi}), got {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class SamplePath:
    """A simulated trajectory on a uniform time grid.

    ``jump_index[j]`` is the step ``k`` whose increment
    ``values[k+1] - values[k]`` was recorded as the j-th jump.
    """

    times: np.ndarray
    values: np.ndarray
    alpha: float
    seed: int
    threshold: float
    jump_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def jump_times(self) -> np.ndarray:
        # midpoint of the step that carried the jump
        k = self.jump_index
        return 0.5 * (self.times[k] + self.times[k + 1])

    @property
    def jump_sizes(self) -> np.ndarray:
        k = self.jump_index
        return self.values[k + 1] - self.values[k]

    @property
    def jumps(self) -> list[tuple[float, float]]:
        return list(zip(self.jump_times.tolist(), self.jump_sizes.tolist()))

    def truncated(self, n: int) -> "SamplePath":
        """The same path observed up to step ``n``."""
        keep = self.jump_index < n
        return SamplePath(self.times[: n + 1], self.values[: n + 1], self.alpha,
                          self.seed, self.threshold, self.jump_index[keep])


def stable_increments(rng: np.random.Generator, alpha: float, size, scale: float = 1.0) -> np.ndarray:
    """Symmetric stable variates with ``E exp(i u S) = exp(-|scale u|^alpha)``."""
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    w = rng.standard_exponential(size)
    s = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
         * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    return scale * s


def simulate_path(alpha: float, t_end: float, n_steps: int, jump_threshold: float,
                  seed: int) -> SamplePath:
    """Simulate ``X`` on ``n_steps`` uniform steps of ``[0, t_end]`` with ``X_0 = 0``."""
    alpha = check_alpha(alpha)
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if not jump_threshold > 0:
        raise ValueError("jump_threshold must be positive")
    dt = t_end / n_steps
    rng = np.random.default_rng(seed)
    dx = stable_increments(rng, alpha, n_steps, dt ** (1.0 / alpha))
    values = np.empty(n_steps + 1)
    values[0] = 0.0
    np.cumsum(dx, out=values[1:])
    times = np.linspace(0.0, t_end, n_steps + 1)
    jump_index = np.flatnonzero(np.abs(dx) >= jump_threshold)
    return SamplePath(times, values, alpha, int(seed), float(jump_threshold), jump_index)


def ensemble_seeds(base_seed: int, n: int) -> np.ndarray:
    """Seeds for an ensemble: ``seed_i = base_seed XOR i``."""
    return np.bitwise_xor(np.int64(base_seed), np.arange(n, dtype=np.int64))


# -- transition density ----------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gl_panel(func, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, func(a + half * (_GL_NODES + 1.0))))


def _adaptive_gl(func, a: float, b: float, rtol: float = 1e-8, atol: float = 1e-15,
                 max_panels: int = 20000) -> float:
    """Adaptive Gauss-Legendre quadrature by panel bisection."""
    total = 0.0
    stack = [(a, b, _gl_panel(func, a, b), 0)]
    n = 0
    scale = 0.0
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl_panel(func, lo, mid)
        right = _gl_panel(func, mid, hi)
        n += 1
        scale = max(scale, abs(left) + abs(right))
        err = abs(left + right - whole)
        if err <= max(rtol * abs(left + right), atol) or (err <= rtol * scale and depth > 3):
            total += left + right
        elif depth > 50 or n > max_panels:
            raise ConvergenceError(f"quadrature did not converge on [{lo}, {hi}]")
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total


def transition_density(alpha: float, t: float, x: float, *, strict: bool = True,
                       rtol: float = 1e-8) -> float:
    """``p_t(x) = (1/pi) int_0^inf exp(-t xi^alpha) cos(xi x) dxi``.

    The range is cut at ``Xi`` with ``exp(-t Xi^alpha) < 1e-12``.
    ``strict=False`` admits alpha in (0, 2] for boundary diagnostics.
    """
    if strict:
        alpha = check_alpha(alpha)
    elif not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if not t > 0:
        raise ValueError("t must be positive")
    xi_max = (-np.log(1e-12) / t) ** (1.0 / alpha)
    x = float(x)

    def integrand(xi):
        return np.exp(-t * xi ** alpha) * np.cos(xi * x)

    # split the range so every panel sees a bounded number of oscillations
    n_split = max(1, int(np.ceil(xi_max * abs(x) / (4 * np.pi))))
    edges = np.linspace(0.0, xi_max, n_split + 1)
    val = sum(_adaptive_gl(integrand, edges[i], edges[i + 1], rtol=rtol) for i in range(n_split))
    return val / np.pi


def mean_local_time_at_origin(alpha: float, t: float = 1.0) -> float:
    """``E L_t^0 = int_0^t p_s(0) ds`` for the process started at the origin.

    Uses the scaling ``p_s(0) = p_1(0) s^(-1/alpha)`` with ``p_1(0)`` from
    :func:`transition_density`.
    """
    alpha = check_alpha(alpha)
    e = 1.0 - 1.0 / alpha
    return transition_density(alpha, 1.0, 0.0) * t ** e / e


def levy_density(alpha: float, x, C: float):
    """``C |x|^(-alpha-1)``."""
    alpha = check_alpha(alpha)
    if not C > 0:
        raise ValueError("C must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ValueError("the Levy density is singular at x = 0")
    out = C * np.abs(x) ** (-alpha - 1.0)
    return float(out) if out.ndim == 0 else out


# -- export -----------------------------------------------------------------

def write_path_csv(path: SamplePath, target) -> None:
    with open(target, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "value"])
        for t, v in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(v))])


def write_path_binary(path: SamplePath, target) -> None:
    """``RLSP``, a version byte, then little-endian doubles.

    The doubles are ``n, alpha, seed, threshold, times[0..n), values[0..n)``.
    """
    n = len(path.times)
    header = np.array([n, path.alpha, path.seed, path.threshold], dtype="<f8")
    with open(target, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<B", BINARY_VERSION))
        fh.write(header.tobytes())
        fh.write(np.asarray(path.times, dtype="<f8").tobytes())
        fh.write(np.asarray(path.values, dtype="<f8").tobytes())


def read_path_binary(source) -> SamplePath:
    raw = Path(source).read_bytes()
    if raw[:4] != BINARY_MAGIC:
        raise ValueError("not an RLSP file")
    if raw[4] != BINARY_VERSION:
        raise ValueError(f"unsupported RLSP version {raw[4]}")
    body = np.frombuffer(raw[5:], dtype="<f8")
    n = int(body[0])
    alpha, seed, threshold = float(body[1]), int(body[2]), float(body[3])
    times = body[4:4 + n].copy()
    values = body[4 + n:4 + 2 * n].copy()
    jump_index = np.flatnonzero(np.abs(np.diff(values)) >= threshold)
    return SamplePath(times, values, alpha, seed, threshold, jump_index)
