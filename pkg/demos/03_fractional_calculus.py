"""
Fractional operators on a grid
==============================

Riemann-Liouville and Grunwald-Letnikov derivatives, the fractional Laplacian,
and the fractional gradient used in the Ito formula.
"""

import numpy as np
from scipy.special import gamma

from stable_rough.frac_calc import (
    GridFunction,
    constants_report,
    frac_derivative,
    frac_gradient,
    frac_laplacian,
    rl_integral,
)

# Power rule: D^{1/2} x^2 = Gamma(3)/Gamma(2.5) x^{1.5}
x = np.linspace(0, 1, 401)
g = GridFunction.from_callable(np.square, x)
d = frac_derivative(g, 0.5, base="grid")
print("power rule error:", np.max(np.abs(d.values - gamma(3) / gamma(2.5) * x ** 1.5)))
print("I^1 x^2 at 0.5:", rl_integral(g, 1.0, 0.5), "exact", 0.5 ** 3 / 3)

# %%
# cos is an eigenfunction of the fractional Laplacian with eigenvalue -1.
xc = np.linspace(-np.pi, np.pi, 65)
lap = frac_laplacian(GridFunction.from_callable(np.cos, xc), 1.5)
print("sup |Lap cos + cos|:", np.max(np.abs(lap.values + np.cos(xc))))

# %%
# The gradient of order alpha - 1 of a Gaussian.
xs = np.linspace(-6, 6, 1201)
grad = frac_gradient(GridFunction.from_callable(lambda u: np.exp(-u * u), xs), 1.8)
print("gradient at +-1:", grad.values[np.searchsorted(xs, [-1.0, 1.0])])

for key, val in constants_report(1.8).items():
    print(f"  {key}: {val}")
