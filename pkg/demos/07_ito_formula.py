"""
Checking the Ito formula by Monte Carlo
=======================================

Each path gives f(X_t) - f(X_0) and the three terms of the formula. The
residual should average to zero across the ensemble.
"""

import numpy as np

from stable_rough.frac_calc import GridFunction
from stable_rough.ito_verify import calibrate_levy_constant, verify_smooth, verify_young
from stable_rough.stable_process import ensemble_seeds

grid = np.arange(-8, 8.0001, 0.01)
seeds = ensemble_seeds(2024, 24)

gauss = GridFunction.from_callable(lambda x: np.exp(-x * x), grid,
                                   deriv=lambda x: -2 * x * np.exp(-x * x), name="gauss")
r = verify_smooth(gauss, 1.8, 1.0, 2 ** 13, seeds)
print("smooth: lhs %.4f  drift %.4f  jumps %.4f  local time %.4f" % (
    r.lhs, r.drift_free_integral, r.jump_term, r.local_time_term))
print(f"        residual {r.residual:.4f} +- {r.residual_se:.4f}, "
      f"time route differs by {r.extras['route_relative_discrepancy']:.3%}")

# %%
# |x|: the fractional gradient has bounded variation, so the Young route applies.
absf = GridFunction.from_callable(np.abs, grid, deriv=lambda x: np.where(x > 0, 1.0, -1.0), name="abs")
r = verify_young(absf, 1.0, 1.8, 1.0, 2 ** 13, seeds)
print(f"young:  residual {r.residual:.4f} +- {r.residual_se:.4f}")

# %%
# Fit the Levy-measure constant from simulated paths of cos.
cal = calibrate_levy_constant(1.8, 1.0, 2 ** 12, ensemble_seeds(8, 64))
print(f"fitted C = {cal['levy_constant']:.4f} +- {cal['se']:.4f}, theory {cal['theory']:.4f}")
