"""
Local time from a sample path
=============================

The occupation density is estimated with a box kernel on a uniform grid.
"""

import numpy as np

from stable_rough.local_time import default_grid, estimate_local_time, local_time_at, occupation_check
from stable_rough.stable_process import ensemble_seeds, mean_local_time_at_origin, simulate_path

path = simulate_path(1.5, 1.0, 2 ** 16, 1.0, seed=11)
field = estimate_local_time(path, default_grid(path, 0.02), 0.02)
print(f"grid of {len(field.grid)} points, total mass {field.mass:.4f} (should be t = 1)")

# %%
# Occupation-times formula: time integral of phi(X) against the space integral of phi * L.
lhs, rhs = occupation_check(path, field, lambda x: np.cos(3 * x))
print(f"int phi(X_s) ds = {lhs:.5f}   int phi L dx = {rhs:.5f}")

# %%
# A small ensemble estimate of E L_1^0 against its quadrature value.
vals = [local_time_at(simulate_path(1.5, 1.0, 2 ** 14, 1.0, int(s)), 0.0) for s in ensemble_seeds(5, 400)]
se = np.std(vals, ddof=1) / np.sqrt(len(vals))
print(f"E L_1^0: {np.mean(vals):.3f} +- {se:.3f}  (exact {mean_local_time_at_origin(1.5):.3f})")
