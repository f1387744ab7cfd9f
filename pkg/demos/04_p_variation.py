"""
Exact p-variation
=================

The supremum over partitions is found by dynamic programming over turning points.
"""

import numpy as np

from stable_rough.local_time import estimate_local_time
from stable_rough.stable_process import simulate_path
from stable_rough.variation import dyadic_variation_bound, p_variation_exact, p_variation_prefix

v = np.array([0.0, 1.0, 0.2, 0.9, -0.5, 0.3])
for p in (1.0, 2.0, 3.0):
    print(f"p = {p}: {p_variation_exact(v, p):.4f}")
print("running p=2 variation:", np.round(p_variation_prefix(v, 2.0), 3))

# %%
# Local time fields have finite p-variation for p above 2/(alpha - 1).
alpha = 1.7
field = estimate_local_time(simulate_path(alpha, 1.0, 2 ** 18, 1.0, seed=2), bandwidth=0.005)
crit = 2 / (alpha - 1)
for p in (crit - 0.5, crit + 0.5):
    coarse, fine = p_variation_exact(field.values[::2], p), p_variation_exact(field.values, p)
    print(f"p = {p:.2f}: grid/2 {coarse:.4g}, full grid {fine:.4g}")

# %%
# An upper bound from dyadic increments alone. It is cheap but loose; gamma trades
# the constant against the weight on fine levels.
dyadic = np.linspace(field.grid[0], field.grid[-1], 2 ** 10 + 1)
vals = field.at(dyadic)
b = dyadic_variation_bound(vals, crit + 0.5, gamma=3.0)
print(f"dyadic bound {b.bound:.4g} >= exact {p_variation_exact(vals, crit + 0.5):.4g}")
