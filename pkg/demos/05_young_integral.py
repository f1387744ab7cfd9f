"""
Young integrals
===============

Riemann-Stieltjes sums with midpoint refinement, including integrals against local time.
"""

import numpy as np

from stable_rough.errors import YoungConditionError
from stable_rough.frac_calc import GridFunction
from stable_rough.local_time import estimate_local_time
from stable_rough.stable_process import simulate_path
from stable_rough.young import young_integral, young_integral_vs_local_time

x = np.linspace(0, 1, 1025)
res = young_integral(GridFunction(x, x), GridFunction(x, x ** 2), p=1, q=1)
print(f"int x d(x^2) = {res.value:.8f} (2/3), gap {res.gap:.1e}, levels {res.levels}")

try:
    young_integral(GridFunction(x, x), GridFunction(x, x), p=2, q=2)
except YoungConditionError as err:
    print("rejected:", err)

# %%
# int sgn(x) dL_1^x for alpha = 1.8: the integrand has one jump and bounded variation.
field = estimate_local_time(simulate_path(1.8, 1.0, 2 ** 15, 1.0, seed=4))
val = young_integral_vs_local_time(np.sign, field, p=2.6, q=1.0)
# by parts this is -2 L^0, up to how the kernel estimate smooths the field near 0
print(f"int sgn dL = {val:.5f}   -2 L^0 = {-2 * field.at(0.0):.5f}")
