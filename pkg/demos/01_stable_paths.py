"""
Simulating symmetric stable paths
=================================

A path is built from Chambers-Mallows-Stuck increments. Increments larger than
the jump threshold are tagged as jumps so later stages can treat them apart.
"""

import numpy as np

from stable_rough.stable_process import ensemble_seeds, simulate_path, transition_density

path = simulate_path(alpha=1.5, t_end=1.0, n_steps=2 ** 14, jump_threshold=0.1, seed=7)
print(f"{path.n_steps} steps, dt = {path.dt:.2e}, range [{path.values.min():.3f}, {path.values.max():.3f}]")
print(f"{len(path.jump_times)} increments above the threshold; largest {np.max(np.abs(path.jump_sizes)):.3f}")

# %%
# Same seed, same path. Ensembles use base XOR i as the per-path seed.
again = simulate_path(1.5, 1.0, 2 ** 14, 0.1, seed=7)
print("reproducible:", np.array_equal(path.values, again.values))
print("seeds:", ensemble_seeds(100, 4))

# %%
# The endpoint X_1 should follow the density p_1. Compare a histogram bin near 0.
ends = np.array([simulate_path(1.5, 1.0, 64, 1.0, int(s)).values[-1] for s in ensemble_seeds(3, 4000)])
h = 0.2
empirical = np.mean(np.abs(ends) < h / 2) / h
print(f"density at 0: empirical {empirical:.3f}, Fourier integral {transition_density(1.5, 1.0, 0.0):.3f}")
