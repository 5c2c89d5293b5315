"""
Gains and losses swap places
============================

With the entry at zero, flipping the sign of the forecast mirrors the process,
so the Sharpe ratio of rule (a, b) under forecast +c is the negative of that
of rule (b, a) under -c. The two heat-maps are rotated negatives of each
other up to Monte Carlo noise.
"""

import numpy as np

from otrsim import OuParams, RngSpec, build_mesh, sweep

mesh = build_mesh(1.0)
plus = sweep(OuParams.from_half_life(5, 5, 1), mesh, 2_000, 100, RngSpec(0))
minus = sweep(OuParams.from_half_life(-5, 5, 1), mesh, 2_000, 100, RngSpec(0))

gap = plus.sharpe + minus.sharpe.T
se = np.hypot(plus.field("sharpe_se"), minus.field("sharpe_se").T)
print(f"largest |gap| {np.abs(gap).max():.3f}; nodes beyond 4 standard errors: "
      f"{int((np.abs(gap) > 4 * se).sum())} of {gap.size}")
print(f"best under +5: {plus.sharpe.max():.2f}; worst under -5: {minus.sharpe.min():.2f}")
