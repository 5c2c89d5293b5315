"""
Sweeping the profit-taking / stop-loss mesh
===========================================

Every node of a 21x21 mesh of exit rules is evaluated on its own set of
simulated paths. The best node answers "which rule?", a row answers "which
stop-loss for this profit target?", and a column cut answers "which profit
target if the stop-loss may not exceed this level?".

A small path count keeps this quick; the experiments use 10,000 to 100,000.
"""

import matplotlib.pyplot as plt

from otrsim import (
    OuParams, RngSpec, best_pt_given_max_sl, best_rule, best_stop_loss_given_pt, build_mesh,
    sweep,
)

params = OuParams.from_half_life(forecast=5.0, half_life=5.0, sigma=1.0)
mesh = build_mesh(sigma=1.0)
result = sweep(params, mesh, n_paths=2_000, max_holding_period=100, rng=RngSpec(0))

###############################################################################
# Unconstrained optimum
opt = best_rule(result)
print(f"best: pt={opt.rule.profit_taking} sl={opt.rule.stop_loss} sharpe={opt.stats.sharpe:.2f}")

###############################################################################
# The strategy supplies a profit target of 3
row = best_stop_loss_given_pt(result, 3.0)
print(f"given pt=3: sl={row.rule.stop_loss} sharpe={row.stats.sharpe:.2f}")

###############################################################################
# Management caps the stop-loss at 2
cap = best_pt_given_max_sl(result, 2.0)
print(f"sl <= 2: pt={cap.rule.profit_taking} sl={cap.rule.stop_loss} sharpe={cap.stats.sharpe:.2f}")

###############################################################################
# Heat-map, stop-loss magnitude on the vertical axis
fig, ax = plt.subplots(figsize=(6, 5))
im = ax.imshow(result.sharpe.T, origin="lower", cmap="RdYlGn",
               extent=(-0.25, 10.25, -0.25, 10.25))
ax.set_xlabel("profit-taking")
ax.set_ylabel("stop-loss")
ax.set_title("Sharpe ratio, forecast 5, half-life 5")
fig.colorbar(im)
fig.savefig("sweep_heatmap.png", dpi=100)
