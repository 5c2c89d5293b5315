"""
From observed opportunities to a trading rule
=============================================

The whole procedure without a backtest: fit the autoregressive coefficient
and the shock scale to past opportunities, then sweep the exit mesh under the
fitted process, seeded with the current opportunity's entry and forecast.
"""

from otrsim import (
    OpportunitySeries, OuParams, RngSpec, best_rule, build_design, build_mesh, estimate,
    half_life_from_phi, sweep,
)
from otrsim.simulator import simulate_paths

###############################################################################
# Past opportunities: 400 series of 50 steps, each with its own forecast
true = dict(half_life=10.0, sigma=0.8)
opportunities = []
for k, forecast in enumerate((-4.0, -1.0, 2.0, 6.0)):
    params = OuParams.from_half_life(forecast, true["half_life"], true["sigma"])
    for row in simulate_paths(params, 100, 50, RngSpec(2024), node_index=k):
        opportunities.append(OpportunitySeries(row, forecast))

fit = estimate(build_design(opportunities))
print(f"phi_hat={fit.phi_hat:.4f}  half-life={half_life_from_phi(fit.phi_hat):.2f}"
      f"  sigma_hat={fit.sigma_hat:.4f}  ({fit.n_obs} transitions)")

###############################################################################
# New opportunity: entry at 0, forecast 3
current = OuParams(forecast=3.0, phi=fit.phi_hat, sigma=fit.sigma_hat)
result = sweep(current, build_mesh(fit.sigma_hat), n_paths=2_000, max_holding_period=100,
               rng=RngSpec(1))
opt = best_rule(result)
print(f"take profit above {opt.rule.profit_taking:.2f}, stop out below "
      f"{-opt.rule.stop_loss:.2f}; Sharpe {opt.stats.sharpe:.2f}")
