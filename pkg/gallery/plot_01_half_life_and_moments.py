"""
Half-life, autoregression and the P&L distribution
==================================================

A discrete O-U price is parametrised here by its half-life: the number of
steps it takes for the expected gap to the forecast to halve. This script
converts half-lives into autoregressive coefficients and checks the exact
mean and variance of the P&L against a Monte Carlo run.
"""

import numpy as np

from otrsim import OuParams, RngSpec, half_life_from_phi, phi_from_half_life, pnl_moments
from otrsim.simulator import simulate_paths

###############################################################################
# The five half-lives of the experiments and their coefficients
for tau in (5, 10, 25, 50, 100):
    phi = phi_from_half_life(tau)
    print(f"tau={tau:>3}  phi={phi:.10f}  back to tau={half_life_from_phi(phi):.10f}")

###############################################################################
# Closed-form moments against 100,000 simulated paths, horizon 25 steps
params = OuParams.from_half_life(forecast=5.0, half_life=10.0, sigma=1.0)
t, n = 25, 100_000
exact = pnl_moments(params, t)
pnl = simulate_paths(params, n, t, RngSpec(7))[:, -1] - params.p0
print(f"mean     exact {exact.mean:.4f}   simulated {pnl.mean():.4f}"
      f"   (standard error {np.sqrt(exact.variance / n):.4f})")
print(f"variance exact {exact.variance:.4f}   simulated {pnl.var(ddof=1):.4f}")

###############################################################################
# A non-zero entry price shifts the mean by phi**t * p0
shifted = OuParams(params.forecast, params.phi, params.sigma, p0=2.0)
print("mean with p0=2:", pnl_moments(shifted, t).mean)
