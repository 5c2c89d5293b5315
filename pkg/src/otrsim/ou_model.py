"""Discrete Ornstein-Uhlenbeck price process.

    P_t = (1 - phi) * forecast + phi * P_{t-1} + sigma * eps_t,   eps_t ~ N(0, 1)

The mark-to-market P&L of a position of ``m`` units entered at ``p0`` is
``m * (P_t - p0)``; :func:`pnl_moments` gives its exact Gaussian law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Argument outside the domain where the quantity is defined."""


@dataclass(frozen=True)
class OuParams:
    forecast: float
    phi: float
    sigma: float
    p0: float = 0.0
    m: float = 1.0

    def __post_init__(self):
        for name in ("forecast", "phi", "sigma", "p0", "m"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")
        if self.m == 0:
            raise DomainError("m must be nonzero")

    @property
    def stationary(self) -> bool:
        return -1.0 < self.phi < 1.0

    @classmethod
    def from_half_life(cls, forecast: float, half_life: float, sigma: float,
                       p0: float = 0.0, m: float = 1.0) -> "OuParams":
        return cls(forecast, phi_from_half_life(half_life), sigma, p0, m)


@dataclass(frozen=True)
class PnlMoments:
    mean: float
    variance: float
    horizon: int

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def phi_from_half_life(tau: float) -> float:
    """Autoregressive coefficient whose expected gap to the forecast halves every ``tau`` steps."""
    if not math.isfinite(tau) or tau <= 0:
        raise DomainError(f"half-life must be a positive finite number, got {tau!r}")
    return 2.0 ** (-1.0 / tau)


def half_life_from_phi(phi: float) -> float:
    if not (0.0 < phi < 1.0):
        raise DomainError(f"half-life is undefined for phi={phi!r}; need 0 < phi < 1")
    return -math.log(2.0) / math.log(phi)


def step(params: OuParams, p_prev: float, epsilon: float) -> float:
    return (1.0 - params.phi) * params.forecast + params.phi * p_prev + params.sigma * epsilon


def pnl_moments(params: OuParams, t: int) -> PnlMoments:
    """Mean and variance of ``m * (P_t - p0)`` after ``t`` unconstrained steps.

    Uses the full recursion, so the mean carries the ``phi**t * p0`` term:

        mean     = m * (1 - phi**t) * (forecast - p0)
        variance = m**2 * sigma**2 * sum_{j<t} phi**(2j)

    With ``p0 = 0`` this is the textbook geometric-sum form.
    """
    if int(t) != t or t < 1:
        raise DomainError(f"horizon must be an integer >= 1, got {t!r}")
    t = int(t)
    phi, m = params.phi, params.m
    mean = m * (1.0 - phi**t) * (params.forecast - params.p0)
    phi2 = phi * phi
    if phi2 == 1.0:
        geo = float(t)
    else:
        geo = (1.0 - phi2**t) / (1.0 - phi2)
    variance = m * m * params.sigma**2 * geo
    return PnlMoments(mean=mean, variance=variance, horizon=t)
