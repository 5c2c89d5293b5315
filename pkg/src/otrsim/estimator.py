"""Least-squares recovery of ``phi`` and ``sigma`` from observed opportunities.

Each opportunity contributes its transitions ``P_{t-1} -> P_t`` to the
regression ``P_t - F = phi * (P_{t-1} - F) + xi_t``, where ``F`` is the
forecast declared when the position was opened. The intercept is pinned by
the forecast, so only the slope is fitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class EstimationError(ValueError):
    pass


class DegenerateDesignError(EstimationError):
    pass


class InsufficientDataError(EstimationError):
    pass


@dataclass(frozen=True)
class OpportunitySeries:
    prices: Sequence[float]
    forecast: float

    def __post_init__(self):
        if len(self.prices) < 2:
            raise EstimationError("an opportunity needs at least 2 prices")
        if not (np.all(np.isfinite(self.prices)) and math.isfinite(self.forecast)):
            raise EstimationError("prices and forecast must be finite")


@dataclass(frozen=True)
class RegressionVectors:
    x: np.ndarray  # lagged price minus forecast
    y: np.ndarray  # price
    z: np.ndarray  # forecast

    def __len__(self):
        return len(self.x)


@dataclass(frozen=True)
class OuEstimate:
    phi_hat: float
    sigma_hat: float
    residuals: np.ndarray
    n_obs: int

    @property
    def mean_reverting(self) -> bool:
        """True when the estimate lies in (0, 1), where a half-life exists."""
        return 0.0 < self.phi_hat < 1.0


def build_design(opportunities: Sequence[OpportunitySeries]) -> RegressionVectors:
    if not opportunities:
        raise EstimationError("no opportunities supplied")
    xs, ys, zs = [], [], []
    for opp in opportunities:
        if not isinstance(opp, OpportunitySeries):
            opp = OpportunitySeries(*opp)
        p = np.asarray(opp.prices, dtype=np.float64)
        xs.append(p[:-1] - opp.forecast)
        ys.append(p[1:])
        zs.append(np.full(len(p) - 1, float(opp.forecast)))
    return RegressionVectors(np.concatenate(xs), np.concatenate(ys), np.concatenate(zs))


def estimate(vectors: RegressionVectors) -> OuEstimate:
    """Slope ``cov(y - z, x) / cov(x, x)`` and residual standard deviation.

    With one common forecast ``z`` is constant and this is ``cov(y, x) / cov(x, x)``.
    Subtracting ``z`` keeps the slope unbiased when forecasts differ between
    opportunities. Covariances use the ``N - 1`` divisor; ``sigma_hat`` is the
    standard deviation of the residuals about their own mean.
    """
    x, y, z = (np.asarray(v, dtype=np.float64) for v in (vectors.x, vectors.y, vectors.z))
    n = len(x)
    if not (len(y) == n and len(z) == n):
        raise EstimationError("x, y and z must have equal length")
    if n < 3:
        raise InsufficientDataError(f"need at least 3 transitions, got {n}")
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc)) / (n - 1)
    if sxx <= 1e-12 * max(1.0, float(np.mean(x * x))):
        raise DegenerateDesignError("regressor has zero variance")
    d = y - z
    sxy = float(np.dot(d - d.mean(), xc)) / (n - 1)
    phi_hat = sxy / sxx
    resid = y - z - phi_hat * x
    sigma_hat = math.sqrt(float(np.var(resid, ddof=1)))
    return OuEstimate(phi_hat, sigma_hat, resid, n)


def estimate_opportunities(opportunities: Sequence[OpportunitySeries]) -> OuEstimate:
    return estimate(build_design(opportunities))
