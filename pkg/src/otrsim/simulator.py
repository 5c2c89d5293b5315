"""Exit simulation of a held position under a profit-taking / stop-loss rule.

Conventions (all shared by the scalar and vectorised paths):

* exits use strict inequalities, profit-taking is tested before stop-loss;
* a position is force-closed when its holding period reaches exactly
  ``max_holding_period`` steps;
* the recorded P&L is the overshooting mark-to-market value, not the threshold.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .ou_model import OuParams, step
from .rng import RngSpec, raw_to_normal

SHARPE_STD_TOL = 1e-12
DEFAULT_CHUNK = 20_000


class ValidationError(ValueError):
    pass


class ExitReason(enum.IntEnum):
    PROFIT_TAKING = 0
    STOP_LOSS = 1
    MAX_HORIZON = 2


@dataclass(frozen=True)
class TradingRule:
    """Exit corridor. ``stop_loss`` is the magnitude of the tolerated loss."""

    profit_taking: float
    stop_loss: float
    max_holding_period: int = 100

    def __post_init__(self):
        if not (self.profit_taking >= 0 and self.stop_loss >= 0):
            raise ValidationError("profit_taking and stop_loss must be >= 0")
        if int(self.max_holding_period) != self.max_holding_period or self.max_holding_period < 1:
            raise ValidationError("max_holding_period must be an integer >= 1")


@dataclass(frozen=True)
class PathOutcome:
    exit_pnl: float
    holding_period: int
    exit_reason: ExitReason


@dataclass(frozen=True)
class ExitSample:
    """Per-path outcomes of one node, in path order."""

    pnl: np.ndarray
    holding_period: np.ndarray
    reason: np.ndarray

    def __len__(self):
        return len(self.pnl)

    def outcome(self, i: int) -> PathOutcome:
        return PathOutcome(float(self.pnl[i]), int(self.holding_period[i]),
                           ExitReason(int(self.reason[i])))


@dataclass(frozen=True)
class RuleStats:
    mean: float
    std: float
    sharpe: float
    n_paths: int
    exit_counts: dict = field(default_factory=dict)
    # standard error of ``sharpe`` allowing for skew and fat tails of the exit P&L
    sharpe_se: float = 0.0
    degenerate: bool = False

    @property
    def n_pt_exits(self) -> int:
        return self.exit_counts.get(ExitReason.PROFIT_TAKING, 0)

    @property
    def n_sl_exits(self) -> int:
        return self.exit_counts.get(ExitReason.STOP_LOSS, 0)

    @property
    def n_horizon_exits(self) -> int:
        return self.exit_counts.get(ExitReason.MAX_HORIZON, 0)

    @property
    def mean_se(self) -> float:
        return self.std / math.sqrt(self.n_paths)


def simulate_path(params: OuParams, rule: TradingRule, stream: Iterator[float]) -> PathOutcome:
    """Run one path from ``params.p0`` until the rule closes it.

    ``stream`` yields the standard-normal shock of each successive step.
    """
    p = params.p0
    hp = 0
    while True:
        p = step(params, p, next(stream))
        pnl = params.m * (p - params.p0)
        hp += 1
        if pnl > rule.profit_taking:
            return PathOutcome(pnl, hp, ExitReason.PROFIT_TAKING)
        if pnl < -rule.stop_loss:
            return PathOutcome(pnl, hp, ExitReason.STOP_LOSS)
        if hp == rule.max_holding_period:
            return PathOutcome(pnl, hp, ExitReason.MAX_HORIZON)


def _simulate_block(params: OuParams, rule: TradingRule, rng: RngSpec, node_index: int,
                    start: int, count: int) -> ExitSample:
    pnl = np.empty(count)
    hold = np.empty(count, dtype=np.int64)
    reason = np.empty(count, dtype=np.int8)

    a = (1.0 - params.phi) * params.forecast
    phi, sigma, p0, m = params.phi, params.sigma, params.p0, params.m
    pt, sl = rule.profit_taking, rule.stop_loss

    alive = np.arange(count)
    p = np.full(count, p0, dtype=np.float64)
    for k in range(rule.max_holding_period):
        raw = rng.raw(node_index, k, start, int(alive[-1]) + 1)
        z = raw_to_normal(raw[alive])
        p = a + phi * p + sigma * z
        c = m * (p - p0)
        hit_pt = c > pt
        hit_sl = c < -sl
        if k + 1 == rule.max_holding_period:
            done = np.ones(len(alive), dtype=bool)
        else:
            done = hit_pt | hit_sl
        if done.any():
            idx = alive[done]
            pnl[idx] = c[done]
            hold[idx] = k + 1
            r = np.full(len(idx), ExitReason.MAX_HORIZON, dtype=np.int8)
            r[hit_sl[done]] = ExitReason.STOP_LOSS
            r[hit_pt[done]] = ExitReason.PROFIT_TAKING
            reason[idx] = r
            keep = ~done
            alive = alive[keep]
            p = p[keep]
            if len(alive) == 0:
                break
    return ExitSample(pnl, hold, reason)


def simulate_exits(params: OuParams, rule: TradingRule, n_paths: int, rng: RngSpec,
                   node_index: int = 0, chunk_size: int = DEFAULT_CHUNK) -> ExitSample:
    """Outcomes of paths ``0 .. n_paths-1`` of node ``node_index``.

    Output does not depend on ``chunk_size``: each shock is addressed by
    (node, step, path), never drawn sequentially.
    """
    if n_paths < 1:
        raise ValidationError("n_paths must be >= 1")
    if chunk_size < 1:
        raise ValidationError("chunk_size must be >= 1")
    parts = [_simulate_block(params, rule, rng, node_index, s, min(chunk_size, n_paths - s))
             for s in range(0, n_paths, chunk_size)]
    if len(parts) == 1:
        return parts[0]
    return ExitSample(np.concatenate([q.pnl for q in parts]),
                      np.concatenate([q.holding_period for q in parts]),
                      np.concatenate([q.reason for q in parts]))


def simulate_paths(params: OuParams, n_paths: int, n_steps: int, rng: RngSpec,
                   node_index: int = 0) -> np.ndarray:
    """Unconstrained prices, shape ``(n_paths, n_steps + 1)``, column 0 is ``p0``.

    Uses the same shocks as :func:`simulate_exits` for the same node, so an
    exited path coincides with its row here up to the exit step.
    """
    out = np.empty((n_paths, n_steps + 1))
    out[:, 0] = params.p0
    a = (1.0 - params.phi) * params.forecast
    for k in range(n_steps):
        z = rng.normals(node_index, k, 0, n_paths)
        out[:, k + 1] = a + params.phi * out[:, k] + params.sigma * z
    return out


def summarize(pnl: np.ndarray, reason: np.ndarray) -> RuleStats:
    n = len(pnl)
    if n < 2:
        raise ValidationError("need at least 2 paths for a standard deviation")
    mean = float(np.mean(pnl))
    std = float(np.std(pnl, ddof=1))
    counts = np.bincount(reason.astype(np.int64), minlength=len(ExitReason))
    exit_counts = {r: int(counts[r]) for r in ExitReason}
    if std < SHARPE_STD_TOL:
        return RuleStats(mean, std, 0.0, n, exit_counts, 0.0, True)
    sharpe = mean / std
    dev = pnl - mean
    m2 = float(np.mean(dev * dev))
    skew = float(np.mean(dev**3)) / m2**1.5
    kurt = float(np.mean(dev**4)) / m2**2
    # asymptotic variance of the Sharpe estimator, corrected for skew and kurtosis
    var = (1.0 + 0.5 * sharpe**2 - skew * sharpe + 0.25 * (kurt - 3.0) * sharpe**2) / n
    return RuleStats(mean, std, sharpe, n, exit_counts, math.sqrt(max(var, 0.0)), False)


def evaluate_rule(params: OuParams, rule: TradingRule, n_paths: int, rng: RngSpec,
                  node_index: int = 0, chunk_size: int = DEFAULT_CHUNK) -> RuleStats:
    """Monte Carlo mean, standard deviation and Sharpe ratio of the exit P&L."""
    if n_paths < 2:
        raise ValidationError("n_paths must be >= 2")
    sample = simulate_exits(params, rule, n_paths, rng, node_index, chunk_size)
    return summarize(sample.pnl, sample.reason)
