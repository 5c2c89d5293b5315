"""Mesh of candidate exit rules, the Monte Carlo sweep over it, and argmax queries."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ou_model import OuParams
from .rng import RngSpec
from .simulator import DEFAULT_CHUNK, RuleStats, TradingRule, ValidationError, evaluate_rule

NO_OPTIMUM_THRESHOLD = 0.05
_LEVEL_RTOL = 1e-9


class NotOnMeshError(LookupError):
    pass


@dataclass(frozen=True)
class Mesh:
    profit_taking_levels: tuple
    stop_loss_levels: tuple

    def __post_init__(self):
        for name in ("profit_taking_levels", "stop_loss_levels"):
            levels = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, levels)
            if not levels:
                raise ValidationError(f"{name} is empty")
            if any(v < 0 or not math.isfinite(v) for v in levels):
                raise ValidationError(f"{name} must be finite and >= 0")
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise ValidationError(f"{name} must be strictly ascending")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.profit_taking_levels), len(self.stop_loss_levels)

    def node_index(self, pt_index: int, sl_index: int) -> int:
        return pt_index * len(self.stop_loss_levels) + sl_index

    def nodes(self):
        """(node_index, pt_index, sl_index, pt, sl), pt outer, sl inner."""
        n = 0
        for i, pt in enumerate(self.profit_taking_levels):
            for j, sl in enumerate(self.stop_loss_levels):
                yield n, i, j, pt, sl
                n += 1


def build_mesh(sigma: float, max_multiple: float = 10.0, step_multiple: float = 0.5) -> Mesh:
    """Levels ``0, step*sigma, 2*step*sigma, ..., max*sigma`` on both axes."""
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValidationError("sigma must be > 0")
    if not (0 < step_multiple <= max_multiple):
        raise ValidationError("need 0 < step_multiple <= max_multiple")
    n = int(math.floor(max_multiple / step_multiple + 1e-9))
    levels = tuple(k * step_multiple * sigma for k in range(n + 1))
    return Mesh(levels, levels)


@dataclass(frozen=True)
class SweepResult:
    mesh: Mesh
    grid: tuple  # grid[pt_index][sl_index] -> RuleStats
    params: OuParams | None = None
    n_paths: int = 0
    max_holding_period: int = 0
    master_seed: int = 0

    def field(self, name: str) -> np.ndarray:
        return np.array([[getattr(s, name) for s in row] for row in self.grid], dtype=float)

    @property
    def sharpe(self) -> np.ndarray:
        return self.field("sharpe")

    def stats(self, pt_index: int, sl_index: int) -> RuleStats:
        return self.grid[pt_index][sl_index]


@dataclass(frozen=True)
class OptimalRule:
    rule: TradingRule
    stats: RuleStats
    pt_index: int
    sl_index: int
    # the grid's best Sharpe ratio is too small to single out a rule
    no_recognizable_optimum: bool = False


def _eval_nodes(params, nodes, n_paths, max_hp, rng, chunk_size):
    return [(n, evaluate_rule(params, TradingRule(pt, sl, max_hp), n_paths, rng, n, chunk_size))
            for n, pt, sl in nodes]


def sweep(params: OuParams, mesh: Mesh, n_paths: int, max_holding_period: int, rng: RngSpec,
          workers: int = 1, chunk_size: int = DEFAULT_CHUNK) -> SweepResult:
    """Evaluate every mesh node on its own independent set of paths.

    Node ``k`` (row-major, profit-taking outer) draws from stream ``k``, so the
    grid does not depend on ``workers``.
    """
    if n_paths < 2:
        raise ValidationError("n_paths must be >= 2")
    TradingRule(0.0, 0.0, max_holding_period)
    todo = [(n, pt, sl) for n, _, _, pt, sl in mesh.nodes()]
    results: dict[int, RuleStats] = {}
    if workers <= 1:
        results.update(_eval_nodes(params, todo, n_paths, max_holding_period, rng, chunk_size))
    else:
        batches = [todo[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_eval_nodes, params, b, n_paths, max_holding_period, rng,
                                   chunk_size) for b in batches if b]
            for f in futures:
                results.update(f.result())
    n_sl = len(mesh.stop_loss_levels)
    grid = tuple(tuple(results[i * n_sl + j] for j in range(n_sl))
                 for i in range(len(mesh.profit_taking_levels)))
    return SweepResult(mesh, grid, params, n_paths, max_holding_period, rng.master_seed)


def _pick(result: SweepResult, mask: np.ndarray, threshold: float) -> OptimalRule:
    sharpe = np.where(mask, result.sharpe, -np.inf)
    # first maximum in row-major order: smallest profit-taking, then smallest stop-loss
    flat = int(np.argmax(sharpe))
    i, j = divmod(flat, sharpe.shape[1])
    stats = result.stats(i, j)
    rule = TradingRule(result.mesh.profit_taking_levels[i], result.mesh.stop_loss_levels[j],
                       result.max_holding_period or 1)
    return OptimalRule(rule, stats, i, j, bool(stats.sharpe < threshold))


def best_rule(result: SweepResult, threshold: float = NO_OPTIMUM_THRESHOLD) -> OptimalRule:
    return _pick(result, np.ones(result.mesh.shape, dtype=bool), threshold)


def _level_index(levels: Sequence[float], value: float) -> int:
    for k, v in enumerate(levels):
        if math.isclose(v, value, rel_tol=_LEVEL_RTOL, abs_tol=_LEVEL_RTOL):
            return k
    raise NotOnMeshError(f"{value!r} is not a mesh level")


def best_stop_loss_given_pt(result: SweepResult, pt: float,
                            threshold: float = NO_OPTIMUM_THRESHOLD) -> OptimalRule:
    """Best stop-loss for a profit target that must already be a mesh level."""
    i = _level_index(result.mesh.profit_taking_levels, pt)
    mask = np.zeros(result.mesh.shape, dtype=bool)
    mask[i, :] = True
    return _pick(result, mask, threshold)


def best_pt_given_max_sl(result: SweepResult, sl_max: float,
                         threshold: float = NO_OPTIMUM_THRESHOLD) -> OptimalRule:
    """Best rule among nodes whose stop-loss magnitude does not exceed ``sl_max``."""
    levels = np.asarray(result.mesh.stop_loss_levels)
    eligible = levels <= sl_max + _LEVEL_RTOL * max(1.0, abs(sl_max))
    if not eligible.any():
        raise NotOnMeshError(f"no stop-loss level <= {sl_max!r}")
    mask = np.broadcast_to(eligible, result.mesh.shape)
    return _pick(result, mask, threshold)
