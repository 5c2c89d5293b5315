import itertools

import numpy as np
import pytest

from otrsim.mesh import (
    Mesh, NotOnMeshError, SweepResult, best_pt_given_max_sl, best_rule, best_stop_loss_given_pt,
    build_mesh, sweep,
)
from otrsim.ou_model import OuParams
from otrsim.rng import RngSpec
from otrsim.simulator import RuleStats, TradingRule, ValidationError, evaluate_rule


def test_build_mesh_default():
    m = build_mesh(1.0)
    assert m.shape == (21, 21)
    assert m.profit_taking_levels == tuple(np.linspace(0, 10, 21))
    assert m.stop_loss_levels == m.profit_taking_levels


def test_build_mesh_scaled_and_small():
    assert build_mesh(2.0).profit_taking_levels == tuple(float(k) for k in range(21))
    assert build_mesh(1.0, 2, 1).stop_loss_levels == (0.0, 1.0, 2.0)


@pytest.mark.parametrize("args", [(0,), (-1,), (1, 1, 0), (1, 1, 2)])
def test_build_mesh_validation(args):
    with pytest.raises(ValidationError):
        build_mesh(*args)


def test_mesh_validation():
    with pytest.raises(ValidationError):
        Mesh([1, 0], [0])
    with pytest.raises(ValidationError):
        Mesh([0, 0], [0])
    with pytest.raises(ValidationError):
        Mesh([], [0])
    with pytest.raises(ValidationError):
        Mesh([-1], [0])


def grid(sharpes, pt=None, sl=None):
    sharpes = np.asarray(sharpes, dtype=float)
    pt = pt or [float(k) for k in range(sharpes.shape[0])]
    sl = sl or [float(k) for k in range(sharpes.shape[1])]
    rows = tuple(tuple(RuleStats(0.0, 1.0, float(s), 2, {}) for s in row) for row in sharpes)
    return SweepResult(Mesh(pt, sl), rows, max_holding_period=100)


def test_best_rule_unique_argmax():
    opt = best_rule(grid([[1, 2], [3, 0]]))
    assert (opt.pt_index, opt.sl_index) == (1, 0)
    assert opt.rule == TradingRule(1.0, 0.0, 100)
    assert opt.stats.sharpe == 3


def test_best_rule_ties_go_to_smallest_thresholds():
    opt = best_rule(grid(np.ones((3, 3))))
    assert (opt.pt_index, opt.sl_index) == (0, 0)
    opt = best_rule(grid([[0, 1, 1], [1, 0, 0]]))
    assert (opt.pt_index, opt.sl_index) == (0, 1)


def test_no_recognizable_optimum_flag():
    assert best_rule(grid([[0.01, 0.04]])).no_recognizable_optimum
    assert not best_rule(grid([[0.01, 0.06]])).no_recognizable_optimum
    assert not best_rule(grid([[0.01, 0.04]]), threshold=0.02).no_recognizable_optimum


def test_best_stop_loss_given_pt():
    g = grid([[0.1, 0.9, 0.4], [0.0, 0.0, 0.0]])
    opt = best_stop_loss_given_pt(g, 0.0)
    assert (opt.pt_index, opt.sl_index) == (0, 1)
    opt = best_stop_loss_given_pt(g, 1.0)
    assert (opt.pt_index, opt.sl_index) == (1, 0)
    with pytest.raises(NotOnMeshError):
        best_stop_loss_given_pt(g, 0.5)


def test_best_pt_given_max_sl():
    g = grid([[0.2, 0.1, 5.0], [0.7, 0.3, 0.0]])
    opt = best_pt_given_max_sl(g, 0.5)
    assert (opt.pt_index, opt.sl_index) == (1, 0)
    opt = best_pt_given_max_sl(g, 10.0)
    assert opt == best_rule(g)
    with pytest.raises(NotOnMeshError):
        best_pt_given_max_sl(grid([[1.0]], sl=[1.0]), 0.5)


def test_constrained_optimum_differs_from_global():
    sharpes = np.array([[0.5, 2.0], [1.5, 0.1]])
    g = grid(sharpes, sl=[1.0, 3.0])
    # brute force: filter then argmax
    eligible = [(sharpes[i, j], i, j) for i, j in itertools.product(range(2), range(2))
                if g.mesh.stop_loss_levels[j] <= 2.0]
    _, bi, bj = max(eligible)
    opt = best_pt_given_max_sl(g, 2.0)
    assert (opt.pt_index, opt.sl_index) == (bi, bj) == (1, 0)
    assert (best_rule(g).pt_index, best_rule(g).sl_index) == (0, 1)


def test_sweep_deterministic_paths_give_zero_sharpe():
    res = sweep(OuParams(3, 0.5, 0), build_mesh(1, 2, 1), 100, 20, RngSpec(0))
    assert res.sharpe.shape == (3, 3)
    assert np.all(res.sharpe == 0)


def test_sweep_matches_serial_loop():
    params, mesh, rng = OuParams.from_half_life(5, 5, 1), build_mesh(1, 1, 1), RngSpec(77)
    res = sweep(params, mesh, 10, 100, rng)
    node = 0
    for i, pt in enumerate(mesh.profit_taking_levels):
        for j, sl in enumerate(mesh.stop_loss_levels):
            assert res.stats(i, j) == evaluate_rule(params, TradingRule(pt, sl, 100), 10, rng, node)
            node += 1


def test_sweep_independent_of_workers():
    params, mesh, rng = OuParams.from_half_life(0, 5, 1), build_mesh(1, 3, 1), RngSpec(5)
    a = sweep(params, mesh, 200, 50, rng, workers=1)
    b = sweep(params, mesh, 200, 50, rng, workers=3)
    assert a.grid == b.grid


def test_best_rule_invariant_to_evaluation_order():
    params, mesh, rng = OuParams.from_half_life(5, 10, 1), build_mesh(1, 3, 1), RngSpec(8)
    res = sweep(params, mesh, 300, 100, rng)
    order = list(mesh.nodes())[::-1]
    rows = [[None] * 4 for _ in range(4)]
    for n, i, j, pt, sl in order:
        rows[i][j] = evaluate_rule(params, TradingRule(pt, sl, 100), 300, rng, n)
    shuffled = SweepResult(mesh, tuple(tuple(r) for r in rows), params, 300, 100, 8)
    assert best_rule(shuffled) == best_rule(res)


def test_nodes_row_major():
    m = build_mesh(1, 1, 0.5)
    assert [(n, i, j) for n, i, j, _, _ in m.nodes()] == [
        (0, 0, 0), (1, 0, 1), (2, 0, 2), (3, 1, 0), (4, 1, 1), (5, 1, 2),
        (6, 2, 0), (7, 2, 1), (8, 2, 2)]
    assert m.node_index(2, 1) == 7
