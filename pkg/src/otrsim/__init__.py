"""Optimal profit-taking / stop-loss rules for mean-reverting prices, found by simulation."""

__version__ = "0.1.0"

from .ou_model import (  # noqa: E402
    DomainError, OuParams, PnlMoments, half_life_from_phi, phi_from_half_life, pnl_moments, step,
)
from .rng import RngSpec  # noqa: E402
from .simulator import (  # noqa: E402
    ExitReason, PathOutcome, RuleStats, TradingRule, ValidationError, evaluate_rule,
    simulate_exits, simulate_path,
)
from .estimator import (  # noqa: E402
    OpportunitySeries, OuEstimate, RegressionVectors, build_design, estimate,
)
from .mesh import (  # noqa: E402
    Mesh, NotOnMeshError, OptimalRule, SweepResult, best_pt_given_max_sl, best_rule,
    best_stop_loss_given_pt, build_mesh, sweep,
)
