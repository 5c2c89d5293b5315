"""Command line: ``otrsim {sweep,batch,estimate,moments}``."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import __version__
from .experiments import (
    SUMMARY_FILE, ExperimentConfig, default_batch, run_batch, run_estimate, run_sweep,
)
from .mesh import NO_OPTIMUM_THRESHOLD
from .ou_model import OuParams, phi_from_half_life, pnl_moments


def _add_mesh_args(p):
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--p0", type=float, default=0.0, help="entry price (default 0)")
    p.add_argument("--max-hp", type=int, default=100, help="maximum holding period in steps")
    p.add_argument("--n-paths", type=int, default=100_000, help="paths per mesh node")
    p.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    p.add_argument("--mesh-max", type=float, default=10.0, help="largest threshold, in sigmas")
    p.add_argument("--mesh-step", type=float, default=0.5, help="threshold spacing, in sigmas")
    p.add_argument("--threshold", type=float, default=NO_OPTIMUM_THRESHOLD,
                   help="flag 'no recognizable optimum' when the best Sharpe is below this")
    p.add_argument("--workers", type=int, default=1, help="processes used for the mesh nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otrsim",
        description="Optimal profit-taking / stop-loss rules for O-U prices by Monte Carlo.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sweep one (forecast, half-life, sigma) configuration")
    p.add_argument("--forecast", type=float, required=True)
    p.add_argument("--half-life", type=float, required=True)
    _add_mesh_args(p)
    p.add_argument("--name", default="sweep")
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("batch", help="run the 25 Table_N configurations")
    _add_mesh_args(p)
    p.add_argument("--forecast", type=float, action="append",
                   help="only these forecasts (repeatable)")
    p.add_argument("--half-life", type=float, action="append",
                   help="only these half-lives (repeatable)")
    p.add_argument("--out", type=Path, required=True, help="root directory for Table_N/")

    p = sub.add_parser("estimate", help="fit phi and sigma to a price-series CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, help="directory for estimate.txt")

    p = sub.add_parser("moments", help="closed-form mean/variance of P&L at given horizons")
    p.add_argument("--forecast", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--phi", type=float)
    g.add_argument("--half-life", type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--m", type=float, default=1.0, help="position size")
    p.add_argument("--horizon", type=int, nargs="+", required=True)
    return parser


def _config(args, **kw) -> ExperimentConfig:
    return ExperimentConfig(sigma=args.sigma, p0=args.p0, max_holding_period=args.max_hp,
                            n_paths=args.n_paths, master_seed=args.seed, mesh_max=args.mesh_max,
                            mesh_step=args.mesh_step, threshold=args.threshold, **kw)


def _cmd_sweep(args):
    cfg = _config(args, forecast=args.forecast, half_life=args.half_life, out=args.out,
                  name=args.name)
    run = run_sweep(cfg, workers=args.workers)
    o = run.optimum
    print(f"optimal rule: pt={o.rule.profit_taking:g} sl={o.rule.stop_loss:g} "
          f"sharpe={o.stats.sharpe:.4f}")
    if o.no_recognizable_optimum:
        print(f"no recognizable optimum: best sharpe below {cfg.threshold:g}")
    print(f"wrote {args.out}")


def _cmd_batch(args):
    configs = default_batch(args.out, n_paths=args.n_paths, master_seed=args.seed,
                            forecasts=args.forecast, half_lives=args.half_life,
                            sigma=args.sigma, p0=args.p0, max_holding_period=args.max_hp,
                            mesh_max=args.mesh_max, mesh_step=args.mesh_step,
                            threshold=args.threshold)
    if not configs:
        raise ValueError("the forecast/half-life filters select no Table 1 rows")

    def progress(row):
        if row["error"]:
            print(f"{row['name']}: FAILED {row['error']}", flush=True)
        else:
            print(f"{row['name']}: forecast={row['forecast']:g} hl={row['hl']:g} "
                  f"pt={row['best_pt']:g} sl={row['best_sl']:g} "
                  f"sharpe={row['best_sharpe']:.4f}", flush=True)

    rows = run_batch(configs, args.out, workers=args.workers, progress=progress)
    print(f"wrote {Path(args.out) / SUMMARY_FILE}")
    return 1 if any(r["error"] for r in rows) else 0


def _cmd_estimate(args):
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        _, report = run_estimate(args.input, args.out)
    for k, v in report.items():
        print(f"{k} = {v}", file=sys.stderr if k == "warning" else sys.stdout)


def _cmd_moments(args):
    phi = args.phi if args.phi is not None else phi_from_half_life(args.half_life)
    params = OuParams(args.forecast, phi, args.sigma, args.p0, args.m)
    print("t,mean,variance")
    for t in args.horizon:
        mo = pnl_moments(params, t)
        print(f"{t},{mo.mean!r},{mo.variance!r}")


COMMANDS = {"sweep": _cmd_sweep, "batch": _cmd_batch, "estimate": _cmd_estimate,
            "moments": _cmd_moments}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args) or 0
    except (ValueError, LookupError, OSError) as exc:
        print(f"otrsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
