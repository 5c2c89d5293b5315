"""Single sweeps, the 25-run batch, and estimation reports, with their files."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Sequence

from . import __version__
from . import io as fio
from .estimator import OuEstimate, build_design, estimate
from .mesh import NO_OPTIMUM_THRESHOLD, OptimalRule, SweepResult, best_rule, build_mesh, sweep
from .ou_model import OuParams, half_life_from_phi, phi_from_half_life
from .rng import RngSpec
from .simulator import ValidationError

# Table 1 ID order: forecast outer, half-life inner.
TABLE_FORECASTS = (0.0, 5.0, 10.0, -5.0, -10.0)
TABLE_HALF_LIVES = (5.0, 10.0, 25.0, 50.0, 100.0)

NODES_FILE = "nodes.csv"
MATRIX_FILE = "matrix.csv"
IMAGE_FILE = "heatmap.pgm"
MANIFEST_FILE = "manifest.txt"
SUMMARY_FILE = "summary.csv"
SUMMARY_HEADER = ("name", "forecast", "hl", "sigma", "best_pt", "best_sl", "best_sharpe",
                  "flagged", "error")


@dataclass
class ExperimentConfig:
    forecast: float
    half_life: float
    sigma: float = 1.0
    max_holding_period: int = 100
    n_paths: int = 100_000
    master_seed: int = 0
    mesh_max: float = 10.0
    mesh_step: float = 0.5
    p0: float = 0.0
    out: Path | None = None
    name: str = "sweep"
    threshold: float = NO_OPTIMUM_THRESHOLD

    def validate(self) -> "ExperimentConfig":
        def bad(field, why):
            raise ValidationError(f"{field}: {why}")

        for f in ("forecast", "half_life", "sigma", "mesh_max", "mesh_step", "p0"):
            if not math.isfinite(getattr(self, f)):
                bad(f, "must be finite")
        if self.half_life <= 0:
            bad("half_life", "must be > 0")
        if self.sigma <= 0:
            bad("sigma", "must be > 0")
        if int(self.n_paths) != self.n_paths or self.n_paths < 2:
            bad("n_paths", "must be an integer >= 2")
        if int(self.max_holding_period) != self.max_holding_period or self.max_holding_period < 1:
            bad("max_holding_period", "must be an integer >= 1")
        if not 0 <= self.master_seed < 2**64:
            bad("master_seed", "must be an unsigned 64-bit integer")
        if not 0 < self.mesh_step <= self.mesh_max:
            bad("mesh_step", "need 0 < mesh_step <= mesh_max")
        return self

    @property
    def params(self) -> OuParams:
        return OuParams(self.forecast, phi_from_half_life(self.half_life), self.sigma, self.p0)


@dataclass
class SweepRun:
    config: ExperimentConfig
    result: SweepResult
    optimum: OptimalRule
    files: dict


def default_batch(root: Path | None = None, n_paths: int = 100_000, master_seed: int = 0,
                  forecasts: Sequence[float] | None = None,
                  half_lives: Sequence[float] | None = None, **overrides) -> list[ExperimentConfig]:
    """The 25 configurations, named ``Table_1`` .. ``Table_25`` by Table 1 ID.

    ``forecasts`` / ``half_lives`` restrict the batch; names keep their IDs.
    """
    out = []
    for k, (f, hl) in enumerate(product(TABLE_FORECASTS, TABLE_HALF_LIVES), start=1):
        if forecasts is not None and f not in forecasts:
            continue
        if half_lives is not None and hl not in half_lives:
            continue
        name = f"Table_{k}"
        out.append(ExperimentConfig(
            forecast=f, half_life=hl, n_paths=n_paths, master_seed=master_seed, name=name,
            out=Path(root) / name if root is not None else None, **overrides))
    return out


def _manifest_entries(cfg: ExperimentConfig, params: OuParams, result: SweepResult,
                      opt: OptimalRule, lo: float, hi: float) -> dict:
    n_pt, n_sl = result.mesh.shape
    return {
        "name": cfg.name,
        "library_version": __version__,
        "forecast": repr(cfg.forecast),
        "half_life": repr(cfg.half_life),
        "phi": repr(params.phi),
        "sigma": repr(cfg.sigma),
        "p0": repr(cfg.p0),
        "m": repr(params.m),
        "max_holding_period": cfg.max_holding_period,
        "n_paths": cfg.n_paths,
        "master_seed": cfg.master_seed,
        "mesh_max": repr(cfg.mesh_max),
        "mesh_step": repr(cfg.mesh_step),
        "n_pt_levels": n_pt,
        "n_sl_levels": n_sl,
        "rng_derivation": RngSpec(cfg.master_seed).derivation,
        "exit_rule": "pnl > pt, then pnl < -sl, then holding_period == max_holding_period",
        "node_order": "row-major, pt outer, sl inner",
        "best_pt": fio.fmt(opt.rule.profit_taking),
        "best_sl": fio.fmt(opt.rule.stop_loss),
        "best_sharpe": fio.fmt(opt.stats.sharpe),
        "no_optimum_threshold": repr(cfg.threshold),
        "no_recognizable_optimum": str(opt.no_recognizable_optimum).lower(),
        "image_rows": "profit-taking levels ascending, top to bottom",
        "image_cols": "stop-loss levels ascending, left to right",
        "image_map": "gray = round(255 * (sharpe - image_min) / (image_max - image_min)), 0 if flat",
        "image_min": repr(lo),
        "image_max": repr(hi),
    }


def run_sweep(config: ExperimentConfig, workers: int = 1) -> SweepRun:
    """Sweep the mesh for one configuration; write its four files if ``config.out`` is set."""
    config.validate()
    params = config.params
    mesh = build_mesh(config.sigma, config.mesh_max, config.mesh_step)
    if config.out is not None:
        out = Path(config.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    result = sweep(params, mesh, config.n_paths, config.max_holding_period,
                   RngSpec(config.master_seed), workers=workers)
    opt = best_rule(result, config.threshold)
    files = {}
    if config.out is not None:
        pixels, lo, hi = fio.gray_levels(result.sharpe)
        contents = {
            NODES_FILE: fio.node_csv(result),
            MATRIX_FILE: fio.matrix_csv(result),
            IMAGE_FILE: fio.pgm(pixels, f"sharpe heat-map {config.name}"),
            MANIFEST_FILE: fio.manifest(_manifest_entries(config, params, result, opt, lo, hi)),
        }
        for fname, text in contents.items():
            path = out / fname
            fio._write_text(path, text)
            files[fname] = path
    return SweepRun(config, result, opt, files)


def run_batch(configs: Sequence[ExperimentConfig], root: Path | None = None,
              workers: int = 1, progress=None) -> list[dict]:
    """Run every configuration; a failing one is recorded and the rest still run.

    Returns one summary row per configuration and writes ``summary.csv`` under
    ``root`` once all runs have finished.
    """
    rows = []
    for cfg in configs:
        row = {"name": cfg.name, "forecast": cfg.forecast, "hl": cfg.half_life,
               "sigma": cfg.sigma, "best_pt": "", "best_sl": "", "best_sharpe": "",
               "flagged": "", "error": ""}
        try:
            run = run_sweep(cfg, workers=workers)
        except (ValueError, OSError) as exc:
            row["error"] = str(exc).replace("\n", " ")
        else:
            row.update(best_pt=run.optimum.rule.profit_taking, best_sl=run.optimum.rule.stop_loss,
                       best_sharpe=run.optimum.stats.sharpe,
                       flagged=str(run.optimum.no_recognizable_optimum).lower())
        rows.append(row)
        if progress is not None:
            progress(row)
    if root is not None:
        Path(root).mkdir(parents=True, exist_ok=True)
        fio._write_text(Path(root) / SUMMARY_FILE, summary_csv(rows))
    return rows


def summary_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fio.fmt(v) for v in (r[k] for k in SUMMARY_HEADER)])
    return buf.getvalue()


def read_summary(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def estimate_report(est: OuEstimate) -> dict:
    report = {"phi_hat": repr(est.phi_hat), "sigma_hat": repr(est.sigma_hat),
              "n_obs": est.n_obs}
    if est.mean_reverting:
        report["half_life"] = repr(half_life_from_phi(est.phi_hat))
    else:
        report["half_life"] = "undefined"
        report["warning"] = "phi_hat outside (0, 1): no half-life, not mean-reverting"
    return report


def run_estimate(path, out: Path | None = None) -> tuple[OuEstimate, dict]:
    """Fit phi and sigma to a price-series CSV and optionally write ``estimate.txt``."""
    est = estimate(build_design(fio.read_price_csv(path)))
    report = estimate_report(est)
    if "warning" in report:
        warnings.warn(report["warning"], RuntimeWarning, stacklevel=2)
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        fio._write_text(out / "estimate.txt", fio.manifest(report))
    return est, report


def config_from_manifest(path) -> ExperimentConfig:
    m = fio.read_manifest(path)
    return ExperimentConfig(
        forecast=float(m["forecast"]), half_life=float(m["half_life"]), sigma=float(m["sigma"]),
        max_holding_period=int(m["max_holding_period"]), n_paths=int(m["n_paths"]),
        master_seed=int(m["master_seed"]), mesh_max=float(m["mesh_max"]),
        mesh_step=float(m["mesh_step"]), p0=float(m["p0"]), name=m["name"],
        threshold=float(m["no_optimum_threshold"]))
