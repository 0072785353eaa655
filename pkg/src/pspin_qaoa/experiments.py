"""Experiment harness: deterministic parameter sweeps over (N, P, h) grids.

Every sweep is a pure function of its ExperimentConfig; per-task seeds are
derived from (base_seed, N, P, h, restart index) so neither grid order nor
the worker count can change any number in the output tables.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.optimize

from . import analytic
from .engine import QaoaParams, equivalent_annealing_time, evaluate
from .optimizer import LinearInit, OptimizerConfig, RandomInit, derive_seed, multi_start
from .sector import ProblemSpec, diagonalize_target, dynamical_gap

EXPERIMENT_KINDS = ("scaling", "field-sweep", "iteration-scaling", "p1-table", "gap-scaling")

# residuals below this are treated as exact zeros and never enter log-log fits
ZERO_RESIDUAL = 1e-10

CRITICAL_FIELDS = {2: 2.0, 3: 1.2956}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    p_exponent: int = 2
    n_grid: tuple[int, ...] = (8,)
    depth_grid: tuple[int, ...] = (1,)
    h_grid: tuple[float, ...] = (0.0,)
    scheme: str = "r"  # "r", "l" or "both"
    dt: float = 1.0
    noise_amplitude: float = 0.05
    n_restarts: int = 20
    base_seed: int = 0
    worker_count: int = 1
    out_path: Optional[str] = None
    out_format: str = "csv"

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not self.n_grid or not self.depth_grid or not self.h_grid:
            raise ConfigError("grids must be non-empty")
        if self.n_restarts < 1:
            raise ConfigError("n_restarts must be >= 1")
        if self.scheme not in ("r", "l", "both"):
            raise ConfigError(f"scheme must be 'r', 'l' or 'both', got {self.scheme!r}")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {self.out_format!r}")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        data = dict(data)
        for key in ("n_grid", "depth_grid"):
            if key in data:
                data[key] = tuple(int(v) for v in data[key])
        if "h_grid" in data:
            data["h_grid"] = tuple(float(v) for v in data["h_grid"])
        return cls(**data)


@dataclass(frozen=True)
class SweepRow:
    n_sites: int
    p_exponent: int
    field: float
    depth: int
    scheme: str
    n_restarts: int
    mean_residual: float
    std_residual: float
    sem_residual: float
    min_residual: float
    max_residual: float
    mean_iters: float
    mean_annealing_time: float
    n_converged: int
    collapse_coordinate: float
    h_critical: float
    status: str = "ok"


@dataclass(frozen=True)
class P1TableRow:
    p_exponent: int
    n_sites: int
    gamma: float
    beta: float
    fidelity: float
    residual: float
    annealing_time: float
    status: str = "ok"


@dataclass(frozen=True)
class GapRow:
    n_sites: int
    p_exponent: int
    h_at_minimum: float
    minimal_gap: float
    status: str = "ok"


def p_star(p: int, n_sites: int) -> int:
    """Critical depth: N/2 + 2 for even p, N + 1 for odd p."""
    return n_sites // 2 + 2 if p % 2 == 0 else n_sites + 1


def collapse_coordinate(p: int, n_sites: int, depth: int) -> float:
    offset = 2 if p % 2 == 0 else 1
    return (depth - offset) / n_sites


def _make_scheme(tag: str, config: ExperimentConfig):
    if tag == "r":
        return RandomInit()
    return LinearInit(dt=config.dt, noise_amplitude=config.noise_amplitude)


def _sweep_task(args: tuple) -> dict:
    """One grid point: a seeded multi-start; runs in the worker process."""
    (n, p, h, depth, tag, dt, noise, n_restarts, seed) = args
    spec = ProblemSpec(n_sites=n, p_exponent=p, field=h)
    scheme = RandomInit() if tag == "r" else LinearInit(dt=dt, noise_amplitude=noise)
    stats = multi_start(spec, depth, scheme, n_restarts, base_seed=seed)
    mean_tau = float(
        np.mean([equivalent_annealing_time(spec, r.params_star) for r in stats.results])
    )
    return {
        "mean_residual": stats.mean_residual,
        "std_residual": stats.std_residual,
        "sem_residual": stats.std_residual / math.sqrt(n_restarts),
        "min_residual": stats.min_residual,
        "max_residual": stats.max_residual,
        "mean_iters": stats.mean_iters,
        "mean_annealing_time": mean_tau,
        "n_converged": stats.n_converged,
    }


def _run_sweep_tasks(points: list[tuple], config: ExperimentConfig) -> list[SweepRow]:
    """Execute grid points (possibly in parallel) and assemble rows in order."""
    args = []
    for n, p, h, depth, tag in points:
        seed = derive_seed(config.base_seed, n, depth, float(h))
        args.append(
            (n, p, h, depth, tag, config.dt, config.noise_amplitude, config.n_restarts, seed)
        )
    if config.worker_count > 1:
        with ProcessPoolExecutor(max_workers=config.worker_count) as pool:
            outcomes = []
            for fut in [pool.submit(_sweep_task, a) for a in args]:
                try:
                    outcomes.append(fut.result())
                except Exception as exc:  # partial failure: keep the row, flag it
                    outcomes.append(exc)
    else:
        outcomes = []
        for a in args:
            try:
                outcomes.append(_sweep_task(a))
            except Exception as exc:
                outcomes.append(exc)

    rows = []
    nan = float("nan")
    for (n, p, h, depth, tag), outcome in zip(points, outcomes):
        if isinstance(outcome, Exception):
            stats = dict(
                mean_residual=nan, std_residual=nan, sem_residual=nan,
                min_residual=nan, max_residual=nan, mean_iters=nan,
                mean_annealing_time=nan, n_converged=0,
            )
            status = f"failed: {outcome}"
        else:
            stats, status = outcome, "ok"
        rows.append(
            SweepRow(
                n_sites=n,
                p_exponent=p,
                field=h,
                depth=depth,
                scheme=tag,
                n_restarts=config.n_restarts,
                collapse_coordinate=collapse_coordinate(p, n, depth),
                h_critical=CRITICAL_FIELDS.get(p, nan),
                status=status,
                **stats,
            )
        )
    return rows


def run_scaling_experiment(config: ExperimentConfig) -> list[SweepRow]:
    """Residual energy vs depth, multi-start r-init (or l-init), one h value."""
    if config.kind != "scaling":
        raise ConfigError("kind must be 'scaling'")
    h = config.h_grid[0]
    tags = ("r", "l") if config.scheme == "both" else (config.scheme,)
    points = [
        (n, config.p_exponent, h, depth, tag)
        for tag in tags
        for n in sorted(config.n_grid)
        for depth in sorted(config.depth_grid)
    ]
    return _run_sweep_tasks(points, config)


def run_field_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Residual energy vs transverse field at fixed (N, p, P), per scheme."""
    if config.kind != "field-sweep":
        raise ConfigError("kind must be 'field-sweep'")
    n = config.n_grid[0]
    depth = config.depth_grid[0]
    tags = ("r", "l") if config.scheme == "both" else (config.scheme,)
    points = [
        (n, config.p_exponent, h, depth, tag)
        for tag in tags
        for h in sorted(config.h_grid)
    ]
    return _run_sweep_tasks(points, config)


def run_iteration_scaling(config: ExperimentConfig) -> list[SweepRow]:
    """Mean BFGS iterations at the critical depth, per system size."""
    if config.kind != "iteration-scaling":
        raise ConfigError("kind must be 'iteration-scaling'")
    h = config.h_grid[0]
    tags = ("r", "l") if config.scheme == "both" else (config.scheme,)
    points = [
        (n, config.p_exponent, h, p_star(config.p_exponent, n), tag)
        for tag in tags
        for n in sorted(config.n_grid)
    ]
    return _run_sweep_tasks(points, config)


def run_p1_table(config: ExperimentConfig) -> list[P1TableRow]:
    """Closed-form depth-1 angles pushed through the circuit, h = 0."""
    if config.kind != "p1-table":
        raise ConfigError("kind must be 'p1-table'")
    rows = []
    for n in sorted(config.n_grid):
        spec = ProblemSpec(n_sites=n, p_exponent=config.p_exponent, field=0.0)
        pair = analytic.exact_p1_params(config.p_exponent, n)
        if pair is None:
            rows.append(
                P1TableRow(
                    p_exponent=config.p_exponent, n_sites=n,
                    gamma=float("nan"), beta=float("nan"),
                    fidelity=float("nan"), residual=float("nan"),
                    annealing_time=float("nan"), status="no closed form (N even)",
                )
            )
            continue
        gamma, beta = pair
        params = QaoaParams(gammas=np.array([gamma]), betas=np.array([beta]))
        record = evaluate(spec, params)
        rows.append(
            P1TableRow(
                p_exponent=config.p_exponent, n_sites=n, gamma=gamma, beta=beta,
                fidelity=record.fidelity, residual=record.residual,
                annealing_time=record.annealing_time,
            )
        )
    return rows


def minimal_gap(n_sites: int, p: int, h_center: float) -> tuple[float, float]:
    """Minimize the dynamically relevant gap over h around h_center;
    returns (h_min, gap)."""

    def gap_at(h):
        return dynamical_gap(ProblemSpec(n_sites, p, float(h)))

    res = scipy.optimize.minimize_scalar(
        gap_at,
        bounds=(0.5 * h_center, 1.5 * h_center),
        method="bounded",
        options={"xatol": 1e-8},
    )
    return float(res.x), float(res.fun)


def run_gap_scaling(config: ExperimentConfig) -> list[GapRow]:
    """Minimal spectral gap near the critical field, per system size."""
    if config.kind != "gap-scaling":
        raise ConfigError("kind must be 'gap-scaling'")
    p = config.p_exponent
    h_center = CRITICAL_FIELDS.get(p, 1.0)
    rows = []
    for n in sorted(config.n_grid):
        try:
            h_min, gap = minimal_gap(n, p, h_center)
            rows.append(GapRow(n_sites=n, p_exponent=p, h_at_minimum=h_min, minimal_gap=gap))
        except Exception as exc:
            rows.append(
                GapRow(
                    n_sites=n, p_exponent=p, h_at_minimum=float("nan"),
                    minimal_gap=float("nan"), status=f"failed: {exc}",
                )
            )
    return rows


def fit_scaling_exponent(rows: Sequence[SweepRow]) -> tuple[float, float]:
    """Least-squares slope of log(mean residual) vs log(1 - P/P*).

    Rows with residual below ZERO_RESIDUAL are exact zeros and excluded, as are
    rows outside 0.1 <= P/P* <= 0.9. Refuses underdetermined fits.
    """
    xs, ys = [], []
    for row in rows:
        ps = p_star(row.p_exponent, row.n_sites)
        ratio = row.depth / ps
        if not (0.1 <= ratio <= 0.9):
            continue
        if not np.isfinite(row.mean_residual) or row.mean_residual < ZERO_RESIDUAL:
            continue
        xs.append(math.log(1.0 - ratio))
        ys.append(math.log(row.mean_residual))
    if len(xs) < 3:
        raise ValueError(f"need at least 3 usable rows for the fit, got {len(xs)}")
    coeffs, res, *_ = np.polyfit(xs, ys, 1, full=True)
    fit_residual = float(res[0]) if len(res) else 0.0
    return float(coeffs[0]), fit_residual


def fit_gap_exponent(rows: Sequence[GapRow], p: int) -> tuple[float, float]:
    """Gap-scaling fit: slope of log(gap) vs log(N) for p=2, vs N for p>=3.

    Returns (slope, r_squared).
    """
    usable = [r for r in rows if np.isfinite(r.minimal_gap) and r.minimal_gap > 0]
    if len(usable) < 3:
        raise ValueError("need at least 3 usable rows for the gap fit")
    x = np.array([math.log(r.n_sites) if p == 2 else r.n_sites for r in usable], float)
    y = np.array([math.log(r.minimal_gap) for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r_squared


def fit_iteration_slope(rows: Sequence[SweepRow]) -> tuple[float, float]:
    """Linear fit of mean iteration count vs N; returns (slope, r_squared)."""
    usable = [r for r in rows if np.isfinite(r.mean_iters)]
    if len(usable) < 3:
        raise ValueError("need at least 3 usable rows for the iteration fit")
    x = np.array([r.n_sites for r in usable], float)
    y = np.array([r.mean_iters for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r_squared


def run_experiment(config: ExperimentConfig):
    runner = {
        "scaling": run_scaling_experiment,
        "field-sweep": run_field_sweep,
        "iteration-scaling": run_iteration_scaling,
        "p1-table": run_p1_table,
        "gap-scaling": run_gap_scaling,
    }[config.kind]
    return runner(config)


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit_results(rows, out_format: str, path, config: Optional[ExperimentConfig] = None):
    """Persist a result table: CSV with a fixed column order, or JSON embedding
    the full config for exact reproduction."""
    if not rows:
        raise ValueError("refusing to emit an empty table")
    path = Path(path)
    columns = [f.name for f in fields(rows[0])]
    try:
        if out_format == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(columns)
                for row in rows:
                    data = asdict(row)
                    writer.writerow([_format_value(data[c]) for c in columns])
        elif out_format == "json":
            payload = {
                "config": asdict(config) if config is not None else None,
                "columns": columns,
                "rows": [asdict(r) for r in rows],
            }
            with open(path, "w") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
        else:
            raise ValueError(f"unknown output format {out_format!r}")
    except OSError as exc:
        raise OSError(f"failed to write results to {path}: {exc}") from exc
    return path


def load_results_json(path) -> tuple[Optional[ExperimentConfig], list[dict]]:
    """Read back a JSON artifact written by emit_results."""
    with open(path) as fh:
        payload = json.load(fh)
    config = None
    if payload.get("config") is not None:
        config = ExperimentConfig.from_dict(payload["config"])
    return config, payload["rows"]
