"""Command-line front end for the experiment harness.

Subcommands: scaling, field-sweep, iters, p1-table, gap, verify.
Grid flags accept comma lists ("4,6,8") or ranges ("2:12:2", inclusive).
A JSON config can be supplied with --config; explicit flags win over it.
Exit codes: 0 success, 1 invalid config, 2 partial task failures.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analytic
from .engine import QaoaParams, energy_and_gradient
from .experiments import (
    ConfigError,
    ExperimentConfig,
    emit_results,
    fit_gap_exponent,
    fit_iteration_slope,
    fit_scaling_exponent,
    run_experiment,
)
from .optimizer import r_init
from .sector import ProblemSpec

_KIND_BY_COMMAND = {
    "scaling": "scaling",
    "field-sweep": "field-sweep",
    "iters": "iteration-scaling",
    "p1-table": "p1-table",
    "gap": "gap-scaling",
}


def parse_grid(text: str, cast=float) -> tuple:
    """Parse "a,b,c" or "start:stop:step" (stop inclusive) into a tuple."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (cast(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        values = []
        v = start
        eps = 1e-9 * max(1.0, abs(step))
        while v <= stop + eps:
            values.append(cast(v))
            v += step
        return tuple(values)
    return tuple(cast(p) for p in text.split(",") if p.strip())


def _add_common_flags(sub):
    sub.add_argument("--n", help="system-size grid, e.g. 8,12,16 or 4:16:4")
    sub.add_argument("--p-exp", type=int, help="interaction exponent p")
    sub.add_argument("--h", help="transverse-field grid")
    sub.add_argument("--depth", help="circuit-depth grid")
    sub.add_argument("--scheme", choices=["r", "l", "both"], help="initialization scheme")
    sub.add_argument("--dt", type=float, help="Trotter step for the linear schedule")
    sub.add_argument("--noise", type=float, help="l-init multiplicative noise amplitude")
    sub.add_argument("--restarts", type=int, help="restarts per grid point")
    sub.add_argument("--seed", type=int, help="base seed")
    sub.add_argument("--workers", type=int, help="worker process count")
    sub.add_argument("--out", help="output path")
    sub.add_argument("--format", choices=["csv", "json"], help="output format")
    sub.add_argument("--config", help="JSON ExperimentConfig file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pspin-qaoa",
        description="QAOA ground-state preparation sweeps for the p-spin ferromagnet",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for command in _KIND_BY_COMMAND:
        sub = subs.add_parser(command)
        _add_common_flags(sub)
    subs.add_parser("verify", help="run the analytic/symmetry/identity check suites")
    return parser


def config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    data["kind"] = _KIND_BY_COMMAND[args.command]
    overrides = {
        "n_grid": parse_grid(args.n, int) if args.n else None,
        "p_exponent": args.p_exp,
        "h_grid": parse_grid(args.h, float) if args.h else None,
        "depth_grid": parse_grid(args.depth, int) if args.depth else None,
        "scheme": args.scheme,
        "dt": args.dt,
        "noise_amplitude": args.noise,
        "n_restarts": args.restarts,
        "base_seed": args.seed,
        "worker_count": args.workers,
        "out_path": args.out,
        "out_format": args.format,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _print_fit(config: ExperimentConfig, rows) -> None:
    try:
        if config.kind == "scaling":
            b, fit_res = fit_scaling_exponent(rows)
            print(f"scaling exponent b = {b:.4f} (fit residual {fit_res:.3g})")
        elif config.kind == "iteration-scaling":
            slope, r2 = fit_iteration_slope(rows)
            print(f"iteration slope = {slope:.4f} per site (r^2 = {r2:.4f})")
        elif config.kind == "gap-scaling":
            slope, r2 = fit_gap_exponent(rows, config.p_exponent)
            label = "log-log exponent" if config.p_exponent == 2 else "decay rate per site"
            print(f"gap {label} = {slope:.4f} (r^2 = {r2:.4f})")
    except ValueError as exc:
        print(f"fit skipped: {exc}")


def run_verify() -> int:
    """Quick self-checks of the closed-form machinery; returns an exit code."""
    ok = True

    passed = all(
        analytic.verify_power_identity(k, n, m)
        for k in range(7)
        for n in range(0, 9, 4)
        for m in range(1, 2 ** (k + 4), 2)
    )
    print(f"power identity (k<=6, 4|n<=8, all odd m): {'PASS' if passed else 'FAIL'}")
    ok &= passed

    passed = all(
        dec.reconstruct() == p
        for p in range(2, 65, 2)
        for dec in analytic.all_even_p_decompositions(p)
    )
    print(f"even-p decompositions reconstruct (p<=64): {'PASS' if passed else 'FAIL'}")
    ok &= passed

    passed = True
    for p, n in [(3, 5), (5, 7), (2, 5), (4, 7)]:
        gamma, beta = analytic.exact_p1_params(p, n)
        fid = analytic.p1_fidelity_closed_form(p, n, gamma)
        passed &= fid > 1.0 - 1e-12
    print(f"depth-1 closed-form fidelities: {'PASS' if passed else 'FAIL'}")
    ok &= passed

    passed = True
    rng = np.random.default_rng(12345)
    for p, n in [(2, 6), (2, 5), (3, 6), (3, 5)]:
        spec = ProblemSpec(n_sites=n, p_exponent=p, field=0.7)
        for _ in range(10):
            params = r_init(3, int(rng.integers(2**63)))
            e0, _ = energy_and_gradient(spec, params)
            for transform in analytic.symmetry_group(p, n):
                shifted = transform.apply(params, component=1)
                e1, _ = energy_and_gradient(spec, shifted)
                passed &= abs(e1 - e0) < 1e-12
    print(f"symmetry-table energy invariance: {'PASS' if passed else 'FAIL'}")
    ok &= passed

    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return run_verify()
    try:
        config = config_from_args(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1

    rows = run_experiment(config)
    n_failed = sum(1 for r in rows if r.status.startswith("failed"))
    if config.out_path:
        emit_results(rows, config.out_format, config.out_path, config)
        print(f"wrote {len(rows)} rows to {config.out_path}")
    else:
        for row in rows:
            print(row)
    _print_fit(config, rows)
    if n_failed:
        print(f"{n_failed} grid point(s) failed", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
