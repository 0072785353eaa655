#!/usr/bin/env python3
"""Random vs annealing-schedule initialization across the transverse field.

Sweeps h through the phase transition at fixed (N, p, P) with both start
schemes.  Above the critical field the linear-schedule start tracks the
paramagnetic ground state and wins by many orders of magnitude.

    python3 scripts/run_field_comparison.py --n 32 --p-exp 3 --depth 15
"""

import argparse
import sys

import numpy as np

from pspin_qaoa.experiments import CRITICAL_FIELDS, ExperimentConfig, emit_results, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--p-exp", type=int, default=3)
    ap.add_argument("--depth", type=int, default=15)
    ap.add_argument("--h-max", type=float, default=2.5)
    ap.add_argument("--h-points", type=int, default=11)
    ap.add_argument("--restarts", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="field_comparison.csv")
    args = ap.parse_args()

    config = ExperimentConfig(
        kind="field-sweep",
        p_exponent=args.p_exp,
        n_grid=(args.n,),
        depth_grid=(args.depth,),
        h_grid=tuple(np.linspace(0.0, args.h_max, args.h_points)),
        scheme="both",
        n_restarts=args.restarts,
        base_seed=args.seed,
        worker_count=args.workers,
    )
    rows = run_experiment(config)
    emit_results(rows, "csv", args.out, config)
    h_c = CRITICAL_FIELDS.get(args.p_exp)
    print(f"wrote {len(rows)} rows to {args.out}" + (f" (h_c ~ {h_c})" if h_c else ""))
    by_scheme = {}
    for row in rows:
        by_scheme.setdefault(row.scheme, []).append(row)
    for h_idx in range(args.h_points):
        r = by_scheme["r"][h_idx]
        l = by_scheme["l"][h_idx]
        print(
            f"  h={r.field:5.2f}  r-init {r.mean_residual:.3e}  l-init {l.mean_residual:.3e}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
