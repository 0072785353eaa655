#!/usr/bin/env python3
"""Minimal spectral gap near the critical field vs system size.

For p=2 (second-order transition) the gap closes polynomially, ~N^(-1/3);
for p>=3 (first-order) it closes exponentially in N.  The fit distinguishes
the two automatically.

    python3 scripts/run_gap_scan.py --p-exp 2 --n 64:512:64
"""

import argparse
import sys

from pspin_qaoa.cli import parse_grid
from pspin_qaoa.experiments import (
    ExperimentConfig,
    emit_results,
    fit_gap_exponent,
    run_experiment,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p-exp", type=int, default=2)
    ap.add_argument("--n", default="64,128,256,512", help="comma list or a:b:step range")
    ap.add_argument("--out", default="gap_scan.csv")
    args = ap.parse_args()

    config = ExperimentConfig(
        kind="gap-scaling",
        p_exponent=args.p_exp,
        n_grid=parse_grid(args.n, int),
    )
    rows = run_experiment(config)
    emit_results(rows, "csv", args.out, config)
    for row in rows:
        print(f"  N={row.n_sites:4d}  gap {row.minimal_gap:.6e} at h = {row.h_at_minimum:.6f}")
    slope, r2 = fit_gap_exponent(rows, args.p_exp)
    label = "power-law exponent" if args.p_exp == 2 else "decay rate per site"
    print(f"{label}: {slope:.4f} (r^2 = {r2:.4f}); wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
