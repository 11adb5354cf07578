#!/usr/bin/env python3
"""Run the desk-scale accuracy and coverage studies and print report tables.

Desk scale (100 replicates, B=50, B1=B2=100) finishes in a few hours on one
core; pass --preset full for the reference scale (500 replicates, B=100,
B1=B2=200), which is an overnight job.  Tables land in --outdir as CSV.

Usage:
    python scripts/run_desk_studies.py --outdir results [--preset desk]
        [--cases case1 case2 case3 case4] [--workers N] [--seed 0]
"""

import argparse
import os
import sys

from gpdthresh.cli import write_rows
from gpdthresh.eqd import EqdConfig
from gpdthresh.simcases import case_spec
from gpdthresh.streams import root_stream
from gpdthresh.study import PRESETS, coverage_study, default_grid_spec, quantile_study, threshold_study


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", required=True)
    ap.add_argument("--preset", choices=tuple(PRESETS), default="desk")
    ap.add_argument("--cases", nargs="+",
                    default=["case1", "case2", "case3", "case4"])
    ap.add_argument("--gaussian-n", type=int, default=2000)
    ap.add_argument("--coverage-case", default="case4")
    ap.add_argument("--workers", type=int, default=0, help="0 = all CPUs")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    preset = PRESETS[args.preset]
    accuracy_rows = []

    for cid in args.cases:
        spec = case_spec(cid)
        cfg = EqdConfig(n_boot=preset["n_boot"], seed=args.seed)
        grid = default_grid_spec(spec)
        row = threshold_study(spec, preset["n_reps"], grid, cfg,
                              stream=root_stream(args.seed), workers=args.workers)
        print(f"{cid} threshold: rmse={row.rmse:.3f} bias={row.bias:.3f} "
              f"var={row.variance:.4f}")
        accuracy_rows.append(vars(row).copy())
        for qrow in quantile_study(spec, preset["n_reps"], [0, 1, 2], grid, cfg,
                                   stream=root_stream(args.seed + 1),
                                   workers=args.workers):
            print(f"{cid} {qrow.target}: rmse={qrow.rmse:.3f} bias={qrow.bias:.3f}")
            accuracy_rows.append(vars(qrow).copy())

    gspec = case_spec("gaussian", gaussian_n=args.gaussian_n)
    gcfg = EqdConfig(n_boot=preset["n_boot"], seed=args.seed)
    for qrow in quantile_study(gspec, preset["n_reps"], [0, 1, 2],
                               default_grid_spec(gspec), gcfg,
                               stream=root_stream(args.seed + 2),
                               workers=args.workers):
        print(f"gaussian {qrow.target}: rmse={qrow.rmse:.3f}")
        accuracy_rows.append(vars(qrow).copy())
    write_rows(accuracy_rows, "csv", os.path.join(args.outdir, "accuracy.csv"))

    cspec = case_spec(args.coverage_case)
    ccfg = EqdConfig(n_boot=preset["n_boot"], seed=args.seed)
    cov_rows = coverage_study(
        cspec, preset["n_reps"], ("Alg1", "Alg1b", "Alg2"), (0.5, 0.8, 0.95),
        [0, 1, 2], default_grid_spec(cspec), ccfg,
        preset["B1"], preset["B2"], stream=root_stream(args.seed + 3),
        workers=args.workers,
    )
    for r in cov_rows:
        print(f"{r.case_id} {r.algorithm} level={r.level:g} j={r.j}: "
              f"coverage={r.coverage:.3f} ratio={r.width_ratio:.3f}")
    write_rows([vars(r).copy() for r in cov_rows], "csv",
               os.path.join(args.outdir, "coverage.csv"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
