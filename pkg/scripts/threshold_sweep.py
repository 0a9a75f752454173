"""Final gap of averaged projected SGD as the oracle noise level crosses Δ_max.

Runs the {0, 1, 10, 100}·Δ_max grid over several seeds, writes sweep.csv and
sweep.svg, and prints the per-level median gap with a 95% half-width.

    python3 scripts/threshold_sweep.py --d 4 --epsilon 0.05 --scheme L2 --seeds 10
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from zosmooth.cli import fmt
from zosmooth.experiments import DEFAULT_MULTIPLIERS, SWEEP_COLUMNS, median_ci, threshold_setup, threshold_sweep
from zosmooth.plotting import emit_plot
from zosmooth.problems import make_problem


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--problem", default="nonsmooth_norm")
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--scheme", choices=("L1", "L2"), default="L2")
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--batch", type=int, default=1)
    ap.add_argument("--noise", default="uniform")
    ap.add_argument("--multipliers", type=float, nargs="+", default=list(DEFAULT_MULTIPLIERS))
    ap.add_argument("--out", default="results/threshold")
    return ap.parse_args()


def main():
    args = parse_args()
    problem = make_problem(args.problem, args.d)
    th = threshold_setup(problem, args.scheme, args.epsilon, args.batch)
    print(f"gamma={th.gamma:.6g} delta_max={th.delta_max:.6g} N={th.N} sigma2={th.sigma2:.6g}")
    rows = threshold_sweep(problem, args.scheme, args.epsilon, args.multipliers, range(args.seeds),
                           args.batch, args.noise)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([fmt(r[c]) for c in SWEEP_COLUMNS])
    emit_plot(out / "sweep.csv", out / "sweep.svg")

    gaps = np.array([r["final_gap"] for r in rows]).reshape(len(args.multipliers), args.seeds)
    print(f"{'multiplier':>10} {'delta':>12} {'median gap':>12} {'+/-':>10}")
    for m, g in zip(args.multipliers, gaps):
        med, ci = median_ci(g)
        print(f"{m:>10g} {m * th.delta_max:>12.5g} {med:>12.5g} {ci:>10.3g}")


if __name__ == "__main__":
    main()
