"""Oracle calls to first reach gap <= ε, and the log-log slope against ε.

    python3 scripts/oracle_complexity.py --d 4 --eps 0.2 0.1 0.05 --seeds 5
"""

import argparse

import numpy as np

from zosmooth.experiments import calls_to_reach, loglog_slope
from zosmooth.problems import make_problem


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--problem", default="nonsmooth_norm")
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--scheme", choices=("L1", "L2"), default="L2")
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--seeds", type=int, default=5)
    return ap.parse_args()


def main():
    args = parse_args()
    problem = make_problem(args.problem, args.d)
    medians = []
    for eps in args.eps:
        hits = [calls_to_reach(problem, args.scheme, eps, s) for s in range(args.seeds)]
        if any(h is None for h in hits):
            raise SystemExit(f"epsilon={eps}: target not reached within the harness budget")
        medians.append(float(np.median(hits)))
        print(f"eps={eps:<8g} calls={hits} median={medians[-1]:.0f}")
    print(f"log-log slope: {loglog_slope(args.eps, medians):.3f}  (reference -2)")


if __name__ == "__main__":
    main()
