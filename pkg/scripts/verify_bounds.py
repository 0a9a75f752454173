"""Run the full Monte Carlo check suite and write a report CSV.

    python3 scripts/verify_bounds.py --seed 0 --out results/verify
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from zosmooth.cli import main


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--suite", choices=("full", "negative"), default="full")
    ap.add_argument("--out", default="results/verify")
    return ap.parse_args()


if __name__ == "__main__":
    args = parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "verify.json"
        cfg.write_text(json.dumps({"seed": args.seed, "suite": args.suite}))
        sys.exit(main(["verify", "--config", str(cfg), "--out", args.out]))
