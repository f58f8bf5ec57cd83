"""Success rate of all-pairs recovery across a grid of sample sizes p.

    python3 scripts/phase_transition.py --n 10 --trials 20 --out sweep.csv
"""

import argparse
import sys

from erspud.config import ExperimentConfig
from erspud.experiments import SWEEP_COLUMNS, sweep
from erspud.textio import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--theta", default="2/n")
    ap.add_argument("--p-grid", default="n + 2, 2*n, 4*n, 8*n, ceil(8*n*log(n))")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = ExperimentConfig(n=args.n, theta=args.theta, trials=args.trials, seed=args.seed,
                           workers=args.workers, timing="wall",
                           p_grid=tuple(s.strip() for s in args.p_grid.split(",")))
    text = csv_text(SWEEP_COLUMNS, sweep(cfg))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


if __name__ == "__main__":
    main()
