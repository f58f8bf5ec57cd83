"""Median deviation ratio of ||Pi v||_1 around its mean as m grows.

    python3 scripts/concentration.py --n 12 --theta 0.25 --m 50 200 800
"""

import argparse

import numpy as np

from erspud.models import derive_seed
from erspud.stochproc import estimate_sup_deviation, rademacher_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--theta", type=float, default=0.25)
    ap.add_argument("--m", type=int, nargs="+", default=[50, 200, 800])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("m,median_ratio,median_sup,min_expected,mu_min")
    for m in args.m:
        stats = []
        for t in range(args.seeds):
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(derive_seed(args.seed, m, t))))
            pi = rademacher_matrix(m, args.n, args.theta, rng)
            stats.append(estimate_sup_deviation(pi, args.theta, args.samples, seed=args.seed))
        ratio = np.median([s.sup_estimate / s.min_expected for s in stats])
        sup = np.median([s.sup_estimate for s in stats])
        print(f"{m},{ratio:.6g},{sup:.6g},{stats[0].min_expected:.6g},{stats[0].mu_min:.6g}")


if __name__ == "__main__":
    main()
