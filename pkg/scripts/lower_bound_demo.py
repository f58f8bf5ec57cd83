"""Paired random-pairing vs all-pairs trials on Bernoulli-Rademacher data.

    python3 scripts/lower_bound_demo.py --n 30 --trials 20
"""

import argparse
import math

from erspud.lowerbound import DEFAULT_K, dc_failure_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=30)
    ap.add_argument("--p", type=int, help="defaults to 8n")
    ap.add_argument("--c-prime", type=float, default=3.0)
    ap.add_argument("--k", type=float, default=DEFAULT_K)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    p = args.p or 8 * args.n
    theta = args.c_prime * math.log(args.n) / args.n
    print(f"n={args.n} p={p} theta={theta:.4f} q={1 / (8 * theta):.3f}")
    summary = dc_failure_demo(args.n, p, args.c_prime, args.trials, args.seed, args.k, args.workers)
    for r in summary.records:
        print(r.trial, r.mode, "p3", r.p3_ok, "p3_uncapped", r.p3_uncapped, "jstar", r.jstar_recovered,
              "in_pool", r.jstar_in_pool, "events", "".join("1" if e else "0" for e in r.events))
    for mode in ("RandomPairing", "AllPairs"):
        print(f"{mode:14s} p3 rate {summary.rate(mode, 'p3_ok'):.2f}  "
              f"uncapped {summary.rate(mode, 'p3_uncapped'):.2f}  j* misses {summary.misses(mode)}")


if __name__ == "__main__":
    main()
