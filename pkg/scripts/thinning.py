"""Randomly thinned boundary: mean quadratic functional over draws against the upper bound."""
import argparse
import math

import numpy as np

from crofton.bounds import alpha_thinned_boundary, alpha_thinning_expectation, theorem3_bounds
from crofton.estimators import estimate_moments
from crofton.scene import parse_domain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domain", default="disk:1")
    ap.add_argument("--length", type=float, default=3 * math.pi)
    ap.add_argument("--draws", type=int, default=50)
    ap.add_argument("--pieces", type=int, default=256)
    ap.add_argument("--samples", type=int, default=10**5)
    args = ap.parse_args()

    dom = parse_domain(args.domain)
    vals = np.array([
        estimate_moments(alpha_thinned_boundary(dom, args.length, args.pieces, seed=k), dom,
                         args.samples, seed=1000 + k).quarterSecondMomentMu
        for k in range(args.draws)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    print(f"mean {vals.mean():.4f} +- {se:.4f}")
    print(f"limit expectation {alpha_thinning_expectation(dom, args.length):.4f}")
    print(f"upper bound       {theorem3_bounds(dom, args.length).thm3Upper:.4f}")


if __name__ == "__main__":
    main()
