"""Anneal over L in [0, 2|dOmega|] and compare with the integer lower bound on the variance."""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

from crofton.optimizer import AnnealSchedule, sweep, sweep_csv
from crofton.scene import parse_domain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domain", default="disk:1")
    ap.add_argument("--points", type=int, default=31)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("sweep.csv"))
    args = ap.parse_args()

    dom = parse_domain(args.domain)
    grid = np.linspace(0.0, 2 * dom.perimeter, args.points)
    t0 = time.perf_counter()

    def progress(row):
        print(f"L={row.L:7.4f}  best={row.bestObjective:.4f} +- {row.objectiveSE:.4f}  "
              f"lower={row.lowerBound:.4f}  margin={row.margin_in_se:+.1f} SE  "
              f"[{time.perf_counter() - t0:.0f}s]", file=sys.stderr, flush=True)

    rows = sweep(dom, grid, AnnealSchedule(steps=args.steps, seed=args.seed), args.restarts, progress)
    args.out.write_text(sweep_csv(rows), encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
