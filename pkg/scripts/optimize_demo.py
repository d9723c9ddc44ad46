"""Single optimization run with history CSV and an SVG of the best configuration."""
import argparse
from pathlib import Path

from crofton.geometry import RectSet
from crofton.optimizer import AnnealSchedule, nu_variance_bounds, optimize
from crofton.render import render_svg
from crofton.scene import parse_domain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domain", default="disk:1")
    ap.add_argument("--length", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--restarts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--prefix", default="optimize")
    args = ap.parse_args()

    dom = parse_domain(args.domain)
    best, runs = optimize(dom, args.length, AnnealSchedule(steps=args.steps, seed=args.seed),
                          args.restarts)
    lo, _ = nu_variance_bounds(dom, args.length)
    for k, r in enumerate(runs):
        print(f"restart {k}: {r.objective:.4f} +- {r.objectiveSE:.4f} "
              f"(panel {r.panelObjective:.4f}, acceptance {r.acceptance_rate:.2f})")
    print(f"best {best.objective:.4f}; integer lower bound {lo:.4f}")
    Path(f"{args.prefix}_history.csv").write_text(best.history_csv(), encoding="utf-8")
    rect = best.best.to_rectset() if best.best.polylines else RectSet(())
    Path(f"{args.prefix}.svg").write_text(render_svg(dom, rect), encoding="utf-8")


if __name__ == "__main__":
    main()
