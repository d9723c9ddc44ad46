"""Command-line front end.

Every subcommand prints one JSON document (or CSV with ``--format csv`` where offered).
Exit status: 0 on success, 2 on invalid input, 3 when ``--strict`` is given and the
result failed its own accuracy check.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import scene as scene_io
from .bounds import RegimeError, alpha_thinned_boundary, alpha_thinning_expectation, \
    extremal_set, opacity_check, theorem3_bounds
from .energy import QuadratureSpec, energy, energy_identity_check
from .estimators import ContainmentError, estimate_moments
from .geometry import GeometryError, RectSet
from .optimizer import AnnealSchedule, nu_variance_bounds, optimize, sweep, sweep_csv
from .render import render_svg

EXIT_OK, EXIT_INVALID, EXIT_DEGRADED = 0, 2, 3


# ---------------------------------------------------------------------------
# argument helpers


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be a finite nonnegative number")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**63:
        raise argparse.ArgumentTypeError("seed must be a nonnegative 63-bit integer")
    return v


def _common(p: argparse.ArgumentParser, strict=True):
    p.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    if strict:
        p.add_argument("--strict", action="store_true",
                       help="exit 3 when the result fails its accuracy check")


def _add_scene(p, required=True):
    p.add_argument("--scene", type=Path, required=required, help="scene JSON file")
    p.add_argument("--domain", help="override the scene domain, e.g. disk:1, square, ellipse:2,1")


def _add_mc(p, samples=10**6):
    p.add_argument("--samples", type=_positive_int, default=samples)
    p.add_argument("--seed", type=_seed, default=42)


def _add_quad(p):
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--split-radius", type=float, default=None)


def _add_length(p, required=True):
    p.add_argument("--domain", default="disk:1", help="domain spec (default disk:1)")
    if required:
        p.add_argument("--length", type=_nonneg_float, required=True)


def _add_anneal(p):
    p.add_argument("--steps", type=_positive_int, default=100_000)
    p.add_argument("--restarts", type=_positive_int, default=4)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--panel-size", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crofton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="Monte Carlo count moments of a scene")
    _add_scene(p)
    _add_mc(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _common(p)

    p = sub.add_parser("energy", help="self-projection energy by adaptive quadrature")
    _add_scene(p)
    _add_quad(p)
    _common(p)

    p = sub.add_parser("identity", help="energy identity: Monte Carlo against quadrature")
    _add_scene(p)
    _add_mc(p)
    _add_quad(p)
    _common(p)

    p = sub.add_parser("bounds", help="closed-form lower and upper bounds at length L")
    _add_length(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _common(p, strict=False)

    p = sub.add_parser("extremal", help="boundary copies plus chord attaining the lower bound")
    _add_length(p)
    p.add_argument("--out", type=Path, help="write the configuration as a scene file")
    p.add_argument("--svg", type=Path)
    _common(p, strict=False)

    p = sub.add_parser("thin", help="randomly thinned boundary construction")
    _add_length(p)
    _add_mc(p, samples=10**5)
    p.add_argument("--draws", type=_positive_int, default=10)
    p.add_argument("--pieces", type=_positive_int, default=256)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _common(p)

    p = sub.add_parser("opacity", help="fraction of hitting lines meeting a set")
    _add_scene(p)
    _add_mc(p)
    _common(p, strict=False)

    p = sub.add_parser("optimize", help="anneal a fixed-length polyline set")
    _add_length(p)
    _add_anneal(p)
    p.add_argument("--history", type=Path, help="CSV of the best chain (step,temp,objective,accepted)")
    p.add_argument("--out", type=Path, help="write the best configuration as a scene file")
    p.add_argument("--svg", type=Path)
    _common(p)

    p = sub.add_parser("sweep", help="anneal over a grid of lengths")
    _add_length(p, required=False)
    p.add_argument("--lmin", type=_nonneg_float, default=0.0)
    p.add_argument("--lmax", type=_nonneg_float, default=None,
                   help="default: twice the domain perimeter")
    p.add_argument("--points", type=_positive_int, default=31)
    _add_anneal(p)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    _common(p)

    p = sub.add_parser("figure1", help="cross in the unit disk: mean, variance and bound")
    _add_mc(p)
    p.add_argument("--svg", type=Path)
    _common(p, strict=False)
    return parser


# ---------------------------------------------------------------------------
# subcommands


def _load_scene(args) -> scene_io.Scene:
    sc = scene_io.load(args.scene)
    if args.domain:
        sc = scene_io.Scene(scene_io.parse_domain(args.domain), sc.set)
    return sc


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(args.rel_tol, args.max_depth, args.split_radius)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_moments(args):
    sc = _load_scene(args)
    rep = estimate_moments(sc.set, sc.domain, args.samples, args.seed)
    length = sc.set.total_length
    err = abs(rep.croftonLength - length)
    ok = err <= max(3.0 * rep.stdErrCrofton, 1e-9 * max(length, 1.0))
    out = {**rep.to_dict(), "totalLength": length, "stdErrCrofton": rep.stdErrCrofton,
           "stdErrQuarter": rep.stdErrQuarter, "croftonWithin3SE": ok}
    return out, ok


def cmd_energy(args):
    sc = _load_scene(args)
    res = energy(sc.set, _spec(args))
    return {"totalLength": sc.set.total_length, **res.to_dict()}, res.converged


def cmd_identity(args):
    sc = _load_scene(args)
    spec = _spec(args)
    chk = energy_identity_check(sc.set, sc.domain, args.samples, args.seed, spec)
    res = energy(sc.set, spec)
    return {**chk.to_dict(), "energy": res.value, "converged": res.converged}, \
        chk.ok and res.converged


def cmd_bounds(args):
    dom = scene_io.parse_domain(args.domain)
    rep = theorem3_bounds(dom, args.length)
    return rep.to_dict(), True


def cmd_extremal(args):
    dom = scene_io.parse_domain(args.domain)
    rect = extremal_set(dom, args.length)
    rep = theorem3_bounds(dom, args.length)
    sc = scene_io.Scene(dom, rect)
    if args.out:
        scene_io.save(sc, args.out)
    if args.svg:
        args.svg.write_text(render_svg(dom, rect), encoding="utf-8")
    return {"bounds": rep.to_dict(), "scene": scene_io.scene_to_dict(sc)}, True


def cmd_thin(args):
    dom = scene_io.parse_domain(args.domain)
    rows = []
    for k in range(args.draws):
        rect = alpha_thinned_boundary(dom, args.length, args.pieces, seed=args.seed + k)
        rep = estimate_moments(rect, dom, args.samples, args.seed + k, check_containment=False)
        rows.append({"draw": k, "realizedLength": rect.total_length,
                     "quarterSecondMomentMu": rep.quarterSecondMomentMu,
                     "stdErrQuarter": rep.stdErrQuarter})
    vals = np.array([r["quarterSecondMomentMu"] for r in rows])
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else rows[0]["stdErrQuarter"]
    upper = theorem3_bounds(dom, args.length).thm3Upper
    ok = mean <= upper + 3.0 * se
    summary = {"length": args.length, "draws": rows, "mean": mean, "stdErrMean": se,
               "expectation": alpha_thinning_expectation(dom, args.length), "thm3Upper": upper,
               "withinUpperBound": ok}
    if args.format == "csv":
        return rows, ok
    return summary, ok


def cmd_opacity(args):
    sc = _load_scene(args)
    rep = opacity_check(sc.set, sc.domain, args.samples, args.seed)
    return rep.to_dict(), True


def _schedule(args) -> AnnealSchedule:
    return AnnealSchedule(steps=args.steps, panelSize=args.panel_size, seed=args.seed)


def cmd_optimize(args):
    dom = scene_io.parse_domain(args.domain)
    best, runs = optimize(dom, args.length, _schedule(args), args.restarts)
    lo, hi = nu_variance_bounds(dom, args.length)
    ok = best.objective >= lo - 3.0 * best.objectiveSE
    rect = best.best.to_rectset() if best.best.polylines else RectSet(())
    sc = scene_io.Scene(dom, rect)
    if args.history:
        args.history.write_text(best.history_csv(), encoding="utf-8")
    if args.out:
        scene_io.save(sc, args.out)
    if args.svg:
        args.svg.write_text(render_svg(dom, rect), encoding="utf-8")
    out = {"length": args.length, "bestObjective": best.objective, "objectiveSE": best.objectiveSE,
           "panelObjective": best.panelObjective, "lowerBound": lo, "upperBound": hi,
           "aboveLowerBound": ok, "restartObjectives": [r.objective for r in runs],
           "acceptanceRate": best.acceptance_rate,
           "polylines": [p.tolist() for p in best.best.polylines]}
    return out, ok


def cmd_sweep(args):
    dom = scene_io.parse_domain(args.domain)
    lmax = 2.0 * dom.perimeter if args.lmax is None else args.lmax
    grid = np.linspace(args.lmin, lmax, args.points)
    rows = sweep(dom, grid, _schedule(args), args.restarts)
    ok = all(r.margin_in_se >= -3.0 for r in rows)
    if args.format == "csv":
        return sweep_csv(rows), ok
    return {"rows": [asdict(r) for r in rows],
            "aboveLowerBound": ok}, ok


def cmd_figure1(args):
    sc = scene_io.golden_scenes()["cross"]
    rep = estimate_moments(sc.set, sc.domain, args.samples, args.seed)
    exact = (16 + 32 * (1 - math.sqrt(2) / 2)) / (4 * math.pi) - (4 / math.pi) ** 2
    lo, _ = nu_variance_bounds(sc.domain, 4.0)
    if args.svg:
        args.svg.write_text(render_svg(sc.domain, sc.set, lines=100, seed=args.seed),
                            encoding="utf-8")
    return {"configuration": "two perpendicular diameters of the unit disk", "L": 4.0,
            "meanCount": rep.meanCount, "meanExact": 4 / math.pi,
            "variance": rep.variance, "varianceExact": exact, "stdErrVariance": rep.stdErrVariance,
            "varianceApproxReference": 0.4, "nuVarianceLowerBound": lo,
            "notice": "only the cross configuration is reproduced; the other two reference "
                      "configurations come without coordinates"}, True


COMMANDS = {"moments": cmd_moments, "energy": cmd_energy, "identity": cmd_identity,
            "bounds": cmd_bounds, "extremal": cmd_extremal, "thin": cmd_thin,
            "opacity": cmd_opacity, "optimize": cmd_optimize, "sweep": cmd_sweep,
            "figure1": cmd_figure1}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        result, ok = COMMANDS[args.command](args)
    except (scene_io.SceneError, GeometryError, ContainmentError, RegimeError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if isinstance(result, str):
        stdout.write(result)
    elif isinstance(result, list):
        stdout.write(_csv(_jsonable(result)))
    elif getattr(args, "format", "json") == "csv":
        stdout.write(_csv([{k: v for k, v in _jsonable(result).items()
                            if not isinstance(v, (list, dict))}]))
    else:
        doc = _jsonable(result)
        if not args.deterministic:
            doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if getattr(args, "strict", False) and not ok:
        print("error: result failed its accuracy check", file=sys.stderr)
        return EXIT_DEGRADED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
