"""Scene files (a domain plus a rectifiable set) and compact domain specifications.

A scene is a JSON object::

    {"domain": {"kind": "disk", "center": [0, 0], "radius": 1},
     "set": [{"kind": "segment", "a": [-1, 0], "b": [1, 0], "mult": 1},
             {"kind": "arc", "center": [0, 0], "radius": 1, "start": 0, "sweep": 6.28318, "mult": 1}]}

Unknown fields are rejected with a message naming the field.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Arc, ConvexDomain, ConvexPolygon, Disk, Ellipse, GeometryError, RectSet, \
    Segment, TWO_PI, unit_square


class SceneError(ValueError):
    """Malformed scene or domain specification."""


@dataclass(frozen=True)
class Scene:
    domain: ConvexDomain
    set: RectSet


_DOMAIN_FIELDS = {
    "disk": ({"kind", "center", "radius"}, {"kind", "radius"}),
    "polygon": ({"kind", "vertices"}, {"kind", "vertices"}),
    "ellipse": ({"kind", "center", "semiAxes", "rotation"}, {"kind", "semiAxes"}),
}
_PIECE_FIELDS = {
    "segment": ({"kind", "a", "b", "mult"}, {"kind", "a", "b"}),
    "arc": ({"kind", "center", "radius", "start", "sweep", "mult"},
            {"kind", "center", "radius", "start", "sweep"}),
}


def _check_fields(obj, table, where: str):
    if not isinstance(obj, dict):
        raise SceneError(f"{where}: expected an object")
    kind = obj.get("kind")
    if kind not in table:
        raise SceneError(f"{where}.kind: unknown kind {kind!r}, expected one of {sorted(table)}")
    allowed, required = table[kind]
    for key in obj:
        if key not in allowed:
            raise SceneError(f"{where}.{key}: unknown field for kind {kind!r}")
    for key in sorted(required - obj.keys()):
        raise SceneError(f"{where}.{key}: missing required field")
    return kind


def _point(value, where: str) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise SceneError(f"{where}: expected a pair of numbers")
    if not all(math.isfinite(v) for v in value):
        raise SceneError(f"{where}: coordinates must be finite")
    return float(value[0]), float(value[1])


def _number(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise SceneError(f"{where}: expected a finite number")
    return float(value)


def _mult(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise SceneError(f"{where}: multiplicity must be a positive integer")
    return value


def domain_from_dict(obj, where: str = "domain") -> ConvexDomain:
    kind = _check_fields(obj, _DOMAIN_FIELDS, where)
    try:
        if kind == "disk":
            return Disk(_point(obj.get("center", [0.0, 0.0]), f"{where}.center"),
                        _number(obj["radius"], f"{where}.radius"))
        if kind == "polygon":
            verts = obj["vertices"]
            if not isinstance(verts, list):
                raise SceneError(f"{where}.vertices: expected a list of points")
            return ConvexPolygon(tuple(_point(v, f"{where}.vertices[{i}]") for i, v in enumerate(verts)))
        return Ellipse(_point(obj.get("center", [0.0, 0.0]), f"{where}.center"),
                       _point(obj["semiAxes"], f"{where}.semiAxes"),
                       _number(obj.get("rotation", 0.0), f"{where}.rotation"))
    except GeometryError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def domain_to_dict(domain: ConvexDomain) -> dict:
    if isinstance(domain, Disk):
        return {"kind": "disk", "center": list(domain.center), "radius": domain.radius}
    if isinstance(domain, ConvexPolygon):
        return {"kind": "polygon", "vertices": [list(v) for v in domain.vertices]}
    if isinstance(domain, Ellipse):
        return {"kind": "ellipse", "center": list(domain.center),
                "semiAxes": list(domain.semi_axes), "rotation": domain.rotation}
    raise TypeError(f"unsupported domain {type(domain).__name__}")


def piece_from_dict(obj, where: str):
    kind = _check_fields(obj, _PIECE_FIELDS, where)
    mult = _mult(obj.get("mult", 1), f"{where}.mult")
    try:
        if kind == "segment":
            return Segment(_point(obj["a"], f"{where}.a"), _point(obj["b"], f"{where}.b"), mult)
        return Arc(_point(obj["center"], f"{where}.center"), _number(obj["radius"], f"{where}.radius"),
                   _number(obj["start"], f"{where}.start"), _number(obj["sweep"], f"{where}.sweep"),
                   mult)
    except GeometryError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def piece_to_dict(piece) -> dict:
    if isinstance(piece, Segment):
        return {"kind": "segment", "a": list(piece.a), "b": list(piece.b), "mult": piece.mult}
    return {"kind": "arc", "center": list(piece.center), "radius": piece.radius,
            "start": piece.start, "sweep": piece.sweep, "mult": piece.mult}


def set_from_list(items, where: str = "set") -> RectSet:
    if not isinstance(items, list):
        raise SceneError(f"{where}: expected a list of pieces")
    return RectSet(tuple(piece_from_dict(p, f"{where}[{i}]") for i, p in enumerate(items)))


def scene_from_dict(obj) -> Scene:
    if not isinstance(obj, dict):
        raise SceneError("scene: expected a JSON object")
    for key in obj:
        if key not in ("domain", "set"):
            raise SceneError(f"scene.{key}: unknown field")
    for key in ("domain", "set"):
        if key not in obj:
            raise SceneError(f"scene.{key}: missing required field")
    return Scene(domain_from_dict(obj["domain"]), set_from_list(obj["set"]))


def scene_to_dict(scene: Scene) -> dict:
    return {"domain": domain_to_dict(scene.domain),
            "set": [piece_to_dict(p) for p in scene.set.pieces]}


def loads(text: str) -> Scene:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene is not valid JSON: {exc}") from exc
    return scene_from_dict(obj)


def dumps(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2)


def load(path) -> Scene:
    return loads(Path(path).read_text(encoding="utf-8"))


def save(scene: Scene, path) -> None:
    Path(path).write_text(dumps(scene) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# compact domain strings used on the command line


def _floats(text: str, where: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def parse_domain(spec: str) -> ConvexDomain:
    """``disk:R[,cx,cy]``, ``square[:side]``, ``regular:n[,R]``, ``ellipse:a,b[,rot]``,
    or ``polygon:x,y;x,y;...``."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "disk":
            v = _floats(rest, spec) or [1.0]
            if len(v) not in (1, 3):
                raise SceneError(f"{spec}: expected disk:R or disk:R,cx,cy")
            return Disk((v[1], v[2]) if len(v) == 3 else (0.0, 0.0), v[0])
        if kind == "square":
            side = _floats(rest, spec)[0] if rest else 1.0
            if side == 1.0:
                return unit_square()
            return ConvexPolygon(((0.0, 0.0), (side, 0.0), (side, side), (0.0, side)))
        if kind == "regular":
            v = _floats(rest, spec)
            if not v or int(v[0]) != v[0] or v[0] < 3:
                raise SceneError(f"{spec}: expected regular:n[,R] with n >= 3")
            n, r = int(v[0]), (v[1] if len(v) > 1 else 1.0)
            ang = TWO_PI * np.arange(n) / n
            return ConvexPolygon(tuple(zip(r * np.cos(ang), r * np.sin(ang))))
        if kind == "ellipse":
            v = _floats(rest, spec)
            if len(v) not in (2, 3):
                raise SceneError(f"{spec}: expected ellipse:a,b[,rotation]")
            return Ellipse((0.0, 0.0), (v[0], v[1]), v[2] if len(v) == 3 else 0.0)
        if kind == "polygon":
            pts = [_floats(p, spec) for p in rest.split(";") if p.strip()]
            if any(len(p) != 2 for p in pts):
                raise SceneError(f"{spec}: polygon vertices must be x,y pairs")
            return ConvexPolygon(tuple(map(tuple, pts)))
    except GeometryError as exc:
        raise SceneError(f"{spec}: {exc}") from exc
    raise SceneError(f"unknown domain kind {kind!r} in {spec!r}")


# ---------------------------------------------------------------------------
# reference scenes


def golden_scenes() -> dict[str, Scene]:
    """Segment, cross, circle, square boundary and circle plus diameter."""
    disk = Disk((0.0, 0.0), 1.0)
    square = unit_square()
    diameter = Segment((-1.0, 0.0), (1.0, 0.0))
    circle = Arc((0.0, 0.0), 1.0, 0.0, TWO_PI)
    return {
        "segment": Scene(disk, RectSet((diameter,))),
        "cross": Scene(disk, RectSet((diameter, Segment((0.0, -1.0), (0.0, 1.0))))),
        "circle": Scene(disk, RectSet((circle,))),
        "square": Scene(square, square.boundary_pieces(1)),
        "circle_diameter": Scene(disk, RectSet((circle, diameter))),
    }
