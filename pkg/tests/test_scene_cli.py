import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from crofton import scene as scene_io
from crofton.cli import main
from crofton.geometry import ConvexPolygon, Disk, Ellipse, RectSet
from crofton.render import chord, render_svg


def run(argv):
    buf = io.StringIO()
    code = main(argv, stdout=buf)
    return code, buf.getvalue()


@pytest.mark.parametrize("name", sorted(scene_io.golden_scenes()))
def test_round_trip(name):
    sc = scene_io.golden_scenes()[name]
    back = scene_io.loads(scene_io.dumps(sc))
    assert scene_io.scene_to_dict(back) == scene_io.scene_to_dict(sc)
    assert back.set.total_length == pytest.approx(sc.set.total_length, abs=1e-12)


def test_round_trip_ellipse(ellipse):
    sc = scene_io.Scene(ellipse, RectSet(()))
    assert scene_io.loads(scene_io.dumps(sc)).domain == ellipse


@pytest.mark.parametrize("text, field", [
    ('{"domain": {"kind": "disk", "radius": 1, "foo": 2}, "set": []}', "domain.foo"),
    ('{"domain": {"kind": "disk"}, "set": []}', "domain.radius"),
    ('{"domain": {"kind": "disk", "radius": 1}, "set": [{"kind": "segment", "a": [0, 0]}]}',
     "set[0].b"),
    ('{"domain": {"kind": "disk", "radius": 1}, "set": [{"kind": "segment", "a": [0, 0], '
     '"b": [1, 0], "mult": 0}]}', "set[0].mult"),
    ('{"domain": {"kind": "blob"}, "set": []}', "domain.kind"),
    ('{"domain": {"kind": "disk", "radius": 1}, "set": [], "extra": 1}', "scene.extra"),
    ('not json', "JSON"),
])
def test_scene_errors_name_the_field(text, field):
    with pytest.raises(scene_io.SceneError, match=field.replace("[", r"\[").replace("]", r"\]")):
        scene_io.loads(text)


def test_parse_domain():
    assert scene_io.parse_domain("disk:2") == Disk((0.0, 0.0), 2.0)
    assert scene_io.parse_domain("disk:1,3,4").center == (3.0, 4.0)
    assert scene_io.parse_domain("square").perimeter == pytest.approx(4.0)
    assert scene_io.parse_domain("square:2").perimeter == pytest.approx(8.0)
    hexagon = scene_io.parse_domain("regular:6")
    assert isinstance(hexagon, ConvexPolygon) and hexagon.perimeter == pytest.approx(6.0)
    assert isinstance(scene_io.parse_domain("ellipse:2,1,0.3"), Ellipse)
    assert scene_io.parse_domain("polygon:0,0;2,0;0,1").perimeter == pytest.approx(3 + math.sqrt(5))
    for bad in ("blob", "regular:2", "ellipse:1", "polygon:0,0;1", "disk:1,2", "disk:-1"):
        with pytest.raises(scene_io.SceneError):
            scene_io.parse_domain(bad)


def test_svg_elements():
    sc = scene_io.golden_scenes()["cross"]
    svg = render_svg(sc.domain, sc.set)
    assert svg.count("<circle") == 1 and svg.count("<line") == 2
    assert render_svg(sc.domain, sc.set) == svg
    with_lines = render_svg(sc.domain, sc.set, lines=20)
    assert with_lines.count("<line") == 22
    sq = scene_io.golden_scenes()["square"]
    svg = render_svg(sq.domain, sq.domain.boundary_pieces(2))
    assert 'stroke-width="0.04"' in svg
    assert render_svg(Disk(), RectSet(())).count("<line") == 0


def test_chord(disk, square):
    a, b = chord(disk, 0.3, 0.5)
    assert np.hypot(*(a - b)) == pytest.approx(2 * math.sqrt(0.75))
    a, b = chord(square, 0.0, 0.25)
    assert np.allclose(sorted([a[1], b[1]]), [0, 1]) and np.allclose([a[0], b[0]], 0.25)
    assert chord(disk, 0.0, 1.5) is None


@pytest.fixture
def cross_file(tmp_path):
    path = tmp_path / "cross.json"
    scene_io.save(scene_io.golden_scenes()["cross"], path)
    return path


def test_cli_moments_deterministic(cross_file):
    argv = ["moments", "--scene", str(cross_file), "--samples", "20000", "--deterministic"]
    code, a = run(argv)
    _, b = run(argv)
    assert code == 0 and a == b
    doc = json.loads(a)
    assert "timestamp" not in doc and doc["totalLength"] == 4.0
    _, c = run(argv[:-1])
    assert "timestamp" in json.loads(c)


def test_cli_moments_csv(tmp_path):
    path = tmp_path / "square.json"
    scene_io.save(scene_io.golden_scenes()["square"], path)
    code, out = run(["moments", "--scene", str(path), "--samples", "5000", "--format", "csv"])
    assert code == 0
    rows = out.splitlines()
    row = dict(zip(rows[0].split(","), rows[1].split(",")))
    assert float(row["croftonLength"]) == pytest.approx(4.0, rel=1e-12)


def test_cli_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"domain": {"kind": "disk", "radius": 1, "foo": 1}, "set": []}')
    assert run(["moments", "--scene", str(bad)])[0] == 2
    assert "domain.foo" in capsys.readouterr().err
    assert run(["moments", "--scene", str(tmp_path / "missing.json")])[0] == 2
    assert run(["extremal", "--length", "5"])[0] == 2
    assert "nearest admissible" in capsys.readouterr().err
    outside = tmp_path / "outside.json"
    outside.write_text('{"domain": {"kind": "disk", "radius": 1}, '
                       '"set": [{"kind": "segment", "a": [0, 0], "b": [3, 0]}]}')
    assert run(["moments", "--scene", str(outside)])[0] == 2
    with pytest.raises(SystemExit) as exc:
        run(["moments", "--scene", str(outside), "--samples", "-3"])
    assert exc.value.code == 2


def test_cli_bounds_and_extremal(tmp_path):
    code, out = run(["bounds", "--length", str(2 * math.pi + 1), "--deterministic"])
    doc = json.loads(out)
    assert code == 0 and doc["inTheoremRegime"]
    assert doc["extremalValue"] == pytest.approx(4 * math.pi + 5)
    scene_path, svg_path = tmp_path / "ext.json", tmp_path / "ext.svg"
    code, _ = run(["extremal", "--length", "2", "--out", str(scene_path), "--svg", str(svg_path)])
    assert code == 0 and scene_io.load(scene_path).set.total_length == pytest.approx(2.0)
    assert svg_path.read_text().startswith("<?xml")


def test_cli_identity_and_energy(cross_file):
    code, out = run(["identity", "--scene", str(cross_file), "--samples", "100000", "--strict",
                     "--deterministic"])
    assert code == 0 and json.loads(out)["ok"]
    code, out = run(["energy", "--scene", str(cross_file), "--deterministic"])
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(16 * (1 - math.sqrt(2) / 2), rel=1e-2)


def test_cli_strict_flags_failed_check(cross_file):
    # the crossing singularity cannot be resolved in four refinement levels
    argv = ["energy", "--scene", str(cross_file), "--max-depth", "4", "--rel-tol", "1e-9"]
    assert run(argv)[0] == 0
    assert run(argv + ["--strict"])[0] == 3


def test_cli_opacity_thin_optimize(tmp_path):
    path = tmp_path / "circle.json"
    scene_io.save(scene_io.golden_scenes()["circle"], path)
    code, out = run(["opacity", "--scene", str(path), "--samples", "10000", "--deterministic"])
    doc = json.loads(out)
    assert code == 0 and doc["opaque"] and doc["lengthRatio"] == pytest.approx(2.0)
    code, out = run(["thin", "--length", str(3 * math.pi), "--draws", "3", "--samples", "5000",
                     "--deterministic"])
    assert code == 0 and json.loads(out)["expectation"] == pytest.approx(9.5 * math.pi)
    hist = tmp_path / "hist.csv"
    code, out = run(["optimize", "--length", "2", "--steps", "2000", "--restarts", "2",
                     "--history", str(hist), "--deterministic"])
    assert code == 0 and json.loads(out)["aboveLowerBound"]
    assert hist.read_text().splitlines()[0] == "step,temp,objective,accepted"
    code, out = run(["sweep", "--points", "3", "--steps", "1000", "--restarts", "1"])
    assert code == 0 and len(out.splitlines()) == 4


def test_cli_figure1():
    code, out = run(["figure1", "--samples", "200000", "--deterministic"])
    doc = json.loads(out)
    assert code == 0
    assert doc["varianceExact"] == pytest.approx(0.39795, abs=1e-5)
    assert abs(doc["variance"] - doc["varianceExact"]) < 3 * doc["stdErrVariance"]
    assert doc["nuVarianceLowerBound"] == pytest.approx(0.19858, abs=1e-5)
    assert "notice" in doc


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "crofton", "bounds", "--length", "4",
                          "--deterministic"], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["thm3Upper"] == pytest.approx(6.6638, abs=1e-4)
