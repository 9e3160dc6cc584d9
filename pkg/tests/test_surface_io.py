import json
import re

import numpy as np
import pytest

from hypsurface import cli
from hypsurface.assembly import SurfaceComplex, build_complex, merge_vertices, seed_complex
from hypsurface.cli import PRESETS, cli_main
from hypsurface.errors import PlacementResidual, UnsupportedSchema
from hypsurface.hypermath import PlanarMirror, SphereMirror, hyp_distance, reflect
from hypsurface.surface_io import (
    RunConfig,
    dump_dict,
    export_json,
    export_obj,
    export_povray,
    face_planes,
    json_text,
    load_json,
    obj_text,
    parse_dump,
    povray_text,
)

NUM = r"(-?[0-9.eE+-]+)"
SPHERE = re.compile(rf"sphere {{ <{NUM}, {NUM}, {NUM}>, {NUM}")


def parse_obj(text):
    verts = [list(map(float, l.split()[1:])) for l in text.splitlines() if l.startswith("v ")]
    faces = [list(map(int, l.split()[1:])) for l in text.splitlines() if l.startswith("f ")]
    return np.array(verts).reshape(-1, 3), np.array(faces, dtype=int).reshape(-1, 3)


def orthogonal(a, b):
    """Cosine of the angle between two hyperbolic planes, as Euclidean surfaces."""
    if isinstance(a, PlanarMirror) and isinstance(b, PlanarMirror):
        return abs(a.normal @ b.normal)
    if isinstance(a, PlanarMirror):
        a, b = b, a
    if isinstance(b, PlanarMirror):
        return abs(b.normal @ a.center) / a.radius
    d2 = np.sum((a.center - b.center) ** 2)
    return abs(d2 - a.radius**2 - b.radius**2) / (2 * a.radius * b.radius)


# --- config -----------------------------------------------------------------


def test_run_config_validation():
    assert RunConfig().side == 0.53
    for bad in ({"side": 0}, {"iterations": -1}, {"twist": "left"}, {"antiprism_align": 4},
                {"depth": 7}, {"eps": 0}, {"format": "stl"}, {"command": "draw"}, {"view": "front"}):
        with pytest.raises(ValueError):
            RunConfig(**bad)


# --- OBJ ----------------------------------------------------------------------


def test_obj_seed_counts():
    cx = seed_complex(0.53)
    v, f = parse_obj(obj_text(cx, 0))
    assert (len(v), len(f)) == (18, 26)
    v, f = parse_obj(obj_text(cx, 1))
    assert len(f) == 104
    assert f.min() == 1 and f.max() == len(v)
    assert np.array_equal(v[:18], merge_vertices(cx).coords)


def test_obj_empty():
    v, f = parse_obj(obj_text(SurfaceComplex(0.5), 0))
    assert len(v) == 0 and len(f) == 0


@pytest.mark.parametrize("depth", [0, 1, 2])
def test_obj_face_count(depth):
    cx = build_complex(0.5, 2)
    _, f = parse_obj(obj_text(cx, depth))
    assert len(f) == len(cx.triangle_arrays()[0]) * 4**depth


def test_obj_winding_outward():
    cx = build_complex(0.5, 2)
    v, f = parse_obj(obj_text(cx, 0))
    _, owner, _ = cx.triangle_arrays()
    tri = v[f - 1]
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    centers = np.array([cx.solids[o].vertices.mean(axis=0) for o in owner])
    assert np.all(np.einsum("ij,ij->i", n, tri.mean(axis=1) - centers) > 0)


def test_obj_full_precision(tmp_path):
    cx = seed_complex(0.53)
    export_obj(cx, 0, tmp_path / "a.obj")
    v, _ = parse_obj((tmp_path / "a.obj").read_text())
    assert np.array_equal(v, merge_vertices(cx).coords)


# --- POV-Ray ----------------------------------------------------------------


def test_povray_seed():
    text = povray_text(seed_complex(0.53))
    assert text.count("intersection {") == 26
    spheres = np.array(SPHERE.findall(text), dtype=float)
    assert len(spheres) > 26
    c, r = spheres[:, :3], spheres[:, 3]
    assert np.abs(np.sum(c * c, axis=1) - r * r - 1).max() < 1e-9
    assert "#declare Top = 0;" in text and "#declare Side = 1;" in text
    assert "(View = Top)" in text and "(View = Side)" in text
    assert "#declare View = Side;" in povray_text(seed_complex(0.53), "side")


def test_face_planes_geometry(rng):
    cx = build_complex(0.53, 2)
    coords, _, _ = cx.triangle_arrays()
    thickness = 0.01
    for tri in coords[rng.choice(len(coords), 40, replace=False)]:
        p, q, r = tri
        center, inner, carrier, offset, walls = face_planes(p, q, r, thickness)
        assert carrier.residual(tri).max() < 1e-9
        # offset plane at the requested distance from the face center
        assert hyp_distance(center, reflect(offset, center)) == pytest.approx(2 * thickness, abs=1e-9)
        # inner sits halfway through the slab
        assert hyp_distance(inner, reflect(carrier, inner)) == pytest.approx(thickness, abs=1e-9)
        assert hyp_distance(inner, reflect(offset, inner)) == pytest.approx(thickness, abs=1e-9)
        for w, (u, v, o) in zip(walls, ((p, q, r), (q, r, p), (r, p, q))):
            assert w.residual(np.stack([u, v])).max() < 1e-9
            assert orthogonal(w, carrier) < 1e-7
            # the face centroid and the opposite vertex are on the same side
            assert np.sign(w.side(center)) == np.sign(w.side(o))


def test_planar_carrier():
    tri = np.array([[0.3, 0.0, 0.0], [-0.1, 0.25, 0.0], [-0.1, -0.25, 0.0]])
    center, inner, carrier, offset, walls = face_planes(*tri, 0.01)
    assert isinstance(carrier, PlanarMirror)
    assert isinstance(offset, SphereMirror)
    assert hyp_distance(inner, reflect(offset, inner)) == pytest.approx(0.01, abs=1e-9)
    for w in walls:
        assert orthogonal(w, carrier) < 1e-9


# --- JSON --------------------------------------------------------------------


def test_json_round_trip(tmp_path):
    cx = build_complex(0.53, 2)
    path = tmp_path / "dump.json"
    export_json(cx, {"intersecting": False}, path, RunConfig(iterations=2).echo())
    dump = load_json(path)
    table = merge_vertices(cx)
    assert np.array_equal(dump.vertices, table.coords)
    assert np.array_equal(dump.triangles, table.triangle_ids)
    for s, d in zip(cx.solids, dump.solids):
        assert np.array_equal(np.array(d["vertices"]), s.vertices)
    assert dump.config == RunConfig(iterations=2).echo()
    assert dump.report == {"intersecting": False}


def test_json_seed_and_ids():
    d = dump_dict(seed_complex(0.53))
    assert len(d["solids"]) == 4 and len(d["open_frames"]) == 3
    n = len(d["vertices"])
    ids = [i for t in d["triangles"] for i in t["vertex_ids"]]
    assert min(ids) == 0 and max(ids) < n
    assert all(np.sum(np.square(v)) < 1 for v in d["vertices"])


def test_json_schema_mismatch():
    d = json.loads(json_text(seed_complex(0.53)))
    d["schema_version"] = 99
    with pytest.raises(UnsupportedSchema):
        parse_dump(d)


def test_exports_byte_stable(tmp_path):
    texts = []
    for k in range(2):
        cx = build_complex(0.5, 2)
        export_obj(cx, 1, tmp_path / f"{k}.obj")
        export_json(cx, None, tmp_path / f"{k}.json")
        export_povray(cx, tmp_path / f"{k}.pov")
        texts.append([(tmp_path / f"{k}.{e}").read_bytes() for e in ("obj", "json", "pov")])
    assert texts[0] == texts[1]


# --- CLI ---------------------------------------------------------------------

SCENARIOS = [
    (["check", "--side", "0.1", "--iterations", "5"], 1),
    (["check", "--side", "0.3", "--iterations", "6"], 1),
    (["check", "--side", "0.3", "--iterations", "4"], 0),
    (["check", "--side", "0.6", "--iterations", "6"], 0),
    (["check", "--side", "0.1", "--iterations", "5", "--twist", "cw"], 1),
    (["check", "--side", "0.1", "--iterations", "5", "--depth", "0"], 1),
    (["check", "--side", "0.75", "--iterations", "5", "--depth", "2"], 0),
    (["check", "--side", "0.53", "--iterations", "0"], 0),
    (["check", "--side", "0.2", "--iterations", "6", "--antiprism-align", "2"], 1),
    (["check", "--side", "0.54", "--iterations", "6"], 0),
]


@pytest.mark.parametrize("argv,code", SCENARIOS)
def test_cli_check_codes(argv, code, tmp_path):
    out = tmp_path / "report.json"
    assert cli_main(argv + ["-o", str(out)]) == code
    report = json.loads(out.read_text())
    assert report["intersecting"] == bool(code)


@pytest.mark.parametrize("argv", [
    ["check", "--side", "-1"],
    ["check", "--iterations", "-2"],
    ["check", "--depth", "9"],
    ["bogus"],
    [],
    ["sweep", "--lo", "0.5", "--hi", "0.4", "--iterations", "2"],
    ["sweep", "--lo", "0.54", "--hi", "0.75", "--iterations", "4"],
    ["check", "--config", "/nonexistent/config.json"],
])
def test_cli_usage_errors(argv, capsys):
    assert cli_main(argv) == 2


def test_cli_build_and_render(tmp_path):
    assert cli_main(["build", "--side", "0.53", "--iterations", "0", "--format", "obj",
                     "--depth", "0", "-o", str(tmp_path / "s.obj")]) == 0
    v, f = parse_obj((tmp_path / "s.obj").read_text())
    assert (len(v), len(f)) == (18, 26)
    assert cli_main(["build", "--iterations", "1", "-o", str(tmp_path / "s.json")]) == 0
    dump = load_json(tmp_path / "s.json")
    assert dump.config["iterations"] == 1 and dump.config["side"] == 0.53
    assert cli_main(["render", "--iterations", "0", "--view", "side", "-o", str(tmp_path / "s.pov")]) == 0
    assert (tmp_path / "s.pov").read_text().count("intersection {") == 26


def test_cli_sweep(tmp_path, capsys):
    out = tmp_path / "sweep.json"
    assert cli_main(["sweep", "--lo", "0.1", "--hi", "0.6", "--iterations", "5", "--tol", "0.05",
                     "-o", str(out)]) == 0
    res = json.loads(out.read_text())
    assert 0.1 <= res["bracket_low"] < res["bracket_high"] <= 0.6
    assert res["bracket_high"] - res["bracket_low"] <= 0.05
    assert "bracket" in capsys.readouterr().err


def test_config_precedence(tmp_path, monkeypatch):
    seen = {}
    monkeypatch.setattr(cli, "_run", lambda cfg: seen.setdefault("cfg", cfg) and 0)
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"config": {"side": 0.3, "iterations": 3, "depth": 2}}))
    cli_main(["check", "--config", str(conf), "--iterations", "4"])
    cfg = seen.pop("cfg")
    assert (cfg.side, cfg.iterations, cfg.depth) == (0.3, 4, 2)
    cli_main(["check", "--config", str(conf), "--preset", "s054"])
    cfg = seen.pop("cfg")
    assert (cfg.side, cfg.iterations, cfg.depth) == (0.54, 11, 2)
    cli_main(["check"])
    cfg = seen.pop("cfg")
    assert (cfg.side, cfg.iterations) == (0.53, 8)
    assert PRESETS["full"]["iterations"] == 11


def test_config_unknown_key(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"sidelength": 0.3}))
    assert cli_main(["check", "--config", str(conf)]) == 2


def test_cli_numeric_fault(monkeypatch):
    def boom(*a, **k):
        raise PlacementResidual("placed square misses its target")
    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli_main(["check", "--iterations", "1"]) == 3
