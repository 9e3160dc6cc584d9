"""Writers for built surfaces: OBJ mesh, POV-Ray CSG scene, canonical JSON.

All writers are deterministic: a fixed configuration produces identical
bytes.  Floats are written with 17 significant digits (OBJ, POV-Ray) or as
the shortest round-tripping repr (JSON).
"""

from __future__ import annotations

import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .assembly import SurfaceComplex, TwistDirection, merge_vertices
from .collision import NARROW_EPS, AABB_PAD
from .errors import UnsupportedSchema
from .hypermath import (
    PlanarMirror,
    SphereMirror,
    bisector_with_origin,
    geodesic_point,
    plane_normal_to_radius,
    plane_through,
    reflect_plane,
)
from .solids import canonical

SCHEMA_VERSION = 1
COMMANDS = ("build", "check", "sweep", "render")
FORMATS = ("obj", "pov", "json")
VIEWS = ("top", "side")


@dataclass
class RunConfig:
    command: str = "check"
    side: float = 0.53
    iterations: int = 8
    twist: str = "ccw"
    antiprism_align: int = 0
    depth: int = 1
    eps: float = NARROW_EPS
    aabb_pad: float = AABB_PAD
    output: Optional[str] = None
    format: str = "json"
    view: str = "top"
    lo: float = 0.40
    hi: float = 0.60
    tol: float = 0.005

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.side > 0:
            raise ValueError("side must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.twist not in ("cw", "ccw"):
            raise ValueError("twist must be 'cw' or 'ccw'")
        if self.antiprism_align not in range(4):
            raise ValueError("antiprism_align must be in 0..3")
        if self.depth not in range(7):
            raise ValueError("depth must be in 0..6")
        if not (self.eps > 0 and self.aabb_pad > 0 and self.tol > 0):
            raise ValueError("tolerances must be positive")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        if self.view not in VIEWS:
            raise ValueError(f"view must be one of {VIEWS}")

    def echo(self) -> dict:
        return asdict(self)


@dataclass
class SurfaceDump:
    schema_version: int
    config: dict
    vertices: np.ndarray
    solids: list
    triangles: np.ndarray  # (t, 3) merged vertex ids
    triangle_owner: np.ndarray
    open_frames: list
    glued_pairs: list
    report: Optional[dict] = None
    extra: dict = field(default_factory=dict)


def _open(path):
    return open(path, "w", encoding="utf-8", newline="\n")


def _write_text(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    if hasattr(path, "write"):
        path.write(text)
        return
    with _open(os.fspath(path)) as fh:
        fh.write(text)


def _f(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# OBJ


def subdivide_mesh(coords: np.ndarray, faces: np.ndarray, depth: int):
    """Geodesic midpoint refinement with shared edge midpoints.

    New vertices are appended after the input ones; children of each face are
    emitted in the same order as ``collision.subdivide_coords``.
    """
    coords = np.asarray(coords, dtype=float)
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    for _ in range(depth):
        if len(faces) == 0:
            break
        e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        e = np.sort(e, axis=1)
        uniq, inv = np.unique(e, axis=0, return_inverse=True)
        inv = inv.reshape(3, -1)
        mids = geodesic_point(coords[uniq[:, 0]], coords[uniq[:, 1]], 0.5)
        base = len(coords)
        coords = np.concatenate([coords, mids])
        mpq, mqr, mrp = base + inv[0], base + inv[1], base + inv[2]
        p, q, r = faces[:, 0], faces[:, 1], faces[:, 2]
        faces = np.stack([
            np.stack([p, mpq, mrp], axis=1),
            np.stack([mpq, q, mqr], axis=1),
            np.stack([mrp, mqr, r], axis=1),
            np.stack([mpq, mqr, mrp], axis=1),
        ], axis=1).reshape(-1, 3)
    return coords, faces


def obj_text(cx: SurfaceComplex, depth: int = 0) -> str:
    table = merge_vertices(cx)
    coords, faces = subdivide_mesh(table.coords, table.triangle_ids, depth)
    out = io.StringIO()
    out.write(f"# hyperbolic {{3,7}} surface, side {_f(cx.side)}, iterations {cx.iterations_done}, "
              f"depth {depth}\n")
    out.write(f"# vertices {len(coords)} faces {len(faces)}\n")
    for v in coords:
        out.write(f"v {_f(v[0])} {_f(v[1])} {_f(v[2])}\n")
    for f in faces + 1:
        out.write(f"f {f[0]} {f[1]} {f[2]}\n")
    return out.getvalue()


def export_obj(cx: SurfaceComplex, depth: int, path) -> None:
    """Write the surface as a triangle mesh, refined ``depth`` times."""
    _write_text(obj_text(cx, depth), path)


# ---------------------------------------------------------------------------
# POV-Ray

SHELL_FRACTION = 0.02

_CAMERAS = {
    "top": ("<0, 0, 3>", "<0, 1, 0>"),
    "side": ("<3, 0, 0>", "<0, 0, 1>"),
}


def _vec(v) -> str:
    return f"<{_f(v[0])}, {_f(v[1])}, {_f(v[2])}>"


def _halfspace(m, keep_point) -> str:
    """POV object whose interior is the side of ``m`` containing ``keep_point``."""
    if isinstance(m, SphereMirror):
        inside = m.side(keep_point) < 0
        return f"sphere {{ {_vec(m.center)}, {_f(m.radius)}{'' if inside else ' inverse'} }}"
    n = m.normal if m.side(keep_point) < 0 else -m.normal
    return f"plane {{ {_vec(n)}, 0 }}"


def _translate_to_origin(p):
    return bisector_with_origin(p) if np.linalg.norm(p) > 1e-12 else None


def _move(mirror, x):
    return x if mirror is None else mirror.reflect(x)


def _move_plane(mirror, plane):
    return plane if mirror is None else reflect_plane(mirror, plane)


def face_planes(p, q, r, thickness: float):
    """Bounding hyperbolic planes of a thin slab around the curved triangle pqr.

    Returns ``(center, inner, carrier, offset, walls)``. ``carrier`` is the
    plane through the three points and ``offset`` the plane at hyperbolic
    distance ``thickness`` from it along their common perpendicular at
    ``center``; ``inner`` lies halfway between them. ``walls`` are the three
    planes through the edges orthogonal to the carrier.
    """
    carrier = plane_through(p, q, r)
    center = geodesic_point(r, geodesic_point(p, q, 0.5), 0.5)
    to_o = _translate_to_origin(center)
    pp, qq = _move(to_o, p), _move(to_o, q)
    n = np.cross(pp, qq)
    n /= np.linalg.norm(n)
    offset = _move_plane(to_o, plane_normal_to_radius(n, np.tanh(thickness / 2.0)))
    inner = _move(to_o, n * np.tanh(thickness / 4.0))
    walls = []
    for u, v, w in ((p, q, r), (q, r, p), (r, p, q)):
        to_u = _translate_to_origin(u)
        vv, ww = _move(to_u, v), _move(to_u, w)
        wall_n = np.cross(np.cross(vv, ww), vv)
        walls.append(_move_plane(to_u, PlanarMirror(wall_n / np.linalg.norm(wall_n))))
    return center, inner, carrier, offset, walls


def povray_text(cx: SurfaceComplex, view: str = "top", shell: float = SHELL_FRACTION) -> str:
    coords, owners, _ = cx.triangle_arrays()
    thickness = shell * cx.side
    out = io.StringIO()
    out.write("// hyperbolic {3,7} surface in the Poincare ball\n")
    out.write(f"// side {_f(cx.side)} iterations {cx.iterations_done} triangles {len(coords)}\n")
    out.write("#version 3.7;\n")
    # numeric so it can be overridden from the command line: Declare=View=1
    for k, name in enumerate(_CAMERAS):
        out.write(f"#declare {name.capitalize()} = {k};\n")
    out.write(f"#ifndef (View) #declare View = {view.capitalize()}; #end\n")
    out.write("global_settings { assumed_gamma 1.0 }\n")
    out.write("background { color rgb <1, 1, 1> }\n")
    for k, (name, (loc, sky)) in enumerate(_CAMERAS.items()):
        out.write(f'{"#if" if k == 0 else "#elseif"} (View = {name.capitalize()})\n')
        out.write(f"  camera {{ orthographic location {loc} sky {sky} look_at <0, 0, 0> "
                  "right x*2.2 up y*2.2 }\n")
    out.write("#end\n")
    out.write("light_source { <4, 3, 5> color rgb <1, 1, 1> }\n")
    out.write("light_source { <-4, -3, 2> color rgb <0.5, 0.5, 0.5> }\n")
    out.write("#declare FaceTexture = texture { pigment { color rgb <0.85, 0.55, 0.25> } "
              "finish { phong 0.4 } }\n")
    for k, (tri, owner) in enumerate(zip(coords, owners)):
        center, inner, carrier, offset, walls = face_planes(tri[0], tri[1], tri[2], thickness)
        parts = [_halfspace(carrier, inner), _halfspace(offset, inner)]
        parts += [_halfspace(w, center) for w in walls]
        out.write(f"// triangle {k} solid {int(owner)}\n")
        out.write("intersection {\n")
        for part in parts:
            out.write(f"  {part}\n")
        out.write("  texture { FaceTexture }\n}\n")
    return out.getvalue()


def export_povray(cx: SurfaceComplex, path, view: str = "top", shell: float = SHELL_FRACTION) -> None:
    """Write a POV-Ray scene with one CSG intersection per curved triangle."""
    _write_text(povray_text(cx, view, shell), path)


# ---------------------------------------------------------------------------
# JSON


def dump_dict(cx: SurfaceComplex, report: Optional[dict] = None, config: Optional[dict] = None) -> dict:
    table = merge_vertices(cx)
    _, owners, faces = cx.triangle_arrays()
    solids = []
    for s, ids in zip(cx.solids, table.solid_ids):
        solids.append({
            "id": s.id,
            "kind": s.kind.value,
            "iteration": s.iteration,
            "parent": list(s.parent_face) if s.parent_face is not None else None,
            "attach_face": s.attach_face,
            "vertex_ids": ids.tolist(),
            "vertices": s.vertices.tolist(),
        })
    frames = []
    for of in cx.open_frames:
        face = canonical(cx.solids[of.owner].kind).faces[of.face]
        frames.append({"owner": of.owner, "face": of.face,
                       "vertex_ids": table.solid_ids[of.owner][list(face)].tolist()})
    if config is None:
        config = {"side": cx.side, "iterations": cx.iterations_done, "twist": cx.twist.value,
                  "antiprism_align": cx.antiprism_align}
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "side": cx.side,
        "iterations_done": cx.iterations_done,
        "vertices": table.coords.tolist(),
        "solids": solids,
        "triangles": [{"vertex_ids": ids.tolist(), "owner": int(o), "face": int(f)}
                      for ids, o, f in zip(table.triangle_ids, owners, faces)],
        "open_frames": frames,
        "glued_pairs": [[list(a), list(b)] for a, b in cx.glued_pairs],
        "report": report,
    }


def json_text(cx: SurfaceComplex, report: Optional[dict] = None, config: Optional[dict] = None) -> str:
    return json.dumps(dump_dict(cx, report, config), sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


def export_json(cx: SurfaceComplex, report, path, config: Optional[dict] = None) -> None:
    """Write the canonical dump (sorted keys, round-trip floats)."""
    _write_text(json_text(cx, report, config), path)


def parse_dump(data: dict) -> SurfaceDump:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnsupportedSchema(f"schema version {version!r} is not supported (expected {SCHEMA_VERSION})")
    tris = data["triangles"]
    return SurfaceDump(
        schema_version=version,
        config=data["config"],
        vertices=np.array(data["vertices"], dtype=float).reshape(-1, 3),
        solids=data["solids"],
        triangles=np.array([t["vertex_ids"] for t in tris], dtype=np.int64).reshape(-1, 3),
        triangle_owner=np.array([t["owner"] for t in tris], dtype=np.int64),
        open_frames=data["open_frames"],
        glued_pairs=data["glued_pairs"],
        report=data.get("report"),
        extra={"side": data.get("side"), "iterations_done": data.get("iterations_done")},
    )


def load_json(path) -> SurfaceDump:
    with open(path, encoding="utf-8") as fh:
        return parse_dump(json.load(fh))


def twist_of(cfg: RunConfig) -> TwistDirection:
    return TwistDirection(cfg.twist)
