"""Grow the {3,7} surface by gluing prisms and antiprisms along square faces.

Each new solid starts as the scaled canonical copy at O and is carried onto
its target square by reflect(N) -> rotate -> reflect(M): N sends the
canonical anchor vertex to O, M sends the target anchor to O, and the
rotation lines up the images of the next two labeled vertices.

The seed is a prism at O with an antiprism on each of its three squares. One
iteration glues a prism to every open square and then an antiprism to each of
that prism's two remaining squares, so the number of open squares doubles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import InvalidSide, MergeAmbiguity, PlacementResidual
from .hypermath import (
    EPS_BALL,
    IDENTITY,
    Isometry,
    apply_isometry,
    bisector_with_origin,
    check_in_ball,
    hyp_distance,
    reflect,
    rotation_from_frames,
)
from .solids import SolidKind, SquareFrame, canonical, face_frame, scaled

PLACEMENT_TOL = 1e-7
RESIDUAL_FAULT = 1e-6
MERGE_RADIUS = 1e-7
MERGE_GUARD = 10.0

PRISM_ATTACH_FACE = 0
ANTIPRISM_ATTACH_FACE = 0
ANTIPRISM_FAR_FACE = 1
PRISM_FREE_FACES = (1, 2)


class TwistDirection(enum.Enum):
    CCW = "ccw"
    CW = "cw"


def shift_frame(frame: SquareFrame, k: int) -> SquareFrame:
    """Cyclically relabel a frame; ``k = 1`` moves the anchor onto ``second``."""
    c = np.roll(frame.corners, -k, axis=0)
    return SquareFrame(c[0], c[1], c[2], c[3], frame.outward)


def twist_frame(target: SquareFrame, twist: TwistDirection) -> SquareFrame:
    """Labeling used to attach a prism; the two twists differ by one shift."""
    return shift_frame(target, 1 if twist is TwistDirection.CCW else 0)


def attach_frame(kind: SolidKind, face_id: int, vertices=None) -> SquareFrame:
    """Frame of a solid's own square as it must meet its target.

    The stored face order is counterclockwise from outside the solid; the
    target is counterclockwise from outside its owner, which is the opposite
    side, so the labels run backwards here (anchor fixed).
    """
    fr = face_frame(canonical(kind), face_id, vertices)
    return SquareFrame(fr.anchor, fr.fourth, fr.third, fr.second, -fr.outward)


@dataclass(frozen=True, eq=False)
class PlacedSolid:
    id: int
    kind: SolidKind
    side: float
    vertices: np.ndarray
    iteration: int
    parent_face: Optional[tuple]  # (solid id, face id) this solid is glued onto
    isometry: Isometry
    attach_face: Optional[int] = None

    @property
    def faces(self):
        return canonical(self.kind).faces

    def frame(self, face_id: int) -> SquareFrame:
        return face_frame(canonical(self.kind), face_id, self.vertices)


def place_solid(kind: SolidKind, side: float, target: SquareFrame, attach_face: int,
                twist: Optional[TwistDirection] = None, align: int = 0, *,
                solid_id: int = 0, iteration: int = 0, parent_face=None) -> PlacedSolid:
    """Move the scaled canonical solid so ``attach_face`` covers ``target``.

    ``twist`` relabels the target for prisms; ``align`` adds a further cyclic
    shift (used for the antiprism base alignment).
    """
    if twist is not None:
        target = twist_frame(target, twist)
    if align:
        target = shift_frame(target, align)
    base = scaled(kind, side)
    src = attach_frame(kind, attach_face, base.vertices)

    steps = []
    src_b, src_g = src.second, src.third
    if np.linalg.norm(src.anchor) > EPS_BALL:
        n_mirror = bisector_with_origin(src.anchor)
        steps.append(n_mirror)
        src_b, src_g = reflect(n_mirror, np.stack([src_b, src_g]))
    dst_b, dst_g = target.second, target.third
    m_mirror = None
    if np.linalg.norm(target.anchor) > EPS_BALL:
        m_mirror = bisector_with_origin(target.anchor)
        dst_b, dst_g = reflect(m_mirror, np.stack([dst_b, dst_g]))
    steps.append(rotation_from_frames(src_b, src_g, dst_b, dst_g))
    if m_mirror is not None:
        steps.append(m_mirror)
    iso = Isometry(tuple(steps))

    verts = apply_isometry(iso, base.vertices)
    check_in_ball(verts)
    landed = attach_frame(kind, attach_face, verts).corners
    err = np.abs(landed - target.corners).max()
    if not err <= RESIDUAL_FAULT:
        raise PlacementResidual(f"placed square misses its target by {err:.3g}")
    return PlacedSolid(solid_id, kind, float(side), verts, iteration, parent_face, iso, attach_face)


@dataclass(frozen=True, eq=False)
class OpenFrame:
    frame: SquareFrame
    owner: int
    face: int


@dataclass(frozen=True, eq=False)
class SurfaceTriangle:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    owner: int
    face: int
    vertex_ids: Optional[tuple] = None


@dataclass(eq=False)
class SurfaceComplex:
    side: float
    twist: TwistDirection = TwistDirection.CCW
    antiprism_align: int = 0
    solids: list = field(default_factory=list)
    open_frames: list = field(default_factory=list)
    glued_pairs: list = field(default_factory=list)
    iterations_done: int = 0

    def copy(self) -> SurfaceComplex:
        return SurfaceComplex(self.side, self.twist, self.antiprism_align, list(self.solids),
                              list(self.open_frames), list(self.glued_pairs), self.iterations_done)

    def count(self, kind: SolidKind) -> int:
        return sum(1 for s in self.solids if s.kind is kind)

    def triangle_arrays(self, start_solid: int = 0):
        """Exposed triangles as arrays ``(coords (n,3,3), owner (n,), face (n,))``.

        Only solids with id ``>= start_solid`` are included.
        """
        coords, owners, faces = [], [], []
        for s in self.solids[start_solid:]:
            can = canonical(s.kind)
            tri_ids = can.triangle_faces
            idx = np.array([can.faces[f] for f in tri_ids])
            coords.append(s.vertices[idx])
            owners.append(np.full(len(tri_ids), s.id))
            faces.append(np.array(tri_ids))
        if not coords:
            return np.zeros((0, 3, 3)), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate(coords), np.concatenate(owners), np.concatenate(faces)

    @property
    def triangles(self) -> list:
        coords, owners, faces = self.triangle_arrays()
        table = merge_vertices(self)
        return [SurfaceTriangle(c[0], c[1], c[2], int(o), int(f), tuple(int(i) for i in ids))
                for c, o, f, ids in zip(coords, owners, faces, table.triangle_ids)]

    def all_vertices(self) -> np.ndarray:
        if not self.solids:
            return np.zeros((0, 3))
        return np.concatenate([s.vertices for s in self.solids])


def _next_id(cx: SurfaceComplex) -> int:
    return len(cx.solids)


def _glue(cx, kind, target: OpenFrame, attach_face, twist, align, iteration) -> PlacedSolid:
    solid = place_solid(kind, cx.side, target.frame, attach_face, twist, align,
                        solid_id=_next_id(cx), iteration=iteration,
                        parent_face=(target.owner, target.face))
    cx.solids.append(solid)
    cx.glued_pairs.append(((target.owner, target.face), (solid.id, attach_face)))
    return solid


def _add_antiprisms(cx, prism: PlacedSolid, faces, iteration):
    for f in faces:
        target = OpenFrame(prism.frame(f), prism.id, f)
        ap = _glue(cx, SolidKind.SQUARE_ANTIPRISM, target, ANTIPRISM_ATTACH_FACE, None,
                   cx.antiprism_align, iteration)
        cx.open_frames.append(OpenFrame(ap.frame(ANTIPRISM_FAR_FACE), ap.id, ANTIPRISM_FAR_FACE))


def seed_complex(side: float, twist: TwistDirection = TwistDirection.CCW,
                 antiprism_align: int = 0) -> SurfaceComplex:
    """Prism at the origin with an antiprism glued to each of its squares."""
    if not side > 0:
        raise InvalidSide(f"side length must be positive, got {side!r}")
    twist = TwistDirection(twist)
    cx = SurfaceComplex(float(side), twist, int(antiprism_align) % 4)
    base = scaled(SolidKind.TRIANGULAR_PRISM, side)
    prism = PlacedSolid(0, SolidKind.TRIANGULAR_PRISM, float(side), base.vertices.copy(), 0, None, IDENTITY)
    cx.solids.append(prism)
    _add_antiprisms(cx, prism, range(3), 0)
    return cx


def iterate(cx: SurfaceComplex, twist: Optional[TwistDirection] = None) -> SurfaceComplex:
    """One growth step: prism on every open square, antiprisms on each new prism."""
    twist = cx.twist if twist is None else TwistDirection(twist)
    out = cx.copy()
    if not cx.open_frames:
        return out
    out.open_frames = []
    it = cx.iterations_done + 1
    for target in cx.open_frames:
        prism = _glue(out, SolidKind.TRIANGULAR_PRISM, target, PRISM_ATTACH_FACE, twist, 0, it)
        _add_antiprisms(out, prism, PRISM_FREE_FACES, it)
    out.iterations_done = it
    return out


def build_complex(side: float, iterations: int, twist=TwistDirection.CCW, antiprism_align: int = 0):
    cx = seed_complex(side, twist, antiprism_align)
    for _ in range(iterations):
        cx = iterate(cx)
    return cx


def expected_counts(iterations: int) -> dict:
    """Closed-form solid, frame and triangle counts after ``iterations`` steps."""
    n = iterations
    prisms = 1 + 3 * (2**n - 1)
    antiprisms = 3 + 3 * (2 ** (n + 1) - 2)
    return {
        "prisms": prisms,
        "antiprisms": antiprisms,
        "open_frames": 3 * 2**n,
        "triangles": 2 * prisms + 8 * antiprisms,
    }


# ---------------------------------------------------------------------------
# vertex merging


@dataclass(frozen=True, eq=False)
class VertexTable:
    coords: np.ndarray  # (m, 3) first occurrence of each merged vertex
    solid_ids: list  # per solid: array of global ids for its local vertices
    triangle_ids: np.ndarray  # (t, 3) global ids, same order as triangle_arrays()

    def __len__(self):
        return len(self.coords)


def _merge_labels(points: np.ndarray, radius: float) -> np.ndarray:
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    wide = tree.query_pairs(radius * MERGE_GUARD, output_type="ndarray")
    if len(wide) and np.any(labels[wide[:, 0]] != labels[wide[:, 1]]):
        raise MergeAmbiguity("distinct vertices closer than the merge guard band")
    # relabel by first appearance for stable ids
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return remap[labels]


def merge_vertices(cx: SurfaceComplex, radius: float = MERGE_RADIUS) -> VertexTable:
    pts = cx.all_vertices()
    labels = _merge_labels(pts, radius)
    if len(labels) == 0:
        return VertexTable(np.zeros((0, 3)), [], np.zeros((0, 3), dtype=np.int64))
    _, first = np.unique(labels, return_index=True)
    coords = pts[first]
    solid_ids, tri_ids = [], []
    offset = 0
    for s in cx.solids:
        ids = labels[offset:offset + len(s.vertices)]
        offset += len(s.vertices)
        solid_ids.append(ids)
        can = canonical(s.kind)
        tri_ids.append(ids[np.array([can.faces[f] for f in can.triangle_faces])])
    return VertexTable(coords, solid_ids, np.concatenate(tri_ids))


def vertex_valence(cx: SurfaceComplex, table: Optional[VertexTable] = None):
    """Triangle count per merged vertex and a mask of vertices on open squares."""
    table = merge_vertices(cx) if table is None else table
    valence = np.bincount(table.triangle_ids.ravel(), minlength=len(table))
    on_open = np.zeros(len(table), dtype=bool)
    for of in cx.open_frames:
        face = canonical(cx.solids[of.owner].kind).faces[of.face]
        on_open[table.solid_ids[of.owner][list(face)]] = True
    return valence, on_open


def pairwise_hyp_distances(verts: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(verts), 1)
    return hyp_distance(verts[i], verts[j])


def solid_edge_lengths(solid: PlacedSolid) -> np.ndarray:
    e = canonical(solid.kind).edges
    return hyp_distance(solid.vertices[e[:, 0]], solid.vertices[e[:, 1]])
