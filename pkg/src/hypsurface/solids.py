"""Uniform triangular prisms and square antiprisms centered at the origin.

A uniform Euclidean solid centered at O, scaled down into the ball, is also a
uniform hyperbolic solid: its vertices lie on a sphere about O and every edge
subtends the same central angle, so all edges get the same hyperbolic length.
Scaling is therefore a one-parameter root find.

Face vertex lists run counterclockwise when viewed from outside the solid.
Square faces come first in ``faces``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSide, NotASquareFace
from .hypermath import EPS_BALL, hyp_distance


class SolidKind(enum.Enum):
    TRIANGULAR_PRISM = "prism"
    SQUARE_ANTIPRISM = "antiprism"


@dataclass(frozen=True, eq=False)
class CanonicalSolid:
    kind: SolidKind
    vertices: np.ndarray  # (n, 3), unit edges
    faces: tuple  # tuple of index tuples, squares first
    edges: np.ndarray  # (m, 2)

    @property
    def circumradius(self) -> float:
        return float(np.linalg.norm(self.vertices[0]))

    @property
    def square_faces(self) -> list[int]:
        return [i for i, f in enumerate(self.faces) if len(f) == 4]

    @property
    def triangle_faces(self) -> list[int]:
        return [i for i, f in enumerate(self.faces) if len(f) == 3]


@dataclass(frozen=True, eq=False)
class ScaledSolid:
    kind: SolidKind
    scale: float
    side: float
    vertices: np.ndarray
    faces: tuple
    edges: np.ndarray

    @property
    def square_faces(self) -> list[int]:
        return [i for i, f in enumerate(self.faces) if len(f) == 4]

    @property
    def triangle_faces(self) -> list[int]:
        return [i for i, f in enumerate(self.faces) if len(f) == 3]


@dataclass(frozen=True, eq=False)
class SquareFrame:
    """Labeled square: anchor, second, third, fourth in cyclic order.

    ``outward`` is a unit vector pointing to the open side of the square.
    """

    anchor: np.ndarray
    second: np.ndarray
    third: np.ndarray
    fourth: np.ndarray
    outward: np.ndarray

    @property
    def corners(self) -> np.ndarray:
        return np.stack([self.anchor, self.second, self.third, self.fourth])


def _orient_outward(verts, face):
    pts = verts[list(face)]
    n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
    if n @ pts.mean(axis=0) < 0:
        return (face[0],) + tuple(reversed(face[1:]))
    return tuple(face)


def _edges_from_faces(faces):
    edges = set()
    for f in faces:
        for a, b in zip(f, f[1:] + f[:1]):
            edges.add((min(a, b), max(a, b)))
    return np.array(sorted(edges), dtype=np.int64)


def _build(kind, verts, faces):
    faces = tuple(_orient_outward(verts, f) for f in faces)
    return CanonicalSolid(kind, verts, faces, _edges_from_faces(faces))


def canonical_prism() -> CanonicalSolid:
    """Unit-edge right prism over an equilateral triangle."""
    ang = np.radians([90.0, 210.0, 330.0])
    rho = 1.0 / np.sqrt(3.0)
    ring = np.column_stack([rho * np.cos(ang), rho * np.sin(ang)])
    verts = np.vstack([
        np.column_stack([ring, np.full(3, -0.5)]),
        np.column_stack([ring, np.full(3, 0.5)]),
    ])
    squares = [(i, (i + 1) % 3, 3 + (i + 1) % 3, 3 + i) for i in range(3)]
    triangles = [(0, 2, 1), (3, 4, 5)]
    return _build(SolidKind.TRIANGULAR_PRISM, verts, squares + triangles)


ANTIPRISM_HEIGHT = 2.0 ** -0.25


def canonical_antiprism() -> CanonicalSolid:
    """Unit-edge square antiprism; top square turned by 45 degrees."""
    rho = 1.0 / np.sqrt(2.0)
    h = ANTIPRISM_HEIGHT
    bottom = np.radians([0.0, 90.0, 180.0, 270.0])
    top = bottom + np.pi / 4
    verts = np.vstack([
        np.column_stack([rho * np.cos(bottom), rho * np.sin(bottom), np.full(4, -h / 2)]),
        np.column_stack([rho * np.cos(top), rho * np.sin(top), np.full(4, h / 2)]),
    ])
    squares = [(0, 3, 2, 1), (4, 5, 6, 7)]
    triangles = []
    for i in range(4):
        j = (i + 1) % 4
        triangles.append((i, j, 4 + i))
        triangles.append((4 + i, j, 4 + j))
    return _build(SolidKind.SQUARE_ANTIPRISM, verts, squares + triangles)


_CANONICAL = {}


def canonical(kind: SolidKind) -> CanonicalSolid:
    if kind not in _CANONICAL:
        _CANONICAL[kind] = canonical_prism() if kind is SolidKind.TRIANGULAR_PRISM else canonical_antiprism()
    return _CANONICAL[kind]


def edge_hyp_length(solid: CanonicalSolid, t: float) -> float:
    a, b = solid.edges[0]
    return float(hyp_distance(t * solid.vertices[a], t * solid.vertices[b]))


def scale_to_hyperbolic(solid: CanonicalSolid, s: float, max_iter: int = 200) -> ScaledSolid:
    """Scale ``solid`` about O so every edge has hyperbolic length ``s``."""
    if not s > 0:
        raise InvalidSide(f"side length must be positive, got {s!r}")
    lo, hi = 0.0, (1.0 - EPS_BALL) / solid.circumradius
    t = 0.5 * (lo + hi)
    for _ in range(max_iter):
        t = 0.5 * (lo + hi)
        err = edge_hyp_length(solid, t) - s
        if abs(err) < 1e-13 or t in (lo, hi):
            break
        if err < 0:
            lo = t
        else:
            hi = t
    return ScaledSolid(solid.kind, t, float(s), t * solid.vertices, solid.faces, solid.edges)


@functools.lru_cache(maxsize=64)
def scaled(kind: SolidKind, s: float) -> ScaledSolid:
    """Cached scaled copy with read-only vertices."""
    out = scale_to_hyperbolic(canonical(kind), s)
    out.vertices.setflags(write=False)
    return out


def face_frame(solid, face_id: int, vertices=None) -> SquareFrame:
    """Labeled frame of a square face, in stored (outward CCW) order.

    ``vertices`` overrides the solid's own coordinates, e.g. for a placed copy.
    """
    face = solid.faces[face_id]
    if len(face) != 4:
        raise NotASquareFace(f"face {face_id} of {solid.kind.value} has {len(face)} vertices")
    verts = solid.vertices if vertices is None else vertices
    a, b, c, d = (np.asarray(verts[i], dtype=float) for i in face)
    return SquareFrame(a, b, c, d, square_normal(a, b, c, d))


def square_normal(a, b, c, d) -> np.ndarray:
    n = np.cross(c - a, d - b)
    return n / np.linalg.norm(n)
