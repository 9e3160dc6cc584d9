"""Self-intersection test for the exposed triangle surface.

Each curved triangle is replaced by ``4**depth`` flat pieces obtained by
repeated geodesic midpoint refinement.  Candidate pairs come from an implicit
bounding volume hierarchy (leaves in Morton order, one complete binary tree,
dual traversal level by level in numpy); the exact test is a vectorized
interval-overlap triangle/triangle predicate.

Pairs whose parent triangles share a merged vertex, belong to the same solid
or to two solids glued along a square are never reported.  Crossings whose
penetration is at most ``GRAZE_FACTOR * eps`` are kept apart as grazing
contacts and do not count as self-intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import SurfaceComplex, SurfaceTriangle, merge_vertices
from .errors import DegenerateTriangle, DepthExceeded
from .hypermath import geodesic_point

NARROW_EPS = 1e-9
AABB_PAD = 1e-8
GRAZE_FACTOR = 10.0
MAX_DEPTH = 6
MIN_AREA = 1e-16
CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class FlatTri:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    source: tuple = (0, 0)  # (surface triangle id, subdivision index)

    @property
    def coords(self) -> np.ndarray:
        return np.stack([self.a, self.b, self.c])


@dataclass
class IntersectionReport:
    intersecting: bool
    pairs: list = field(default_factory=list)
    grazing: list = field(default_factory=list)
    first_iteration: Optional[int] = None
    candidates: int = 0
    tested: int = 0

    def to_dict(self) -> dict:
        return {
            "intersecting": self.intersecting,
            "pairs": [list(p) for p in self.pairs],
            "grazing": [list(p) for p in self.grazing],
            "first_iteration": self.first_iteration,
            "candidates": self.candidates,
            "tested": self.tested,
        }


# ---------------------------------------------------------------------------
# subdivision


def _check_depth(depth):
    if depth < 0 or depth > MAX_DEPTH:
        raise DepthExceeded(f"subdivision depth must be in 0..{MAX_DEPTH}, got {depth}")


def subdivide_coords(tris: np.ndarray, depth: int) -> np.ndarray:
    """Refine ``(n, 3, 3)`` triangles; children of triangle ``i`` are contiguous."""
    _check_depth(depth)
    t = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
    for _ in range(depth):
        p, q, r = t[:, 0], t[:, 1], t[:, 2]
        mpq = geodesic_point(p, q, 0.5)
        mqr = geodesic_point(q, r, 0.5)
        mrp = geodesic_point(r, p, 0.5)
        t = np.stack([
            np.stack([p, mpq, mrp], axis=1),
            np.stack([mpq, q, mqr], axis=1),
            np.stack([mrp, mqr, r], axis=1),
            np.stack([mpq, mqr, mrp], axis=1),
        ], axis=1).reshape(-1, 3, 3)
    return t


def subdivide(tri: SurfaceTriangle, depth: int, tri_id: int = 0) -> list:
    """Flat approximation of one curved surface triangle."""
    flats = subdivide_coords(np.stack([tri.p, tri.q, tri.r])[None], depth)
    return [FlatTri(f[0], f[1], f[2], (tri_id, k)) for k, f in enumerate(flats)]


def _as_coords(tris) -> np.ndarray:
    if isinstance(tris, np.ndarray):
        return tris.reshape(-1, 3, 3)
    if len(tris) == 0:
        return np.zeros((0, 3, 3))
    return np.stack([t.coords if isinstance(t, FlatTri) else np.asarray(t, dtype=float) for t in tris])


# ---------------------------------------------------------------------------
# narrow phase


def _interval(d, p):
    """Range of the triangle's crossing with the other plane, along the line."""
    lo = np.where(d == 0, p, np.inf).min(axis=1)
    hi = np.where(d == 0, p, -np.inf).max(axis=1)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        di, dj = d[:, i], d[:, j]
        cross = di * dj < 0
        denom = np.where(cross, di - dj, 1.0)
        x = p[:, i] + (p[:, j] - p[:, i]) * di / denom
        lo = np.where(cross, np.minimum(lo, x), lo)
        hi = np.where(cross, np.maximum(hi, x), hi)
    return lo, hi


def _orient2(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _coplanar(A, B, normal, eps):
    """2D test for coplanar pairs; returns (hit, strict)."""
    axis = np.abs(normal).argmax(axis=1)
    keep = np.array([[1, 2], [0, 2], [0, 1]])[axis]
    a2 = np.take_along_axis(A, keep[:, None, :], axis=2)
    b2 = np.take_along_axis(B, keep[:, None, :], axis=2)
    scale = np.maximum(np.abs(a2).max(axis=(1, 2)), np.abs(b2).max(axis=(1, 2)))
    scale = np.maximum(scale, 1.0) * np.maximum(
        np.linalg.norm(A[:, 1] - A[:, 0], axis=1), np.linalg.norm(B[:, 1] - B[:, 0], axis=1))
    tol = eps * scale
    hit = np.zeros(len(A), dtype=bool)
    strict = np.zeros(len(A), dtype=bool)
    for i in range(3):
        p1, p2 = a2[:, i], a2[:, (i + 1) % 3]
        for j in range(3):
            q1, q2 = b2[:, j], b2[:, (j + 1) % 3]
            o1, o2 = _orient2(p1, p2, q1), _orient2(p1, p2, q2)
            o3, o4 = _orient2(q1, q2, p1), _orient2(q1, q2, p2)
            s1 = np.where(np.abs(o1) <= tol, 0, np.sign(o1))
            s2 = np.where(np.abs(o2) <= tol, 0, np.sign(o2))
            s3 = np.where(np.abs(o3) <= tol, 0, np.sign(o3))
            s4 = np.where(np.abs(o4) <= tol, 0, np.sign(o4))
            boxes = np.all((np.minimum(p1, p2) <= np.maximum(q1, q2) + eps)
                           & (np.minimum(q1, q2) <= np.maximum(p1, p2) + eps), axis=1)
            hit |= (s1 * s2 <= 0) & (s3 * s4 <= 0) & boxes
            strict |= (s1 * s2 < 0) & (s3 * s4 < 0)
    for X, Y in ((a2, b2), (b2, a2)):
        ya, yb, yc = Y[:, 0], Y[:, 1], Y[:, 2]
        area = _orient2(ya, yb, yc)
        sgn = np.where(area < 0, -1.0, 1.0)
        for k in range(3):
            x = X[:, k]
            w = np.stack([_orient2(ya, yb, x), _orient2(yb, yc, x), _orient2(yc, ya, x)], axis=1) * sgn[:, None]
            hit |= np.all(w >= -tol[:, None], axis=1)
            strict |= np.all(w > tol[:, None], axis=1)
    return hit, strict


def tri_tri_batch(A, B, eps: float = NARROW_EPS):
    """Vectorized closed-triangle intersection for paired rows of ``A`` and ``B``.

    Returns ``(hit, penetration)``. Signed plane distances below ``eps`` are
    treated as zero. ``penetration`` is the smallest of how far each triangle
    reaches across the other's plane and the overlap length along the common
    line; it is ``inf`` for coplanar pairs that overlap in their interiors.
    """
    A = np.asarray(A, dtype=float).reshape(-1, 3, 3)
    B = np.asarray(B, dtype=float).reshape(-1, 3, 3)
    m = len(A)
    hit = np.zeros(m, dtype=bool)
    pen = np.zeros(m)
    if m == 0:
        return hit, pen
    nA = np.cross(A[:, 1] - A[:, 0], A[:, 2] - A[:, 0])
    nB = np.cross(B[:, 1] - B[:, 0], B[:, 2] - B[:, 0])
    lA = np.linalg.norm(nA, axis=1)
    lB = np.linalg.norm(nB, axis=1)
    if np.any(lA <= 2 * MIN_AREA) or np.any(lB <= 2 * MIN_AREA):
        raise DegenerateTriangle("triangle with (near) zero area")
    nA /= lA[:, None]
    nB /= lB[:, None]

    dB = np.einsum("mij,mj->mi", B - A[:, :1], nA)
    dA = np.einsum("mij,mj->mi", A - B[:, :1], nB)
    dB[np.abs(dB) < eps] = 0.0
    dA[np.abs(dA) < eps] = 0.0
    sep = (np.all(dB > 0, axis=1) | np.all(dB < 0, axis=1)
           | np.all(dA > 0, axis=1) | np.all(dA < 0, axis=1))
    coplanar = ~sep & (np.all(dB == 0, axis=1) | np.all(dA == 0, axis=1))
    gen = ~sep & ~coplanar

    if gen.any():
        line = np.cross(nA[gen], nB[gen])
        ln = np.linalg.norm(line, axis=1)
        line /= np.where(ln > 0, ln, 1.0)[:, None]
        pa = np.einsum("mij,mj->mi", A[gen], line)
        pb = np.einsum("mij,mj->mi", B[gen], line)
        lo_a, hi_a = _interval(dA[gen], pa)
        lo_b, hi_b = _interval(dB[gen], pb)
        overlap = np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b)
        ok = overlap >= -eps
        da, db = dA[gen], dB[gen]
        reach_a = np.clip(np.minimum(da.max(axis=1), -da.min(axis=1)), 0.0, None)
        reach_b = np.clip(np.minimum(db.max(axis=1), -db.min(axis=1)), 0.0, None)
        hit[gen] = ok
        pen[gen] = np.where(ok, np.minimum(np.minimum(reach_a, reach_b), np.maximum(overlap, 0.0)), 0.0)

    if coplanar.any():
        h, strict = _coplanar(A[coplanar], B[coplanar], nA[coplanar], eps)
        hit[coplanar] = h
        pen[coplanar] = np.where(strict, np.inf, 0.0)
    return hit, pen


def tri_tri_intersect(a, b, eps: float = NARROW_EPS) -> bool:
    """True iff the two closed flat triangles share a point (up to ``eps``)."""
    A = a.coords if isinstance(a, FlatTri) else np.asarray(a, dtype=float)
    B = b.coords if isinstance(b, FlatTri) else np.asarray(b, dtype=float)
    hit, _ = tri_tri_batch(A[None], B[None], eps)
    return bool(hit[0])


# ---------------------------------------------------------------------------
# broad phase


def _spread_bits(x):
    x = x.astype(np.uint64) & np.uint64(0x1FFFFF)
    for shift, mask in ((32, 0x1F00000000FFFF), (16, 0x1F0000FF0000FF), (8, 0x100F00F00F00F00F),
                        (4, 0x10C30C30C30C30C3), (2, 0x1249249249249249)):
        x = (x | (x << np.uint64(shift))) & np.uint64(mask)
    return x


def morton_codes(points: np.ndarray) -> np.ndarray:
    q = np.clip((np.asarray(points) + 1.0) * 0.5, 0.0, 1.0 - 1e-16)
    q = (q * (1 << 21)).astype(np.uint64)
    return _spread_bits(q[:, 0]) | (_spread_bits(q[:, 1]) << np.uint64(1)) | (_spread_bits(q[:, 2]) << np.uint64(2))


class BoxTree:
    """Complete binary tree of axis-aligned boxes over Morton-ordered leaves."""

    def __init__(self, mins: np.ndarray, maxs: np.ndarray, depth: Optional[int] = None):
        n = len(mins)
        need = max(0, math.ceil(math.log2(n))) if n > 1 else 0
        self.depth = need if depth is None else max(depth, need)
        size = 1 << self.depth
        self.order = np.argsort(morton_codes(0.5 * (mins + maxs)), kind="stable") if n else np.zeros(0, np.int64)
        lo = np.full((size, 3), np.inf)
        hi = np.full((size, 3), -np.inf)
        lo[:n] = mins[self.order]
        hi[:n] = maxs[self.order]
        self.levels = [(lo, hi)]
        while len(lo) > 1:
            lo = np.minimum(lo[0::2], lo[1::2])
            hi = np.maximum(hi[0::2], hi[1::2])
            self.levels.append((lo, hi))
        self.n = n

    def boxes(self, level_from_leaves: int):
        return self.levels[level_from_leaves]


def _overlap(alo, ahi, blo, bhi):
    return np.all((alo <= bhi) & (blo <= ahi), axis=1)


def tree_pairs(ta: BoxTree, tb: Optional[BoxTree] = None) -> np.ndarray:
    """Leaf pairs with overlapping boxes, as original indices ``(k, 2)``.

    With a single tree, returns each unordered pair once with ``i < j``.
    """
    self_mode = tb is None
    tb = ta if self_mode else tb
    if ta.n == 0 or tb.n == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if ta.depth != tb.depth:
        raise ValueError("dual traversal needs trees of equal depth")
    a = np.zeros(1, dtype=np.int64)
    b = np.zeros(1, dtype=np.int64)
    for level in range(ta.depth, -1, -1):
        alo, ahi = ta.levels[level]
        blo, bhi = tb.levels[level]
        keep = _overlap(alo[a], ahi[a], blo[b], bhi[b])
        a, b = a[keep], b[keep]
        if level == 0:
            break
        if self_mode:
            diag = a == b
            ad, ao, bo = a[diag], a[~diag], b[~diag]
            a = np.concatenate([2 * ao, 2 * ao, 2 * ao + 1, 2 * ao + 1, 2 * ad, 2 * ad, 2 * ad + 1])
            b = np.concatenate([2 * bo, 2 * bo + 1, 2 * bo, 2 * bo + 1, 2 * ad, 2 * ad + 1, 2 * ad + 1])
        else:
            a = np.concatenate([2 * a, 2 * a, 2 * a + 1, 2 * a + 1])
            b = np.concatenate([2 * b, 2 * b + 1, 2 * b, 2 * b + 1])
    if self_mode:
        off = a != b
        a, b = a[off], b[off]
    i, j = ta.order[a], tb.order[b]
    if self_mode:
        i, j = np.minimum(i, j), np.maximum(i, j)
    return np.column_stack([i, j]).astype(np.int64)


def _aabb(coords, pad):
    return coords.min(axis=1) - pad, coords.max(axis=1) + pad


def broad_phase(tris, pad: float = AABB_PAD) -> np.ndarray:
    """All index pairs ``i < j`` whose padded bounding boxes overlap, sorted."""
    coords = _as_coords(tris)
    lo, hi = _aabb(coords, pad)
    pairs = tree_pairs(BoxTree(lo, hi))
    return _sorted_unique(pairs)


def _sorted_unique(pairs):
    if len(pairs) == 0:
        return pairs.reshape(0, 2)
    return np.unique(pairs, axis=0)


def brute_force_pairs(tris, pad: float = AABB_PAD) -> np.ndarray:
    coords = _as_coords(tris)
    lo, hi = _aabb(coords, pad)
    i, j = np.triu_indices(len(coords), 1)
    keep = _overlap(lo[i], hi[i], lo[j], hi[j])
    return np.column_stack([i[keep], j[keep]]).astype(np.int64)


# ---------------------------------------------------------------------------
# surface-level detection


class SurfaceIndex:
    """Flat pieces of the surface plus the data needed to exclude neighbors.

    ``extend`` adds the triangles of solids appended since the last call and
    returns the new offending pairs, so a growing complex can be tested
    iteration by iteration.
    """

    def __init__(self, depth: int = 1, eps: float = NARROW_EPS, pad: float = AABB_PAD):
        _check_depth(depth)
        self.depth, self.eps, self.pad = depth, eps, pad
        self.per_tri = 4**depth
        self.flats = np.zeros((0, 3, 3))
        self.lo = np.zeros((0, 3))
        self.hi = np.zeros((0, 3))
        self.n_solids = 0
        self.tri_owner = np.zeros(0, dtype=np.int64)
        self.tri_vids = np.zeros((0, 3), dtype=np.int64)
        self.candidates = 0
        self.tested = 0

    @property
    def n_tris(self) -> int:
        return len(self.tri_owner)

    def extend(self, cx: SurfaceComplex):
        """Index solids added to ``cx`` since the last call.

        Returns ``(pairs, grazing)`` arrays of surface triangle id pairs.
        """
        table = merge_vertices(cx)
        coords, owner, _ = cx.triangle_arrays(start_solid=self.n_solids)
        self.n_solids = len(cx.solids)
        self.tri_vids = table.triangle_ids
        self.tri_owner = np.concatenate([self.tri_owner, owner])
        glued = np.array(sorted(_pair_key(a, b, len(cx.solids)) for (a, _), (b, _) in cx.glued_pairs),
                         dtype=np.int64)
        self._glued, self._nsol = glued, len(cx.solids)

        new = subdivide_coords(coords, self.depth)
        nlo, nhi = _aabb(new, self.pad)
        base = len(self.flats)
        empty = np.zeros((0, 2), dtype=np.int64)
        chunks = [tree_pairs(BoxTree(nlo, nhi)) + base if len(new) else empty]
        if base and len(new):
            depth = max(math.ceil(math.log2(max(base, 2))), math.ceil(math.log2(max(len(new), 2))))
            told = BoxTree(self.lo, self.hi, depth)
            tnew = BoxTree(nlo, nhi, depth)
            cross = tree_pairs(told, tnew)
            cross[:, 1] += base
            chunks.append(cross)
        self.flats = np.concatenate([self.flats, new])
        self.lo = np.concatenate([self.lo, nlo])
        self.hi = np.concatenate([self.hi, nhi])
        return self._resolve(np.concatenate(chunks))

    def _resolve(self, cand):
        self.candidates += len(cand)
        hits, grazes = [], []
        for start in range(0, len(cand), CHUNK):
            c = cand[start:start + CHUNK]
            ta, tb = c[:, 0] // self.per_tri, c[:, 1] // self.per_tri
            keep = self.allowed(ta, tb)
            c, ta, tb = c[keep], ta[keep], tb[keep]
            self.tested += len(c)
            hit, pen = tri_tri_batch(self.flats[c[:, 0]], self.flats[c[:, 1]], self.eps)
            strong = hit & (pen > GRAZE_FACTOR * self.eps)
            weak = hit & ~strong
            hits.append(np.column_stack([ta[strong], tb[strong]]))
            grazes.append(np.column_stack([ta[weak], tb[weak]]))
        return _canon(hits), _canon(grazes)

    def allowed(self, ta, tb):
        """Mask of triangle pairs that are eligible for testing."""
        oa, ob = self.tri_owner[ta], self.tri_owner[tb]
        keep = oa != ob
        if len(self._glued):
            keep &= ~np.isin(_pair_key(oa, ob, self._nsol), self._glued)
        va, vb = self.tri_vids[ta], self.tri_vids[tb]
        shared = np.any(va[:, :, None] == vb[:, None, :], axis=(1, 2))
        return keep & ~shared


def _pair_key(a, b, n):
    return np.minimum(a, b) * n + np.maximum(a, b)


def _canon(parts):
    parts = [p for p in parts if len(p)]
    if not parts:
        return np.zeros((0, 2), dtype=np.int64)
    p = np.concatenate(parts)
    return np.unique(np.column_stack([p.min(axis=1), p.max(axis=1)]), axis=0)


def _first_iteration(cx, index, pairs):
    if len(pairs) == 0:
        return None
    iters = np.array([s.iteration for s in cx.solids])
    owners = index.tri_owner[pairs]
    return int(iters[owners].max(axis=1).min())


def _report(cx, index, pairs, grazing):
    return IntersectionReport(
        intersecting=bool(len(pairs)),
        pairs=[tuple(int(x) for x in p) for p in pairs],
        grazing=[tuple(int(x) for x in p) for p in grazing],
        first_iteration=_first_iteration(cx, index, pairs),
        candidates=int(index.candidates),
        tested=int(index.tested),
    )


def detect_self_intersections(cx: SurfaceComplex, depth: int = 1, eps: float = NARROW_EPS,
                              pad: float = AABB_PAD) -> IntersectionReport:
    """Test the whole surface at once with the broad phase + exact test."""
    index = SurfaceIndex(depth, eps, pad)
    pairs, grazing = index.extend(cx)
    return _report(cx, index, pairs, grazing)


def detect_brute_force(cx: SurfaceComplex, depth: int = 1, eps: float = NARROW_EPS,
                       pad: float = AABB_PAD) -> IntersectionReport:
    """Reference: every pair of flat pieces goes to the exact test, no culling."""
    index = SurfaceIndex(depth, eps, pad)
    table = merge_vertices(cx)
    coords, owner, _ = cx.triangle_arrays()
    index.tri_vids, index.tri_owner, index.n_solids = table.triangle_ids, owner, len(cx.solids)
    index._nsol = len(cx.solids)
    index._glued = np.array(sorted(_pair_key(a, b, index._nsol) for (a, _), (b, _) in cx.glued_pairs),
                            dtype=np.int64)
    index.flats = subdivide_coords(coords, depth)
    i, j = np.triu_indices(len(index.flats), 1)
    pairs, grazing = index._resolve(np.column_stack([i, j]).astype(np.int64))
    return _report(cx, index, pairs, grazing)
