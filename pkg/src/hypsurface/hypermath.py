"""Poincaré ball primitives: distances, mirrors, rotations and isometries.

Points are plain float64 numpy arrays of shape ``(3,)``; most functions also
accept stacks of shape ``(n, 3)`` and broadcast over the leading axis.
Isometries are kept as ordered sequences of primitive maps (rotations about
the origin and reflections in hyperbolic planes) and are never flattened.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    CollinearPoints,
    DegenerateBisector,
    FrameDegenerate,
    FrameMismatch,
    GeometryError,
    OutsideBall,
)

EPS_BALL = 1e-12
MIRROR_TOL = 1e-12
ROTATION_TOL = 1e-10
FRAME_TOL = 1e-7
COLLINEAR_TOL = 1e-10
COPLANAR_ORIGIN_TOL = 1e-10

ORIGIN = np.zeros(3)


def point(x, y=None, z=None) -> np.ndarray:
    """Build a validated ball point from three scalars or a length-3 sequence."""
    if y is None and z is None:
        p = np.asarray(x, dtype=float).reshape(3)
    else:
        p = np.array([x, y, z], dtype=float)
    check_in_ball(p)
    return p


def check_in_ball(x) -> None:
    x = np.asarray(x, dtype=float)
    sq = np.einsum("...i,...i->...", x, x)
    if not np.all(np.isfinite(sq)) or np.any(sq >= 1.0 - EPS_BALL):
        raise OutsideBall("point(s) at or outside the unit sphere")


def _sq(x):
    return np.einsum("...i,...i->...", x, x)


def hyp_distance(u, v):
    """Hyperbolic distance in the ball model (curvature -1).

    Uses ``2 asinh(|u-v| / sqrt((1-|u|^2)(1-|v|^2)))``, which equals the usual
    ``arccosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2)))`` but keeps full precision
    for short segments.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    diff = np.sqrt(_sq(u - v))
    return 2.0 * np.arcsinh(diff / np.sqrt((1.0 - _sq(u)) * (1.0 - _sq(v))))


def distance_from_origin(p):
    return 2.0 * np.arctanh(np.sqrt(_sq(np.asarray(p, dtype=float))))


# ---------------------------------------------------------------------------
# mirrors


@dataclass(frozen=True, eq=False)
class PlanarMirror:
    """Hyperbolic plane through the origin, given by its unit normal."""

    normal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > MIRROR_TOL:
            raise GeometryError("planar mirror normal must have unit length")
        object.__setattr__(self, "normal", n)

    def residual(self, x):
        """Euclidean distance of ``x`` from the mirror."""
        return np.abs(np.asarray(x, dtype=float) @ self.normal)

    def side(self, x):
        return np.asarray(x, dtype=float) @ self.normal

    def reflect(self, x):
        x = np.asarray(x, dtype=float)
        return x - 2.0 * (x @ self.normal)[..., None] * self.normal


@dataclass(frozen=True, eq=False)
class SphereMirror:
    """Sphere orthogonal to the unit sphere; inversion in it is a reflection."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        r = float(self.radius)
        if not r > 0:
            raise GeometryError("sphere mirror radius must be positive")
        cc = float(c @ c)
        # relative check: |c|^2 grows like 1/|p|^2 for bisectors of points near O
        if abs(cc - r * r - 1.0) > MIRROR_TOL * max(1.0, cc):
            raise GeometryError("sphere mirror is not orthogonal to the unit sphere")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    def residual(self, x):
        """Euclidean distance of ``x`` from the mirror sphere."""
        d = np.sqrt(_sq(np.asarray(x, dtype=float) - self.center))
        return np.abs(d - self.radius)

    def side(self, x):
        """Positive outside the sphere, negative inside."""
        return np.sqrt(_sq(np.asarray(x, dtype=float) - self.center)) - self.radius

    def reflect(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.center
        return self.center + (self.radius**2 / _sq(d))[..., None] * d


HPlane = Union[PlanarMirror, SphereMirror]


def reflect(m: HPlane, x):
    """Reflect point(s) ``x`` in the hyperbolic plane ``m``."""
    return m.reflect(x)


def bisector_with_origin(p) -> SphereMirror:
    """Perpendicular bisector of ``p`` and the origin; swaps the two points."""
    p = np.asarray(p, dtype=float)
    pp = float(p @ p)
    if np.sqrt(pp) <= EPS_BALL:
        raise DegenerateBisector("bisector with the origin is undefined for p = O")
    return SphereMirror(p / pp, np.sqrt((1.0 - pp) / pp))


def translation_to_origin(p) -> Isometry:
    """Isometry (a single reflection, or identity at O) taking ``p`` to O."""
    try:
        return Isometry((bisector_with_origin(p),))
    except DegenerateBisector:
        return Isometry(())


# ---------------------------------------------------------------------------
# rotations and isometries


@dataclass(frozen=True, eq=False)
class Rotation:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        if np.abs(m.T @ m - np.eye(3)).max() > ROTATION_TOL:
            raise GeometryError("rotation matrix is not orthogonal")
        if abs(np.linalg.det(m) - 1.0) > ROTATION_TOL:
            raise GeometryError("rotation matrix must have determinant +1")
        object.__setattr__(self, "matrix", m)

    def reflect(self, x):  # uniform primitive interface
        return np.asarray(x, dtype=float) @ self.matrix.T

    apply = reflect

    def inverse(self) -> Rotation:
        return Rotation(self.matrix.T)


def _unit(v):
    n = np.linalg.norm(v)
    if n <= EPS_BALL:
        raise FrameDegenerate("zero vector in frame")
    return v / n


def _frame(b, g):
    e1 = _unit(b)
    g_perp = g - (g @ e1) * e1
    if np.linalg.norm(g_perp) <= COLLINEAR_TOL * max(np.linalg.norm(g), 1e-300):
        raise FrameDegenerate("frame vectors are collinear through the origin")
    e2 = _unit(g_perp)
    return np.column_stack([e1, e2, np.cross(e1, e2)])


def rotation_from_frames(b_src, g_src, b_dst, g_dst) -> Rotation:
    """Proper rotation taking ``b_src -> b_dst`` and ``g_src -> g_dst``.

    The two pairs must be congruent about the origin.
    """
    b_src, g_src, b_dst, g_dst = (np.asarray(v, dtype=float) for v in (b_src, g_src, b_dst, g_dst))
    f_src = _frame(b_src, g_src)
    f_dst = _frame(b_dst, g_dst)
    nb_s, ng_s = np.linalg.norm(b_src), np.linalg.norm(g_src)
    nb_d, ng_d = np.linalg.norm(b_dst), np.linalg.norm(g_dst)
    ang_s = np.arctan2(np.linalg.norm(np.cross(b_src, g_src)), b_src @ g_src)
    ang_d = np.arctan2(np.linalg.norm(np.cross(b_dst, g_dst)), b_dst @ g_dst)
    if abs(nb_s - nb_d) > FRAME_TOL or abs(ng_s - ng_d) > FRAME_TOL or abs(ang_s - ang_d) > FRAME_TOL:
        raise FrameMismatch(
            f"frames are not congruent: |b| {nb_s:.3g}/{nb_d:.3g}, |g| {ng_s:.3g}/{ng_d:.3g}, "
            f"angle {ang_s:.6g}/{ang_d:.6g}"
        )
    return Rotation(f_dst @ f_src.T)


Primitive = Union[Rotation, PlanarMirror, SphereMirror]


@dataclass(frozen=True, eq=False)
class Isometry:
    """Ordered primitive maps, applied first to last."""

    steps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __call__(self, x):
        return apply_isometry(self, x)

    def __len__(self):
        return len(self.steps)

    def inverse(self) -> Isometry:
        inv = []
        for s in reversed(self.steps):
            inv.append(s.inverse() if isinstance(s, Rotation) else s)
        return Isometry(tuple(inv))


IDENTITY = Isometry(())


def compose(outer: Isometry, inner: Isometry) -> Isometry:
    """``outer`` after ``inner``; plain concatenation of the step lists."""
    return Isometry(inner.steps + outer.steps)


def apply_isometry(iso: Isometry, x):
    y = np.asarray(x, dtype=float)
    for step in iso.steps:
        y = step.reflect(y)
    return y


# ---------------------------------------------------------------------------
# planes through points, geodesics


def plane_through(p, q, r) -> HPlane:
    """The hyperbolic plane containing three points.

    A hyperbolic plane is the zero set of ``a(|x|^2 + 1) - 2 c.x`` for a
    homogeneous ``(a, c)``; ``a = 0`` gives a plane through the origin,
    otherwise the sphere has center ``c/a``. The coefficients are the null
    vector of the 3x4 system in the three points.
    """
    p, q, r = (np.asarray(v, dtype=float) for v in (p, q, r))
    e1, e2 = q - p, r - p
    cross = np.cross(e1, e2)
    if np.linalg.norm(cross) <= COLLINEAR_TOL * np.linalg.norm(e1) * np.linalg.norm(e2):
        raise CollinearPoints("points are collinear")
    n_hat = cross / np.linalg.norm(cross)
    if abs(p @ n_hat) <= COPLANAR_ORIGIN_TOL:
        return PlanarMirror(n_hat)
    pts = np.stack([p, q, r])
    rows = np.column_stack([_sq(pts) + 1.0, -2.0 * pts])
    # drop the shared translation before the SVD: rows q-p, r-p span the same space
    rows = np.stack([rows[0], rows[1] - rows[0], rows[2] - rows[0]])
    _, _, vt = np.linalg.svd(rows)
    a, c = vt[-1, 0], vt[-1, 1:]
    if abs(a) <= 2.0 * COPLANAR_ORIGIN_TOL * np.linalg.norm(c):
        return PlanarMirror(c / np.linalg.norm(c))
    center = c / a
    return SphereMirror(center, np.sqrt(center @ center - 1.0))


def _mobius_add(a, b):
    """Gyro-addition ``a (+) b`` in the ball; maps O to ``a``."""
    ab = np.einsum("...i,...i->...", a, b)[..., None]
    aa = _sq(a)[..., None]
    bb = _sq(b)[..., None]
    return ((1 + 2 * ab + bb) * a + (1 - aa) * b) / (1 + 2 * ab + aa * bb)


def geodesic_point(u, v, fraction):
    """Point at ``fraction`` of the hyperbolic way from ``u`` to ``v``.

    ``u`` is carried to O by a gyro-translation rather than the bisector
    reflection: both are isometries sending ``u`` to O, but the bisector
    sphere blows up as ``u`` approaches O and loses all precision there.
    Broadcasts over stacked ``u``/``v`` of shape ``(n, 3)``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    single = u.ndim == 1 and v.ndim == 1
    u2, v2 = np.broadcast_arrays(np.atleast_2d(u), np.atleast_2d(v))
    z = _mobius_add(-u2, v2)
    norm = np.sqrt(_sq(z))
    target = np.tanh(fraction * np.arctanh(np.minimum(norm, 1.0 - EPS_BALL)))
    scale = np.divide(target, norm, out=np.zeros_like(norm), where=norm > 0)
    w = _mobius_add(u2, z * scale[:, None])
    w = np.where((norm == 0)[:, None], u2, w)
    return w[0] if single else w


def reflect_plane(by: HPlane, m: HPlane) -> HPlane:
    """Image of the hyperbolic plane ``m`` under reflection in ``by``."""
    if isinstance(by, PlanarMirror):
        if isinstance(m, PlanarMirror):
            return PlanarMirror(by.reflect(m.normal))
        c = by.reflect(m.center)
        return SphereMirror(c, np.sqrt(c @ c - 1.0))
    C, R2 = by.center, by.radius**2
    if isinstance(m, PlanarMirror):
        delta = float(m.normal @ C)
        if abs(delta) <= MIRROR_TOL * np.linalg.norm(C):
            return m
        c = C - (R2 / (2.0 * delta)) * m.normal
        return SphereMirror(c, np.sqrt(c @ c - 1.0))
    d = m.center - C
    k = float(d @ d) - m.radius**2
    if abs(k) <= MIRROR_TOL * float(d @ d):
        # the sphere passes through the inversion center: image is a plane, through O
        return PlanarMirror(d / np.linalg.norm(d))
    c = C + (R2 / k) * d
    return SphereMirror(c, np.sqrt(c @ c - 1.0))


def plane_normal_to_radius(n, tau) -> HPlane:
    """Hyperbolic plane meeting the diameter along unit ``n`` at right angles,
    at Euclidean radius ``tau`` (the plane through O when ``tau == 0``)."""
    n = np.asarray(n, dtype=float)
    if tau == 0:
        return PlanarMirror(n)
    c = n * (1.0 + tau * tau) / (2.0 * tau)
    return SphereMirror(c, (1.0 - tau * tau) / (2.0 * abs(tau)))
