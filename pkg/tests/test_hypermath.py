import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hypsurface.errors import (
    CollinearPoints,
    DegenerateBisector,
    FrameDegenerate,
    FrameMismatch,
    GeometryError,
    OutsideBall,
)
from hypsurface.hypermath import (
    IDENTITY,
    ORIGIN,
    Isometry,
    PlanarMirror,
    Rotation,
    SphereMirror,
    apply_isometry,
    bisector_with_origin,
    compose,
    geodesic_point,
    hyp_distance,
    plane_through,
    point,
    reflect,
    reflect_plane,
    rotation_from_frames,
)

from conftest import random_isometry, random_point, random_rotation

coord = st.floats(-0.55, 0.55, allow_nan=False)
ball_point = st.tuples(coord, coord, coord).map(np.array)


def rot_z(deg):
    a = math.radians(deg)
    return Rotation(np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]]))


def test_point_rejects_outside():
    assert np.allclose(point(0.1, 0.2, 0.3), [0.1, 0.2, 0.3])
    with pytest.raises(OutsideBall):
        point(1.0, 0, 0)
    with pytest.raises(OutsideBall):
        point([0.8, 0.8, 0])


# --- distance -------------------------------------------------------------


def test_distance_examples():
    assert hyp_distance(ORIGIN, ORIGIN) == 0.0
    # quadrature of the ball line element 2/(1-r^2) along the radius
    line, _ = quad(lambda r: 2.0 / (1.0 - r * r), 0.0, 0.5)
    d = hyp_distance(ORIGIN, [0.5, 0, 0])
    assert d == pytest.approx(math.log(3.0), abs=1e-12)
    assert d == pytest.approx(line, abs=1e-12)
    u, v = np.array([0.3, 0, 0]), np.array([0, 0.3, 0])
    assert hyp_distance(u, v) == hyp_distance(v, u)


def test_distance_matches_arccosh_form(rng):
    for _ in range(200):
        u, v = random_point(rng, 0.95), random_point(rng, 0.95)
        ref = np.arccosh(1 + 2 * np.sum((u - v) ** 2) / ((1 - u @ u) * (1 - v @ v)))
        assert hyp_distance(u, v) == pytest.approx(ref, rel=1e-9, abs=1e-7)


@given(ball_point)
def test_distance_from_origin(p):
    assert hyp_distance(ORIGIN, p) == pytest.approx(2 * np.arctanh(np.linalg.norm(p)), abs=1e-12)


# --- bisector and reflection ------------------------------------------------


def test_bisector_examples():
    m = bisector_with_origin([0.5, 0, 0])
    assert np.allclose(m.center, [2, 0, 0]) and m.radius == pytest.approx(math.sqrt(3))
    assert np.allclose(reflect(m, [0.5, 0, 0]), ORIGIN, atol=1e-15)
    m = bisector_with_origin([0, 0.5, 0])
    assert np.allclose(m.center, [0, 2, 0]) and m.radius == pytest.approx(math.sqrt(3))
    with pytest.raises(DegenerateBisector):
        bisector_with_origin(ORIGIN)


def _points_on_sphere(m, rng, k):
    out = []
    while len(out) < k:
        d = rng.normal(size=3)
        x = m.center + m.radius * d / np.linalg.norm(d)
        if x @ x < 0.98:
            out.append(x)
    return np.array(out)


def test_reflection_fixed_points_and_involution(rng):
    m = bisector_with_origin([0.2, -0.3, 0.4])
    on = _points_on_sphere(m, rng, 20)
    assert np.allclose(reflect(m, on), on, atol=1e-12)
    x = random_point(rng, 0.9)
    assert np.allclose(reflect(m, reflect(m, x)), x, atol=1e-12)
    pm = PlanarMirror([0, 0, 1])
    assert np.allclose(reflect(pm, [0.1, 0.2, 0.0]), [0.1, 0.2, 0.0])
    assert np.allclose(reflect(pm, [0.1, 0.2, 0.3]), [0.1, 0.2, -0.3])


def test_mirror_invariants_checked():
    with pytest.raises(GeometryError):
        SphereMirror([2, 0, 0], 1.0)
    with pytest.raises(GeometryError):
        PlanarMirror([0, 0, 2])
    m = bisector_with_origin([0.3, 0.1, 0.2])
    c = m.center
    assert abs(c @ c - m.radius**2 - 1) < 1e-12


@settings(max_examples=60)
@given(ball_point, ball_point, ball_point)
def test_reflection_preserves_distance(p, x, y):
    if np.linalg.norm(p) < 1e-6:
        return
    m = bisector_with_origin(p)
    before = hyp_distance(x, y)
    after = hyp_distance(reflect(m, x), reflect(m, y))
    assert after == pytest.approx(before, abs=1e-9)


def test_bisector_points_equidistant(rng):
    p = np.array([0.35, -0.2, 0.5])
    m = bisector_with_origin(p)
    w = _points_on_sphere(m, rng, 100)
    assert np.abs(hyp_distance(w, p) - hyp_distance(w, ORIGIN)).max() < 1e-8


# --- rotations ---------------------------------------------------------------


def test_rotation_examples():
    b, g = np.array([0.3, 0, 0]), np.array([0, 0.3, 0])
    assert np.allclose(rotation_from_frames(b, g, b, g).matrix, np.eye(3))
    r = rotation_from_frames(b, g, [0, 0.3, 0], [-0.3, 0, 0])
    assert np.allclose(r.matrix, rot_z(90).matrix, atol=1e-15)
    with pytest.raises(FrameMismatch):
        rotation_from_frames(b, g, [0.3, 0, 0], [0, 0.2, 0])
    with pytest.raises(FrameDegenerate):
        rotation_from_frames(b, 2 * b, b, 2 * b)
    with pytest.raises(GeometryError):
        Rotation(np.diag([1.0, 1.0, -1.0]))


def test_rotation_from_random_congruent_pairs(rng):
    for _ in range(100):
        rot = random_rotation(rng)
        b, g = random_point(rng), random_point(rng)
        r = rotation_from_frames(b, g, rot.apply(b), rot.apply(g))
        assert np.linalg.det(r.matrix) == pytest.approx(1.0, abs=1e-10)
        assert np.abs(r.apply(b) - rot.apply(b)).max() < 1e-8
        assert np.abs(r.apply(g) - rot.apply(g)).max() < 1e-8


# --- isometries --------------------------------------------------------------


def test_compose_and_apply():
    p = np.array([0.4, 0.1, -0.2])
    n_m = bisector_with_origin(p)
    m_m = bisector_with_origin([0.1, 0.5, 0.0])
    rot = rot_z(30)
    iso = Isometry((n_m,))
    assert compose(IDENTITY, iso).steps == iso.steps
    assert compose(iso, IDENTITY).steps == iso.steps
    chained = compose(Isometry((m_m,)), compose(Isometry((rot,)), Isometry((n_m,))))
    assert np.allclose(apply_isometry(chained, p), reflect(m_m, rot.apply(reflect(n_m, p))))
    assert np.allclose(apply_isometry(IDENTITY, p), p)
    assert np.allclose(apply_isometry(Isometry((rot_z(90),)), [0.3, 0, 0]), [0, 0.3, 0])
    assert np.allclose(apply_isometry(iso, p), ORIGIN, atol=1e-15)


def test_isometry_inverse_round_trip(rng):
    for _ in range(20):
        iso = compose(random_isometry(rng), random_isometry(rng))
        x = random_point(rng, 0.9)
        assert np.allclose(apply_isometry(iso.inverse(), apply_isometry(iso, x)), x, atol=1e-9)


def test_random_chain_preserves_distances(rng):
    for _ in range(20):
        steps = []
        for _ in range(6):
            kind = rng.integers(3)
            if kind == 0:
                steps.append(random_rotation(rng))
            elif kind == 1:
                steps.append(bisector_with_origin(random_point(rng, 0.8)))
            else:
                v = rng.normal(size=3)
                steps.append(PlanarMirror(v / np.linalg.norm(v)))
        iso = Isometry(tuple(steps))
        cloud = np.array([random_point(rng, 0.7) for _ in range(10)])
        moved = apply_isometry(iso, cloud)
        i, j = np.triu_indices(10, 1)
        assert np.abs(hyp_distance(cloud[i], cloud[j]) - hyp_distance(moved[i], moved[j])).max() < 1e-8


# --- planes through points ---------------------------------------------------


def test_plane_through_examples():
    m = plane_through([0.1, 0, 0], [0, 0.1, 0], [-0.1, 0, 0])
    assert isinstance(m, PlanarMirror) and np.allclose(np.abs(m.normal), [0, 0, 1])
    pts = np.array([[0.2, 0, 0.1], [0, 0.2, 0.1], [-0.2, 0, 0.1]])
    m = plane_through(*pts)
    assert isinstance(m, SphereMirror)
    assert abs(m.center @ m.center - m.radius**2 - 1) < 1e-12
    assert m.residual(pts).max() < 1e-9
    # the linear-solve oracle: 2 c.v = |v|^2 + 1
    c = np.linalg.solve(2 * pts, np.sum(pts**2, axis=1) + 1)
    assert np.allclose(m.center, c)
    with pytest.raises(CollinearPoints):
        plane_through([0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [0.3, 0.3, 0.3])


def test_plane_through_random(rng):
    for _ in range(200):
        pts = np.array([random_point(rng, 0.95) for _ in range(3)])
        m = plane_through(*pts)
        assert m.residual(pts).max() < 1e-9


def test_plane_through_tiny_triangle_near_boundary():
    base = np.array([0.0, 0.0, 0.99997])
    pts = base + np.array([[0, 0, 0], [1e-5, 0, 0], [0, 1e-5, -1e-6]])
    m = plane_through(*pts)
    assert m.residual(pts).max() < 1e-9


def test_reflect_plane_maps_mirror_points(rng):
    for _ in range(50):
        by = bisector_with_origin(random_point(rng, 0.9))
        pts = np.array([random_point(rng, 0.8) for _ in range(3)])
        image = reflect_plane(by, plane_through(*pts))
        assert image.residual(reflect(by, pts)).max() < 1e-9


# --- geodesics --------------------------------------------------------------


def test_geodesic_point_examples():
    u = np.array([0.1, -0.2, 0.3])
    assert np.allclose(geodesic_point(u, u, 0.5), u)
    mid = geodesic_point(ORIGIN, [0.6, 0, 0], 0.5)
    # half of 2 artanh(0.6) as a Euclidean radius: tanh(artanh(0.6)/2) = 1/3
    assert np.allclose(mid, [np.tanh(np.arctanh(0.6) / 2), 0, 0], atol=1e-15)
    assert mid[0] == pytest.approx(1 / 3, abs=1e-15)
    v = np.array([-0.4, 0.5, 0.2])
    assert np.allclose(geodesic_point(u, v, 0.0), u, atol=1e-14)
    assert np.allclose(geodesic_point(u, v, 1.0), v, atol=1e-14)


def test_geodesic_midpoint_equidistant(rng):
    for _ in range(100):
        u, v = random_point(rng, 0.95), random_point(rng, 0.95)
        m = geodesic_point(u, v, 0.5)
        assert abs(hyp_distance(u, m) - hyp_distance(m, v)) < 1e-9


@settings(max_examples=50)
@given(ball_point, ball_point)
def test_geodesic_additivity(u, v):
    d = hyp_distance(u, v)
    for t in (0.25, 0.5, 0.75):
        g = geodesic_point(u, v, t)
        assert hyp_distance(u, g) == pytest.approx(t * d, abs=1e-8)
        # on the geodesic: the two pieces add up
        assert hyp_distance(u, g) + hyp_distance(g, v) == pytest.approx(d, abs=1e-8)


def test_geodesic_point_vectorized(rng):
    u = np.array([random_point(rng) for _ in range(10)])
    v = np.array([random_point(rng) for _ in range(10)])
    u[0] = 0.0
    batch = geodesic_point(u, v, 0.3)
    for k in range(10):
        assert np.allclose(batch[k], geodesic_point(u[k], v[k], 0.3), atol=1e-15)
