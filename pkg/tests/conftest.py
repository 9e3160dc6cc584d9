import numpy as np
import pytest

from hypsurface.assembly import PlacedSolid, SurfaceComplex
from hypsurface.hypermath import Isometry, PlanarMirror, Rotation, apply_isometry, bisector_with_origin

_ACCEPTANCE = []


def random_rotation(rng) -> Rotation:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return Rotation(q)


def random_point(rng, radius=0.8):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * radius * rng.uniform() ** (1 / 3)


def random_isometry(rng, radius=0.7) -> Isometry:
    """Orientation-preserving: rotation, then a translation built from two reflections."""
    p = random_point(rng, radius)
    while np.linalg.norm(p) < 1e-3:
        p = random_point(rng, radius)
    n = p / np.linalg.norm(p)
    return Isometry((random_rotation(rng), PlanarMirror(n), bisector_with_origin(p)))


def overlay(base: SurfaceComplex, other: SurfaceComplex, iso: Isometry) -> SurfaceComplex:
    """Union of two complexes, the second moved by ``iso``; used to force crossings."""
    out = base.copy()
    off = len(base.solids)
    for s in other.solids:
        parent = None if s.parent_face is None else (s.parent_face[0] + off, s.parent_face[1])
        out.solids.append(PlacedSolid(s.id + off, s.kind, s.side, apply_isometry(iso, s.vertices),
                                      s.iteration, parent, iso, s.attach_face))
    out.glued_pairs += [((a + off, fa), (b + off, fb)) for (a, fa), (b, fb) in other.glued_pairs]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20221015)


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str = ""):
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
