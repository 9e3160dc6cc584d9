"""Side-length experiments: build, test, and bracket the threshold length.

The surface at small side length behaves like the Euclidean construction and
crosses itself after a few iterations; above some length it stays embedded
for as many iterations as we can afford to build.  ``find_threshold``
bisects on the side length assuming that behavior is monotone, and keeps
every evaluation so that a violation would be visible afterwards.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .assembly import TwistDirection, iterate, seed_complex
from .collision import AABB_PAD, NARROW_EPS, SurfaceIndex
from .errors import BracketInvalid, NonMonotoneWarning

CI_ITERATIONS = 8
FULL_ITERATIONS = 11


@dataclass
class ExperimentResult:
    side: float
    iterations: int
    intersecting: bool
    first_iteration: Optional[int]
    triangle_count: int
    wall_time: float
    depth: int = 1
    iterations_built: int = 0
    pair_count: int = 0
    grazing_count: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ThresholdResult:
    bracket_low: float
    bracket_high: float
    iterations: int
    depth: int
    tol: float
    evaluations: list = field(default_factory=list)
    anomalies: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.bracket_high - self.bracket_low

    def to_dict(self) -> dict:
        out = asdict(self)
        out["evaluations"] = [e.to_dict() for e in self.evaluations]
        return out


def run_experiment(side: float, iterations: int, depth: int = 1,
                   twist: TwistDirection = TwistDirection.CCW, antiprism_align: int = 0,
                   eps: float = NARROW_EPS, pad: float = AABB_PAD, early_exit: bool = True,
                   keep_complex: bool = False):
    """Grow the surface iteration by iteration, testing each new layer.

    Stops at the first iteration that produces a crossing unless
    ``early_exit`` is false. With ``keep_complex`` returns
    ``(result, complex, pairs, grazing)`` instead of just the result.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    t0 = time.perf_counter()
    cx = seed_complex(side, twist, antiprism_align)
    index = SurfaceIndex(depth, eps, pad)
    all_pairs, all_grazing = [], []
    pairs, grazing = index.extend(cx)
    all_pairs.append(pairs)
    all_grazing.append(grazing)
    first = 0 if len(pairs) else None
    while cx.iterations_done < iterations and not (early_exit and first is not None):
        cx = iterate(cx)
        pairs, grazing = index.extend(cx)
        all_pairs.append(pairs)
        all_grazing.append(grazing)
        if len(pairs) and first is None:
            first = cx.iterations_done
    pairs = np.concatenate(all_pairs)
    grazing = np.concatenate(all_grazing)
    result = ExperimentResult(
        side=float(side),
        iterations=int(iterations),
        intersecting=first is not None,
        first_iteration=first,
        triangle_count=index.n_tris,
        wall_time=time.perf_counter() - t0,
        depth=depth,
        iterations_built=cx.iterations_done,
        pair_count=len(pairs),
        grazing_count=len(grazing),
    )
    if keep_complex:
        return result, cx, pairs, grazing
    return result


def max_evaluations(lo: float, hi: float, tol: float) -> int:
    return 2 + max(0, math.ceil(math.log2((hi - lo) / tol)))


def find_threshold(lo: float, hi: float, iterations: int = CI_ITERATIONS, depth: int = 1,
                   tol: float = 0.005, twist: TwistDirection = TwistDirection.CCW,
                   antiprism_align: int = 0, eps: float = NARROW_EPS, progress=None) -> ThresholdResult:
    """Bisect on the side length between an intersecting ``lo`` and a clean ``hi``."""
    if not (0 < lo < hi):
        raise BracketInvalid(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    if not tol > 0:
        raise BracketInvalid("tolerance must be positive")

    def evaluate(s):
        r = run_experiment(s, iterations, depth, twist, antiprism_align, eps)
        out.evaluations.append(r)
        if progress is not None:
            progress(r)
        return r

    out = ThresholdResult(lo, hi, iterations, depth, tol)
    if not evaluate(lo).intersecting:
        raise BracketInvalid(f"lower end s={lo} does not self-intersect after {iterations} iterations")
    if evaluate(hi).intersecting:
        raise BracketInvalid(f"upper end s={hi} self-intersects after {iterations} iterations")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r = evaluate(mid)
        if r.intersecting:
            lo = mid
        else:
            hi = mid
    out.bracket_low, out.bracket_high = lo, hi
    out.anomalies = _monotonicity_anomalies(out.evaluations)
    for msg in out.anomalies:
        warnings.warn(msg, NonMonotoneWarning, stacklevel=2)
    return out


def _monotonicity_anomalies(evals) -> list:
    """Evaluations that disagree with a monotone picture.

    Two patterns are flagged: a clean build below an intersecting one, and an
    intersecting build whose crossing appears at an earlier iteration than at
    a smaller side length.
    """
    msgs = []
    ordered = sorted(evals, key=lambda e: e.side)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if not a.intersecting and b.intersecting:
                msgs.append(f"s={a.side:.6g} is clean but s={b.side:.6g} intersects")
            elif a.intersecting and b.intersecting and b.first_iteration < a.first_iteration:
                msgs.append(f"s={b.side:.6g} intersects at iteration {b.first_iteration}, "
                            f"earlier than s={a.side:.6g} (iteration {a.first_iteration})")
    return msgs
