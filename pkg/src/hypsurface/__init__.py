"""Hyperbolic {3,7} polyhedral surface built from prisms and antiprisms in the Poincaré ball."""

from .assembly import (
    PlacedSolid,
    SurfaceComplex,
    SurfaceTriangle,
    TwistDirection,
    build_complex,
    expected_counts,
    iterate,
    merge_vertices,
    place_solid,
    seed_complex,
    twist_frame,
)
from .collision import (
    IntersectionReport,
    broad_phase,
    detect_self_intersections,
    subdivide,
    tri_tri_intersect,
)
from .hypermath import (
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
    rotation_from_frames,
)
from .solids import (
    SolidKind,
    SquareFrame,
    canonical_antiprism,
    canonical_prism,
    face_frame,
    scale_to_hyperbolic,
)
from .surface_io import RunConfig, export_json, export_obj, export_povray, load_json
from .sweep import ExperimentResult, ThresholdResult, find_threshold, run_experiment

__version__ = "0.1.0"
