"""Exception types raised across the package."""


class GeometryError(ValueError):
    """Base class for all geometric failures."""


class OutsideBall(GeometryError):
    pass


class DegenerateBisector(GeometryError):
    pass


class FrameDegenerate(GeometryError):
    pass


class FrameMismatch(GeometryError):
    pass


class CollinearPoints(GeometryError):
    pass


class InvalidSide(GeometryError):
    pass


class NotASquareFace(GeometryError):
    pass


class PlacementResidual(GeometryError):
    """Placed vertices drifted from the target frame; indicates a numeric fault."""


class MergeAmbiguity(GeometryError):
    pass


class DepthExceeded(GeometryError):
    pass


class DegenerateTriangle(GeometryError):
    pass


class BracketInvalid(GeometryError):
    pass


class UnsupportedSchema(ValueError):
    pass


class NonMonotoneWarning(UserWarning):
    """An inner sweep evaluation contradicted the current bracket."""
