"""Exception hierarchy.  Every error raised by the toolkit derives from
:class:`GeometryError` so callers can catch the family in one place."""


class GeometryError(Exception):
    pass


class DegeneratePlane(GeometryError):
    pass


class IntegrationFailure(GeometryError):
    pass


class NonUnitSpeedCurve(GeometryError):
    pass


class OpenLoop(GeometryError):
    pass


class BoundaryParameter(GeometryError):
    pass


class RadiusTooLarge(GeometryError):
    pass


class NegativeFitCoefficient(GeometryError):
    pass


class MajorizationUnverified(GeometryError):
    pass


class LengthMismatch(GeometryError):
    pass


class NotCartanHadamard(GeometryError):
    pass


class DegenerateLink(GeometryError):
    pass


class NotConvex(GeometryError):
    pass


class AmbientNotEuclidean(GeometryError):
    pass


class DegenerateInput(GeometryError):
    pass


class DegenerateHull(GeometryError):
    pass


class UnsupportedSpace(GeometryError):
    pass


class InteriorPoint(GeometryError):
    pass


class NotFlatOnTangentPlanes(GeometryError):
    pass


class PathDependence(GeometryError):
    pass


class GridMismatch(GeometryError):
    pass


class MeshError(GeometryError):
    """Connectivity, orientation or genus inconsistency in a mesh."""


class ConfigError(GeometryError):
    pass
