"""Exception hierarchy shared by all catk modules."""

from __future__ import annotations


class CatkError(Exception):
    """Base class for every error raised by catk."""


class GeometryError(CatkError):
    pass


class DegenerateTriangle(GeometryError):
    pass


class SizeBound(GeometryError):
    """Triangle too large for a positive curvature bound (perimeter >= 2*pi/sqrt(kappa))."""


class ComplexError(CatkError):
    pass


class LengthMismatch(ComplexError):
    pass


class SlotReuse(ComplexError):
    pass


class InvalidTriangle(ComplexError):
    pass


class ComplexFormatError(ComplexError):
    pass


class BoundaryEdge(ComplexError):
    pass


class NotAdmissible(CatkError):
    pass


class ZeroSector(CatkError):
    pass


class MalformedWings(CatkError):
    pass


class DisconnectedPoints(CatkError):
    pass


class BoundaryMismatch(CatkError):
    pass


class SurgeryError(CatkError):
    pass


class NotSingular(SurgeryError):
    pass


class RadiusTooLarge(SurgeryError):
    pass


class CycleInT(SurgeryError):
    pass


class OverlappingRegions(SurgeryError):
    pass


class InvalidParams(CatkError):
    pass
