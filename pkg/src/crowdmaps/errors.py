"""Exception types raised across the package."""


class CrowdMapsError(Exception):
    """Base class for all validation and format errors in this package."""


class EmptyAnnotationError(CrowdMapsError):
    """An operation that needs at least one head point got none."""


class SinglePointError(CrowdMapsError):
    """Neighbor statistics are undefined for a single point."""


class DuplicatePointError(CrowdMapsError):
    """Two identical head points; the Voronoi split is undefined."""


class PointOutOfBoundsError(CrowdMapsError):
    """A point lies outside the half-open image bounds [0, w) x [0, h)."""


class SeedOnBoundaryError(CrowdMapsError):
    """The downward ray exits immediately; the cell is degenerate."""


class NonPositiveInputError(CrowdMapsError):
    """A strictly positive quantity was zero or negative."""


class CenterOutOfBoundsError(CrowdMapsError):
    """A kernel center lies outside the raster extent."""


class ShapeMismatchError(CrowdMapsError):
    """Two maps that must share dimensions do not."""


class EmptyInputError(CrowdMapsError):
    """A metric over images received an empty batch."""


class ZeroGroundTruthError(CrowdMapsError):
    """The ground-truth map has no positive values to scale by."""


class TooSmallError(CrowdMapsError):
    """Map smaller than the structural-similarity window."""


class MalformedInputError(CrowdMapsError):
    """Input bytes do not match the expected schema or format."""


class BadMagicError(MalformedInputError):
    """The map file does not start with the DMAP magic."""


class UnsupportedVersionError(MalformedInputError):
    """The map file declares a version this reader does not know."""


class TruncatedPayloadError(MalformedInputError):
    """The map file ends before the declared payload is complete."""
