"""Exception types raised across the pipeline."""


class AnnulusScanError(Exception):
    """Base class for all pipeline errors."""


# raster
class MalformedFile(AnnulusScanError):
    """Input bytes could not be decoded as PNG/JPEG/BMP."""


class TooSmall(AnnulusScanError):
    """Image has a dimension smaller than 2 pixels."""


class IoFailure(AnnulusScanError):
    """Reading or writing an image file failed."""


# masking
class DegenerateHistogram(AnnulusScanError):
    """Histogram bins have zero standard deviation."""


class EmptyForeground(AnnulusScanError):
    """Binary mask contains no foreground pixels."""


# symmetry
class FlatAccumulation(AnnulusScanError):
    """Row accumulation sums to zero; no centre of mass exists."""


class AxisMissesPlane(AnnulusScanError):
    """The vertical axis column does not intersect the plane mask."""


# boundaries
class TooFewPoints(AnnulusScanError):
    """Not enough points for a line fit."""


# sector
class ZeroLengthSegment(AnnulusScanError):
    """Boundary segment endpoints coincide."""


class ParallelBoundaries(AnnulusScanError):
    """Radial boundary lines do not intersect (linear probe image)."""


class DegenerateRay(AnnulusScanError):
    """Zero-length ray from the origin to a boundary endpoint."""


class NotConvex(AnnulusScanError):
    """Extraction produced geometry inconsistent with a convex plane."""


# resample
class InconsistentSector(AnnulusScanError):
    """Sector source dimensions do not match the supplied image."""


# metrics
class MismatchedSets(AnnulusScanError):
    """Prediction and ground-truth sets do not correspond."""


class DegeneratePolygon(AnnulusScanError):
    """Polygon has fewer than 3 vertices or zero perimeter."""


class CountMismatch(AnnulusScanError):
    """Point sets have different vertex counts."""


class DimensionMismatch(AnnulusScanError):
    """Images have different shapes."""


class TooSmallForScales(AnnulusScanError):
    """Image too small for the requested number of MS-SSIM scales."""


# synth
class SpecOutOfCanvas(AnnulusScanError):
    """Synthetic sector does not fit the requested canvas."""


class CorruptionTooSevere(AnnulusScanError):
    """Corruption would relabel too much of the sector."""
