"""Convex ultrasound plane extraction and linearisation toolkit.

Estimates the annulus-sector geometry of convex B-mode planes from
non-standardised images, resamples the plane along its scan lines,
inverts the transform, and scores results; a synthetic sector renderer
provides exact ground truth for verification.
"""

from .boundaries import (EdgeSet, LineFit, RadialBoundary, boundary_segment,
                         extract_edges, ransac_line, symmetric_correction,
                         truncate_at_vertices)
from .masking import (ComponentMap, background_max, binarize,
                      connected_components, intensity_histogram,
                      largest_component, plane_mask, z_scores)
from .metrics import (KeypointAnnotation, circularity, keypoint_mse, maad,
                      ms_ssim, procrustes_disparity, roundtrip_mse)
from .raster import Point, decode, encode, load_image, replicate, to_grayscale
from .resample import (LinearImage, ScanLineFan, build_fan, invert, linearise,
                       ray_endpoints, sample_plane, to_convex_coords,
                       to_linear_coords)
from .sector import (KEYPOINT_NAMES, AnnulusSector, ExtractOptions,
                     aperture_angle, extract, extract_trace, footprint_mask,
                     intersect, line_coefficients, radii, sector_keypoints)
from .symmetry import (ArcPoints, SymmetryResult, accumulate_rows, arc_points,
                       centroid, detect_cropped_top, find_axis,
                       flanking_minima, symmetry_axis)
from .synth import CorruptionSpec, GuiBox, SectorSpec, corrupt, render

__version__ = "0.1.0"
