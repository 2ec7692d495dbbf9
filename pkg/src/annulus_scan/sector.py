"""Annulus sector assembly and the end-to-end extraction pipeline.

The two radial boundary lines are intersected via Cramer's rule to obtain
the sector origin; the aperture angle, the two radii, and the seven key
points complete the parameterisation of the convex plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import boundaries as bnd
from . import masking, symmetry
from .errors import (DegenerateRay, NotConvex, ParallelBoundaries,
                     ZeroLengthSegment)
from .raster import Point, to_grayscale

KEYPOINT_NAMES = ("arc_inner", "arc_outer", "legs_l_top", "legs_l_bottom",
                  "legs_r_top", "legs_r_bottom", "origin")

# aperture window outside which an image is declared non-convex
THETA_MIN_DEG = 1.0
THETA_MAX_DEG = 179.0


class LineCoefficients(NamedTuple):
    """Line a*row + b*col + c = 0 stored as [a, b, -c]."""

    a: float
    b: float
    c_neg: float


@dataclass(frozen=True)
class ExtractOptions:
    """Knobs for the extraction pipeline; defaults match the reference
    behaviour used throughout the tests."""

    seed: int = bnd.DEFAULT_SEED
    ransac_threshold: float = bnd.DEFAULT_INLIER_THRESHOLD
    ransac_iters: int = bnd.DEFAULT_ITERATIONS
    closing: bool = False


@dataclass(frozen=True)
class AnnulusSector:
    """Complete convex-plane geometry.

    origin usually lies above the canvas (negative row).  keypoints holds
    the seven named Points including the origin itself.
    """

    origin: Point
    theta: float
    r_inner: float
    r_outer: float
    axis_col: float
    keypoints: dict[str, Point]
    source_dims: tuple[int, int]
    cropped_top: bool = False

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi:
            raise NotConvex(f"aperture {math.degrees(self.theta):.2f} deg outside (0, 180)")
        if not 0.0 <= self.r_inner < self.r_outer:
            raise NotConvex(f"radii r_inner={self.r_inner:.2f}, r_outer={self.r_outer:.2f} not ordered")
        missing = set(KEYPOINT_NAMES) - set(self.keypoints)
        if missing:
            raise ValueError(f"missing keypoints: {sorted(missing)}")


@dataclass(frozen=True)
class ExtractionTrace:
    """Intermediate artifacts of one extraction, for overlays and debugging."""

    sector: AnnulusSector
    plane: np.ndarray
    sym: symmetry.SymmetryResult
    accumulation: np.ndarray | None
    edges_l: bnd.EdgeSet
    edges_r: bnd.EdgeSet
    trunc_l: bnd.EdgeSet
    trunc_r: bnd.EdgeSet
    fit_l: bnd.LineFit
    fit_r: bnd.LineFit
    rb_l: bnd.RadialBoundary
    rb_r: bnd.RadialBoundary


def line_coefficients(rb: bnd.RadialBoundary) -> LineCoefficients:
    """Two-point line coefficients from a boundary segment."""
    top, bottom = rb.top, rb.bottom
    if top == bottom:
        raise ZeroLengthSegment("boundary endpoints coincide")
    a = top.col - bottom.col
    b = bottom.row - top.row
    c = top.row * bottom.col - bottom.row * top.col
    return LineCoefficients(a, b, -c)


def intersect(l_l: LineCoefficients, l_r: LineCoefficients) -> Point:
    """Cramer's-rule intersection of the two boundary lines."""
    d = l_l.a * l_r.b - l_l.b * l_r.a
    scale = max(abs(v) for line in (l_l, l_r) for v in line)
    if abs(d) <= 1e-9 * max(scale, 1.0):
        raise ParallelBoundaries("radial boundaries are parallel")
    dx = l_l.c_neg * l_r.b - l_l.b * l_r.c_neg
    dy = l_l.a * l_r.c_neg - l_l.c_neg * l_r.a
    return Point(dx / d, dy / d)


def aperture_angle(rb_l: bnd.RadialBoundary, rb_r: bnd.RadialBoundary,
                   origin: Point) -> float:
    """Angle at the origin between the rays to the two bottom endpoints."""
    a = (rb_l.bottom.row - origin.row, rb_l.bottom.col - origin.col)
    c = (rb_r.bottom.row - origin.row, rb_r.bottom.col - origin.col)
    na, nc = math.hypot(*a), math.hypot(*c)
    if na == 0.0 or nc == 0.0:
        raise DegenerateRay("boundary endpoint coincides with the origin")
    cosine = (a[0] * c[0] + a[1] * c[1]) / (na * nc)
    return math.acos(min(1.0, max(-1.0, cosine)))


def radii(arcs: symmetry.ArcPoints, origin: Point) -> tuple[float, float]:
    """Euclidean distances origin -> inner arc and origin -> outer arc."""
    r_in = math.hypot(arcs.arc_inner.row - origin.row,
                      arcs.arc_inner.col - origin.col)
    r_out = math.hypot(arcs.arc_outer.row - origin.row,
                       arcs.arc_outer.col - origin.col)
    return r_in, r_out


def footprint_mask(sector: AnnulusSector, dims: tuple[int, int] | None = None,
                   margin: float = 0.0) -> np.ndarray:
    """Pixel-centre membership mask of the sector on a canvas.

    margin > 0 shrinks the footprint by that many pixels on every side
    (useful for boundary-insensitive comparisons).
    """
    h, w = dims if dims is not None else sector.source_dims
    rows = np.arange(h, dtype=np.float64)[:, None]
    cols = np.arange(w, dtype=np.float64)[None, :]
    dr = rows - sector.origin.row
    dc = cols - sector.origin.col
    r = np.hypot(dr, dc)
    half = sector.theta / 2.0
    ang = np.arctan2(np.abs(dc), dr)  # 0 points straight down; >pi/2 above origin
    ang_limit = half if margin == 0.0 else half - margin / np.maximum(r, 1e-9)
    inside = ((r >= sector.r_inner + margin) & (r <= sector.r_outer - margin)
              & (ang <= ang_limit))
    return inside.astype(np.uint8)


def _build_sector(origin: Point, theta: float, r_inner: float, r_outer: float,
                  axis_col: float, dims: tuple[int, int],
                  cropped_top: bool, arcs: symmetry.ArcPoints,
                  rb_l: bnd.RadialBoundary, rb_r: bnd.RadialBoundary) -> AnnulusSector:
    keypoints = {
        "arc_inner": arcs.arc_inner,
        "arc_outer": arcs.arc_outer,
        "legs_l_top": rb_l.top,
        "legs_l_bottom": rb_l.bottom,
        "legs_r_top": rb_r.top,
        "legs_r_bottom": rb_r.bottom,
        "origin": origin,
    }
    return AnnulusSector(origin=origin, theta=theta, r_inner=r_inner,
                         r_outer=r_outer, axis_col=axis_col,
                         keypoints=keypoints, source_dims=dims,
                         cropped_top=cropped_top)


def sector_keypoints(origin: Point, theta: float, r_inner: float,
                     r_outer: float) -> dict[str, Point]:
    """Analytic key points of an ideal sector symmetric about its origin
    column."""
    half = theta / 2.0
    sin_h, cos_h = math.sin(half), math.cos(half)

    def at(r: float, side: float) -> Point:
        return Point(origin.row + r * cos_h, origin.col + side * r * sin_h)

    return {
        "arc_inner": Point(origin.row + r_inner, origin.col),
        "arc_outer": Point(origin.row + r_outer, origin.col),
        "legs_l_top": at(r_inner, -1.0),
        "legs_l_bottom": at(r_outer, -1.0),
        "legs_r_top": at(r_inner, 1.0),
        "legs_r_bottom": at(r_outer, 1.0),
        "origin": origin,
    }


def extract_trace(img: np.ndarray, options: ExtractOptions | None = None) -> ExtractionTrace:
    """Run the full pipeline and keep every intermediate step."""
    opts = options or ExtractOptions()
    gray = to_grayscale(img)
    dims = (int(gray.shape[0]), int(gray.shape[1]))

    plane = masking.plane_mask(gray, closing=opts.closing)
    sym = symmetry.find_axis(plane)
    accumulation = None if sym.cropped_top else symmetry.accumulate_rows(plane)
    arcs = symmetry.arc_points(plane, sym.m)

    edges_l, edges_r = bnd.extract_edges(plane, sym.m)
    trunc_l = bnd.truncate_at_vertices(edges_l)
    trunc_r = bnd.truncate_at_vertices(edges_r)
    fit_l = bnd.ransac_line(trunc_l, seed=opts.seed,
                            inlier_threshold=opts.ransac_threshold,
                            iterations=opts.ransac_iters)
    fit_r = bnd.ransac_line(trunc_r, seed=opts.seed + 1,
                            inlier_threshold=opts.ransac_threshold,
                            iterations=opts.ransac_iters)
    rb_l = bnd.boundary_segment(fit_l, trunc_l)
    rb_r = bnd.boundary_segment(fit_r, trunc_r)
    rb_l, rb_r = bnd.symmetric_correction(rb_l, rb_r, fit_l.residual,
                                          fit_r.residual, arcs)

    try:
        origin = intersect(line_coefficients(rb_l), line_coefficients(rb_r))
    except (ParallelBoundaries, ZeroLengthSegment) as exc:
        raise NotConvex(str(exc)) from exc
    theta = aperture_angle(rb_l, rb_r, origin)
    theta_deg = math.degrees(theta)
    if not THETA_MIN_DEG < theta_deg < THETA_MAX_DEG:
        raise NotConvex(f"aperture {theta_deg:.2f} deg outside "
                        f"({THETA_MIN_DEG}, {THETA_MAX_DEG})")
    r_inner, r_outer = radii(arcs, origin)
    if r_inner >= r_outer:
        raise NotConvex("inner radius is not smaller than outer radius")

    sec = _build_sector(origin, theta, r_inner, r_outer, sym.m, dims,
                        sym.cropped_top, arcs, rb_l, rb_r)
    return ExtractionTrace(sector=sec, plane=plane, sym=sym,
                           accumulation=accumulation,
                           edges_l=edges_l, edges_r=edges_r,
                           trunc_l=trunc_l, trunc_r=trunc_r,
                           fit_l=fit_l, fit_r=fit_r, rb_l=rb_l, rb_r=rb_r)


def extract(img: np.ndarray, options: ExtractOptions | None = None) -> AnnulusSector:
    """Extract the annulus sector geometry of a convex ultrasound image."""
    return extract_trace(img, options).sector
