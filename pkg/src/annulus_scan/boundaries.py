"""Radial boundary detection.

The outermost mask pixels per row form candidate edge sets for the two
legs; convex-hull truncation drops the outer-arc portion, RANSAC fits a
line to each leg, and the noisier side is replaced by the mirror of the
better fit about the symmetry axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import TooFewPoints
from .raster import Point
from .symmetry import ArcPoints

DEFAULT_SEED = 7
DEFAULT_INLIER_THRESHOLD = 2.0
DEFAULT_ITERATIONS = 1000


class EdgeSet(NamedTuple):
    """Per-row extreme mask columns on one side of the axis; points is an
    (n, 2) float array of (row, col)."""

    points: np.ndarray
    side: str


class RadialBoundary(NamedTuple):
    top: Point
    bottom: Point


@dataclass(frozen=True)
class LineFit:
    """Line col = slope * row + intercept with its RANSAC diagnostics."""

    slope: float
    intercept: float
    residual: float
    inlier_count: int
    seed: int

    def col_at(self, row: float) -> float:
        return self.slope * row + self.intercept


def extract_edges(plane: np.ndarray, m: float) -> tuple[EdgeSet, EdgeSet]:
    """Farthest foreground columns left and right of the axis, one point
    per mask row that intersects the respective side."""
    p = np.asarray(plane).astype(bool)
    h, w = p.shape
    left_stop = math.ceil(m)          # left search range [0, ceil(m)-1]
    right_start = math.floor(m) + 1   # right search range [floor(m)+1, w-1]

    left_pts = []
    right_pts = []
    if left_stop > 0:
        lp = p[:, :left_stop]
        has = lp.any(axis=1)
        firsts = lp.argmax(axis=1)
        rows = np.flatnonzero(has)
        left_pts = np.column_stack([rows, firsts[rows]]).astype(np.float64)
    if right_start < w:
        rp = p[:, right_start:]
        has = rp.any(axis=1)
        lasts = rp.shape[1] - 1 - rp[:, ::-1].argmax(axis=1) + right_start
        rows = np.flatnonzero(has)
        right_pts = np.column_stack([rows, lasts[rows]]).astype(np.float64)

    left = np.asarray(left_pts, dtype=np.float64).reshape(-1, 2)
    right = np.asarray(right_pts, dtype=np.float64).reshape(-1, 2)
    return EdgeSet(left, "left"), EdgeSet(right, "right")


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices, or the input when
    everything is collinear."""
    pts = np.unique(points, axis=0)
    if pts.shape[0] < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    ordered = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    lower: list[np.ndarray] = []
    for q in ordered:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list[np.ndarray] = []
    for q in ordered[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


def truncate_at_vertices(edges: EdgeSet) -> EdgeSet:
    """Cut the edge set at the angular vertex joining leg and outer arc.

    The vertex is the hull point with extreme column (minimal on the left
    side, maximal on the right); only the leg segment above it survives.
    Collinear inputs pass through unchanged.
    """
    pts = edges.points
    if pts.shape[0] < 3:
        return edges
    hull = _convex_hull(pts)
    if hull.shape[0] < 3:
        return edges
    cols = hull[:, 1]
    extreme = cols.min() if edges.side == "left" else cols.max()
    candidates = hull[cols == extreme]
    vertex_row = candidates[:, 0].min()
    keep = pts[:, 0] <= vertex_row
    return EdgeSet(pts[keep], edges.side)


def ransac_line(edges: EdgeSet, seed: int = DEFAULT_SEED,
                inlier_threshold: float = DEFAULT_INLIER_THRESHOLD,
                iterations: int = DEFAULT_ITERATIONS) -> LineFit:
    """Robust line fit col = a*row + b.

    Classic two-point RANSAC: the candidate with the largest consensus of
    points within `inlier_threshold` perpendicular distance wins and is
    refit by least squares over its inliers.  Fully deterministic for a
    given seed; the generator is owned by this call.
    """
    pts = np.asarray(edges.points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] < 2 or np.unique(pts[:, 0]).size < 2:
        raise TooFewPoints("need at least 2 points with distinct rows")
    rows, cols = pts[:, 0], pts[:, 1]

    rng = np.random.default_rng(seed)
    idx = rng.integers(0, pts.shape[0], size=(iterations, 2))
    p, q = pts[idx[:, 0]], pts[idx[:, 1]]
    drow = q[:, 0] - p[:, 0]
    valid = drow != 0.0
    slope = np.where(valid, (q[:, 1] - p[:, 1]) / np.where(valid, drow, 1.0), 0.0)
    intercept = p[:, 1] - slope * p[:, 0]

    # perpendicular point-line distances, (iterations, n)
    dist = np.abs(slope[:, None] * rows[None, :] - cols[None, :]
                  + intercept[:, None]) / np.sqrt(slope * slope + 1.0)[:, None]
    counts = np.where(valid, (dist <= inlier_threshold).sum(axis=1), -1)
    best = int(np.argmax(counts))
    if counts[best] < 2:
        inliers = np.ones(pts.shape[0], dtype=bool)  # no usable candidate
    else:
        inliers = dist[best] <= inlier_threshold

    a, b = _least_squares(rows[inliers], cols[inliers])
    res = np.abs(a * rows[inliers] - cols[inliers] + b) / math.sqrt(a * a + 1.0)
    return LineFit(slope=float(a), intercept=float(b),
                   residual=float(res.mean()), inlier_count=int(inliers.sum()),
                   seed=seed)


def _least_squares(rows: np.ndarray, cols: np.ndarray) -> tuple[float, float]:
    r0, c0 = rows.mean(), cols.mean()
    var = ((rows - r0) ** 2).sum()
    if var == 0.0:
        raise TooFewPoints("consensus set spans a single row")
    a = ((rows - r0) * (cols - c0)).sum() / var
    return float(a), float(c0 - a * r0)


def boundary_segment(fit: LineFit, edges: EdgeSet) -> RadialBoundary:
    """Endpoints of the fitted line at the first and last edge rows."""
    rows = edges.points[:, 0]
    top_row, bottom_row = float(rows.min()), float(rows.max())
    return RadialBoundary(Point(top_row, fit.col_at(top_row)),
                          Point(bottom_row, fit.col_at(bottom_row)))


def _mirror(rb: RadialBoundary, axis_col: float) -> RadialBoundary:
    return RadialBoundary(Point(rb.top.row, 2.0 * axis_col - rb.top.col),
                          Point(rb.bottom.row, 2.0 * axis_col - rb.bottom.col))


def symmetric_correction(rb_l: RadialBoundary, rb_r: RadialBoundary,
                         res_l: float, res_r: float,
                         arcs: ArcPoints) -> tuple[RadialBoundary, RadialBoundary]:
    """Replace the worse-fitting boundary by the mirror of the better one
    about the vertical axis through the arc points.  Equal residuals leave
    both boundaries untouched."""
    axis_col = arcs.arc_inner.col
    if res_r < res_l:
        return _mirror(rb_r, axis_col), rb_r
    if res_r > res_l:
        return rb_l, _mirror(rb_l, axis_col)
    return rb_l, rb_r
