"""Debug renderings: annotated overlays and the symmetry-profile plot."""

from __future__ import annotations

import math

import numpy as np

from .raster import Point, replicate
from .sector import ExtractionTrace

MASK_COLOR = (80, 220, 80)
EDGE_COLOR = (200, 80, 220)
LINE_COLOR = (70, 130, 255)
KEYPOINT_COLOR = (255, 160, 40)
RAY_COLOR = (255, 255, 90)


def _paint(img: np.ndarray, rows: np.ndarray, cols: np.ndarray, color) -> None:
    h, w = img.shape[:2]
    keep = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    img[rows[keep], cols[keep]] = color


def draw_segment(img: np.ndarray, p0: Point, p1: Point, color,
                 thickness: int = 1) -> None:
    """Paint a straight segment by dense sampling; endpoints may lie
    outside the canvas."""
    length = math.hypot(p1.row - p0.row, p1.col - p0.col)
    n = max(int(length * 2), 2)
    t = np.linspace(0.0, 1.0, n)
    rows = np.rint(p0.row + (p1.row - p0.row) * t).astype(int)
    cols = np.rint(p0.col + (p1.col - p0.col) * t).astype(int)
    for dr in range(thickness):
        for dc in range(thickness):
            _paint(img, rows + dr, cols + dc, color)


def draw_cross(img: np.ndarray, p: Point, color, arm: int = 5) -> None:
    r, c = int(round(p.row)), int(round(p.col))
    span = np.arange(-arm, arm + 1)
    _paint(img, r + span, np.full_like(span, c), color)
    _paint(img, np.full_like(span, r), c + span, color)


def mask_outline(mask: np.ndarray) -> np.ndarray:
    m = np.asarray(mask).astype(bool)
    interior = m.copy()
    interior[1:, :] &= m[:-1, :]
    interior[:-1, :] &= m[1:, :]
    interior[:, 1:] &= m[:, :-1]
    interior[:, :-1] &= m[:, 1:]
    return m & ~interior


def render_overlay(img: np.ndarray, trace: ExtractionTrace) -> np.ndarray:
    """Annotated copy of the input: mask outline, edge points, fitted
    boundary lines, aperture rays and the seven key points."""
    canvas = np.array(img if np.asarray(img).ndim == 3 else replicate(img),
                      dtype=np.uint8, copy=True)
    sec = trace.sector

    outline = mask_outline(trace.plane)
    canvas[outline] = MASK_COLOR

    for edges in (trace.edges_l, trace.edges_r):
        pts = edges.points.astype(int)
        if pts.size:
            _paint(canvas, pts[:, 0], pts[:, 1], EDGE_COLOR)

    for rb in (trace.rb_l, trace.rb_r):
        draw_segment(canvas, rb.top, rb.bottom, LINE_COLOR, thickness=2)
        draw_segment(canvas, sec.origin, rb.bottom, RAY_COLOR)

    for point in sec.keypoints.values():
        draw_cross(canvas, point, KEYPOINT_COLOR)
    return canvas


def save_symmetry_plot(trace: ExtractionTrace, path) -> None:
    """Plot the accumulated row profile with the axis and flanking minima
    marked."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4))
    if trace.accumulation is not None:
        ax.plot(trace.accumulation, color="tab:blue", label="accumulated rows")
    ax.axvline(trace.sym.m, color="tab:red", label="axis m")
    ax.axvline(trace.sym.min_l, color="tab:green", label="flanking minima")
    ax.axvline(trace.sym.min_r, color="tab:green")
    ax.set_xlabel("column")
    ax.set_ylabel("accumulation")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, format="png")
    plt.close(fig)
