"""Vertical axis of symmetry and arc key points.

A one-pixel-high window slides down the top half of the plane mask,
accumulating column occupancy; the smoothed accumulation locates the centre
of mass and the two minima flanking it (the top corners of the sector).
Images whose top rows already contain the mask take the cropped-top
fallback instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AxisMissesPlane, FlatAccumulation
from .raster import Point

SMOOTH_KERNEL = np.full(5, 0.2)


class ArcPoints(NamedTuple):
    arc_inner: Point
    arc_outer: Point


@dataclass(frozen=True)
class SymmetryResult:
    """Axis column m with the intermediates that produced it.

    For cropped-top images m_hat equals m and (min_l, min_r) are the ends
    of the top-row foreground span.
    """

    m: float
    m_hat: float
    min_l: int
    min_r: int
    cropped_top: bool


def accumulate_rows(plane: np.ndarray) -> np.ndarray:
    """Negative column occupancy of mask rows 1..h//2, smoothed by a
    width-5 moving average with replicated edges."""
    m = np.asarray(plane)
    h = m.shape[0]
    raw = -m[1 : h // 2 + 1, :].sum(axis=0).astype(np.float64)
    padded = np.concatenate([raw[:1], raw[:1], raw, raw[-1:], raw[-1:]])
    return np.convolve(padded, SMOOTH_KERNEL, mode="valid")


def centroid(s: np.ndarray) -> float:
    """Weighted-average trapezoid centre of mass of the accumulation.

    Trapezoids span columns 1..w-1; column 0 does not contribute.
    """
    s = np.asarray(s, dtype=np.float64)
    pair = s[1:-1] + s[2:]
    idx = np.arange(1, s.size - 1, dtype=np.float64)
    num = (idx * s[1:-1] + (idx + 1) * s[2:]).sum() / 2.0
    den = pair.sum() / 2.0
    if den == 0.0:
        raise FlatAccumulation("accumulation is identically zero")
    return float(num / den)


def flanking_minima(s: np.ndarray, m_hat: float) -> tuple[int, int]:
    """Argmin of the accumulation on either side of the centre of mass;
    first occurrence wins on plateaus."""
    s = np.asarray(s, dtype=np.float64)
    w = s.size
    split = int(math.floor(m_hat))
    if not 1 <= m_hat <= w - 1:
        raise ValueError(f"centre of mass {m_hat} outside columns [1, {w - 1}]")
    min_l = 1 + int(np.argmin(s[1 : split + 1]))
    min_r = split + 1 + int(np.argmin(s[split + 1 : w]))
    return min_l, min_r


def symmetry_axis(m_hat: float, min_l: int, min_r: int) -> float:
    """Average of the centre of mass and the midpoint of the flanking
    minima."""
    return (m_hat + (0.5 * (min_r - min_l) + min_l)) / 2.0


def detect_cropped_top(plane: np.ndarray) -> tuple[bool, float | None]:
    """Cropped-top fallback trigger.

    When row 0 contains any foreground the image has no concave top
    profile; m is then the midpoint of the leftmost and rightmost
    foreground columns of row 0.
    """
    top = np.flatnonzero(np.asarray(plane)[0, :])
    if top.size == 0:
        return False, None
    return True, (float(top[0]) + float(top[-1])) / 2.0


def find_axis(plane: np.ndarray) -> SymmetryResult:
    """Locate the vertical symmetry axis, taking the cropped-top fallback
    when it applies."""
    cropped, m0 = detect_cropped_top(plane)
    if cropped:
        top = np.flatnonzero(np.asarray(plane)[0, :])
        return SymmetryResult(m=float(m0), m_hat=float(m0), min_l=int(top[0]),
                              min_r=int(top[-1]), cropped_top=True)
    s = accumulate_rows(plane)
    m_hat = centroid(s)
    min_l, min_r = flanking_minima(s, m_hat)
    m = symmetry_axis(m_hat, min_l, min_r)
    return SymmetryResult(m=m, m_hat=m_hat, min_l=min_l, min_r=min_r,
                          cropped_top=False)


def arc_points(plane: np.ndarray, m: float) -> ArcPoints:
    """First and last mask rows along the integer column nearest m."""
    p = np.asarray(plane)
    col = int(round(m))
    if not 0 <= col < p.shape[1]:
        raise AxisMissesPlane(f"axis column {col} outside image")
    rows = np.flatnonzero(p[:, col])
    if rows.size == 0:
        raise AxisMissesPlane(f"no plane pixels in column {col}")
    return ArcPoints(Point(float(rows[0]), float(col)),
                     Point(float(rows[-1]), float(col)))
