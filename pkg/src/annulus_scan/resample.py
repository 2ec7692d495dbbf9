"""Scan-line extraction, linearisation and inversion.

Rays are fanned across the aperture at one ray per outer-arc pixel; each
ray is sampled at evenly spaced radii so scan lines become image columns
(inner arc on row 0).  The linear image keeps the annulus-sector aspect
ratio Height/Width, where Width is the arc length at the mean radius.
Inversion maps every convex pixel back through the same polar geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentSector
from .raster import Point
from .sector import AnnulusSector

INTERP_MODES = ("spline", "bilinear")

_INVERT_BLOCK_ROWS = 128


@dataclass(frozen=True)
class ScanLineFan:
    """Ordered scan-line segments, one per ray angle.

    theta_hat[k] increases left to right; starts[k]/ends[k] are (row, col)
    pairs on the inner/outer arc at exact radii r_inner/r_outer.
    """

    theta_hat: np.ndarray
    starts: np.ndarray
    ends: np.ndarray
    n_rays: int
    samples_per_ray: int
    step: float

    def __len__(self) -> int:
        return self.n_rays


@dataclass(frozen=True)
class LinearImage:
    """Resampled plane: columns are scan lines, rows are arcs."""

    pixels: np.ndarray
    sector: AnnulusSector
    ratio: float
    n_rays: int
    samples_per_ray: int
    step: float
    interp: str


def aspect_ratio(sector: AnnulusSector) -> float:
    """Height/Width of the annulus sector, Width being area over height
    (the arc length at the mean radius)."""
    area = sector.theta * (sector.r_outer**2 - sector.r_inner**2) / 2.0
    height = sector.r_outer - sector.r_inner
    return height / (area / height)


def ray_endpoints(sector: AnnulusSector, theta_hat: float) -> tuple[Point, Point]:
    """Inner- and outer-arc endpoints of the ray at angle theta_hat.

    theta_hat = pi/2 is the vertical central ray; larger angles swing the
    ray toward larger columns.
    """
    o = sector.origin
    sin_t, cos_t = math.sin(theta_hat), math.cos(theta_hat)
    start = Point(o.row + sector.r_inner * sin_t, o.col - sector.r_inner * cos_t)
    end = Point(o.row + sector.r_outer * sin_t, o.col - sector.r_outer * cos_t)
    return start, end


def build_fan(sector: AnnulusSector, downsample: float = 1.0) -> ScanLineFan:
    """Fan of scan lines covering the aperture.

    One ray per pixel of outer arc (scaled by `downsample`); the sample
    count per ray preserves the sector aspect ratio.
    """
    theta = sector.theta
    n_rays = int(round(theta * sector.r_outer * downsample))
    n_rays = max(n_rays, 2)
    step = theta / n_rays
    samples = max(int(round(n_rays * aspect_ratio(sector))), 2)

    k = np.arange(n_rays, dtype=np.float64)
    theta_hat = math.pi / 2.0 - theta / 2.0 + k * step
    sin_t, cos_t = np.sin(theta_hat), np.cos(theta_hat)
    o = sector.origin
    starts = np.column_stack([o.row + sector.r_inner * sin_t,
                              o.col - sector.r_inner * cos_t])
    ends = np.column_stack([o.row + sector.r_outer * sin_t,
                            o.col - sector.r_outer * cos_t])
    return ScanLineFan(theta_hat=theta_hat, starts=starts, ends=ends,
                       n_rays=n_rays, samples_per_ray=samples, step=step)


def _catmull_rom_weights(f: np.ndarray) -> tuple[np.ndarray, ...]:
    f2 = f * f
    f3 = f2 * f
    return (0.5 * (-f + 2.0 * f2 - f3),
            0.5 * (2.0 - 5.0 * f2 + 3.0 * f3),
            0.5 * (f + 4.0 * f2 - 3.0 * f3),
            0.5 * (-f2 + f3))


def sample_plane(img: np.ndarray, rows_f: np.ndarray, cols_f: np.ndarray,
                 interp: str = "spline") -> np.ndarray:
    """Subpixel sampling of a single-channel image.

    "spline" is Catmull-Rom (C1 cubic); "bilinear" the cheaper fallback.
    Points outside the canvas return 0; stencils near the border replicate
    edge pixels.
    """
    if interp not in INTERP_MODES:
        raise ValueError(f"interp must be one of {INTERP_MODES}")
    src = np.asarray(img, dtype=np.float64)
    h, w = src.shape
    rows_f = np.asarray(rows_f, dtype=np.float64)
    cols_f = np.asarray(cols_f, dtype=np.float64)
    inside = (rows_f >= 0.0) & (rows_f <= h - 1.0) \
        & (cols_f >= 0.0) & (cols_f <= w - 1.0)

    r0 = np.floor(rows_f)
    c0 = np.floor(cols_f)
    fr = rows_f - r0
    fc = cols_f - c0
    r0 = r0.astype(np.int64)
    c0 = c0.astype(np.int64)

    if interp == "bilinear":
        taps_r = ((r0, 1.0 - fr), (r0 + 1, fr))
        taps_c = ((c0, 1.0 - fc), (c0 + 1, fc))
    else:
        wr = _catmull_rom_weights(fr)
        wc = _catmull_rom_weights(fc)
        taps_r = tuple((r0 + k - 1, wr[k]) for k in range(4))
        taps_c = tuple((c0 + k - 1, wc[k]) for k in range(4))

    out = np.zeros(rows_f.shape, dtype=np.float64)
    for ri, rw in taps_r:
        rid = np.clip(ri, 0, h - 1)
        for ci, cw in taps_c:
            cid = np.clip(ci, 0, w - 1)
            out += rw * cw * src[rid, cid]
    out[~inside] = 0.0
    return out


def _sample_any(img: np.ndarray, rows_f, cols_f, interp: str) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim == 2:
        return sample_plane(img, rows_f, cols_f, interp)
    chans = [sample_plane(img[..., c], rows_f, cols_f, interp)
             for c in range(img.shape[2])]
    return np.stack(chans, axis=-1)


def linearise(img: np.ndarray, sector: AnnulusSector,
              interp: str = "spline", downsample: float = 1.0) -> LinearImage:
    """Resample the convex plane so scan lines become columns.

    Row 0 is the inner arc, the last row the outer arc; columns follow the
    fan left to right.  Samples outside the canvas are zero.
    """
    img = np.asarray(img)
    if img.shape[:2] != tuple(sector.source_dims):
        raise InconsistentSector(
            f"sector is for {sector.source_dims}, image is {img.shape[:2]}")
    fan = build_fan(sector, downsample)
    radii_lin = np.linspace(sector.r_inner, sector.r_outer,
                            fan.samples_per_ray)
    sin_t = np.sin(fan.theta_hat)[None, :]
    cos_t = np.cos(fan.theta_hat)[None, :]
    rows_f = sector.origin.row + radii_lin[:, None] * sin_t
    cols_f = sector.origin.col - radii_lin[:, None] * cos_t
    values = _sample_any(img, rows_f, cols_f, interp)
    pixels = np.clip(np.rint(values), 0, 255).astype(np.uint8)
    return LinearImage(pixels=pixels, sector=sector,
                       ratio=aspect_ratio(sector), n_rays=fan.n_rays,
                       samples_per_ray=fan.samples_per_ray, step=fan.step,
                       interp=interp)


def to_linear_coords(lin: LinearImage, points: np.ndarray) -> np.ndarray:
    """Map (row, col) convex-image points into fractional linear-image
    coordinates."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    sec = lin.sector
    dr = pts[:, 0] - sec.origin.row
    dc = pts[:, 1] - sec.origin.col
    r = np.hypot(dr, dc)
    phi = np.arctan2(dc, dr)  # signed angle from the downward axis
    lin_rows = (r - sec.r_inner) / (sec.r_outer - sec.r_inner) \
        * (lin.samples_per_ray - 1)
    lin_cols = (phi + sec.theta / 2.0) / lin.step
    return np.column_stack([lin_rows, lin_cols])


def to_convex_coords(lin: LinearImage, points: np.ndarray) -> np.ndarray:
    """Map fractional linear-image (row, col) points back to the convex
    image."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    sec = lin.sector
    r = sec.r_inner + pts[:, 0] / (lin.samples_per_ray - 1) \
        * (sec.r_outer - sec.r_inner)
    phi = pts[:, 1] * lin.step - sec.theta / 2.0
    rows = sec.origin.row + r * np.cos(phi)
    cols = sec.origin.col + r * np.sin(phi)
    return np.column_stack([rows, cols])


def invert(lin: LinearImage, target_dims: tuple[int, int] | None = None) -> np.ndarray:
    """Re-project a linear image back to convex geometry.

    Every target pixel inside the sector footprint is looked up at its
    (radius, angle) position in the linear raster; everything else is 0.
    """
    sec = lin.sector
    h, w = target_dims if target_dims is not None else sec.source_dims
    half = sec.theta / 2.0
    shape = (h, w) if lin.pixels.ndim == 2 else (h, w, lin.pixels.shape[2])
    out = np.zeros(shape, dtype=np.uint8)

    cols = np.arange(w, dtype=np.float64)[None, :]
    for top in range(0, h, _INVERT_BLOCK_ROWS):
        stop = min(top + _INVERT_BLOCK_ROWS, h)
        rows = np.arange(top, stop, dtype=np.float64)[:, None]
        dr = rows - sec.origin.row
        dc = cols - sec.origin.col
        r = np.hypot(dr, dc)
        phi = np.arctan2(dc, dr)
        inside = (r >= sec.r_inner) & (r <= sec.r_outer) & (np.abs(phi) <= half)
        lin_rows = (r - sec.r_inner) / (sec.r_outer - sec.r_inner) \
            * (lin.samples_per_ray - 1)
        lin_cols = np.clip((phi + half) / lin.step, 0.0, lin.n_rays - 1.0)
        values = _sample_any(lin.pixels, lin_rows, lin_cols, lin.interp)
        values[~inside] = 0.0
        out[top:stop] = np.clip(np.rint(values), 0, 255).astype(np.uint8)
    return out
