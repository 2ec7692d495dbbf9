"""Quantitative evaluation: per-keypoint MSE, angular error, circularity,
Procrustes disparity, multi-scale structural similarity and the round-trip
reconstruction error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .errors import (CountMismatch, DegeneratePolygon, DimensionMismatch,
                     MismatchedSets, TooSmallForScales)
from .raster import Point
from .sector import KEYPOINT_NAMES

MSSSIM_SCALES = 5
MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
_WINDOW_SIZE = 11
_WINDOW_SIGMA = 1.5
_K1, _K2 = 0.01, 0.03


@dataclass(frozen=True)
class KeypointAnnotation:
    """The seven named key points of one image."""

    image_id: str
    points: dict[str, Point]

    def __post_init__(self):
        missing = set(KEYPOINT_NAMES) - set(self.points)
        if missing:
            raise ValueError(f"{self.image_id}: missing keypoints {sorted(missing)}")


def _pair_by_id(gt: list[KeypointAnnotation], pred: list[KeypointAnnotation]):
    if len(gt) != len(pred):
        raise MismatchedSets(f"{len(gt)} ground-truth vs {len(pred)} predicted")
    by_id = {p.image_id: p for p in pred}
    if len(by_id) != len(pred) or set(by_id) != {g.image_id for g in gt}:
        raise MismatchedSets("image ids do not correspond")
    return [(g, by_id[g.image_id]) for g in gt]


def keypoint_mse(gt: list[KeypointAnnotation],
                 pred: list[KeypointAnnotation]) -> dict[str, dict[str, float]]:
    """Per-keypoint squared-coordinate error across images.

    For every keypoint the mean and population std of the squared
    Euclidean offset are reported, plus the mean plain Euclidean distance
    under the key "euclid_mean".
    """
    pairs = _pair_by_id(gt, pred)
    out: dict[str, dict[str, float]] = {}
    for name in KEYPOINT_NAMES:
        sq = np.array([(g.points[name].row - p.points[name].row) ** 2
                       + (g.points[name].col - p.points[name].col) ** 2
                       for g, p in pairs])
        out[name] = {"mse_mean": float(sq.mean()),
                     "mse_std": float(sq.std()),
                     "euclid_mean": float(np.sqrt(sq).mean())}
    return out


def maad(gt_thetas, pred_thetas) -> tuple[float, float]:
    """Mean and std of absolute angular differences, in degrees."""
    gt = np.asarray(gt_thetas, dtype=np.float64)
    pred = np.asarray(pred_thetas, dtype=np.float64)
    if gt.shape != pred.shape:
        raise MismatchedSets(f"{gt.size} ground-truth vs {pred.size} predicted angles")
    diff = np.abs(gt - pred)
    return float(diff.mean()), float(diff.std())


def circularity(vertices: np.ndarray) -> float:
    """4*pi*Area / Perimeter^2 of a closed polygon (1.0 for a circle)."""
    v = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
    if v.shape[0] < 3:
        raise DegeneratePolygon("polygon needs at least 3 vertices")
    nxt = np.roll(v, -1, axis=0)
    area = 0.5 * abs(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))
    perimeter = np.sum(np.hypot(*(nxt - v).T))
    if perimeter == 0.0:
        raise DegeneratePolygon("polygon has zero perimeter")
    return float(4.0 * math.pi * area / perimeter**2)


def procrustes_disparity(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of squared pointwise differences after mutual normalisation.

    Both shapes are centred, scaled to unit Frobenius norm, and the second
    is optimally rotated and uniformly scaled onto the first (rotation
    only, no reflection).  0 means the shapes are similar up to
    translation, rotation and isotropic scale.
    """
    pa = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    pb = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    if pa.shape != pb.shape or pa.shape[0] < 2:
        raise CountMismatch(f"vertex counts {pa.shape[0]} vs {pb.shape[0]}")
    pa = pa - pa.mean(axis=0)
    pb = pb - pb.mean(axis=0)
    na, nb = np.linalg.norm(pa), np.linalg.norm(pb)
    if na == 0.0 or nb == 0.0:
        raise DegeneratePolygon("shape collapses to a single point")
    pa /= na
    pb /= nb
    u, s, vt = np.linalg.svd(pb.T @ pa)
    sign = np.sign(np.linalg.det(u @ vt))
    trace = s[0] + sign * s[1]
    if trace <= 0.0:  # best non-negative scale is 0; shapes share nothing
        return 1.0
    # b aligned onto a: residual of the optimally scaled rotation
    return float(max(1.0 - trace**2, 0.0))


def _to_unit(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    return arr.astype(np.float64)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    half = window.size // 2
    out = convolve1d(img, window, axis=0, mode="nearest")
    out = convolve1d(out, window, axis=1, mode="nearest")
    return out[half:-half, half:-half]


def _ssim_terms(x: np.ndarray, y: np.ndarray, window: np.ndarray):
    c1 = _K1 * _K1
    c2 = _K2 * _K2
    mu_x = _filter_valid(x, window)
    mu_y = _filter_valid(y, window)
    sxx = np.maximum(_filter_valid(x * x, window) - mu_x * mu_x, 0.0)
    syy = np.maximum(_filter_valid(y * y, window) - mu_y * mu_y, 0.0)
    sxy = _filter_valid(x * y, window) - mu_x * mu_y
    luminance = (2.0 * mu_x * mu_y + c1) / (mu_x**2 + mu_y**2 + c1)
    cs = (2.0 * sxy + c2) / (sxx + syy + c2)
    return float(luminance.mean()), float(cs.mean())


def _downsample2(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    img = img[: h - h % 2, : w - w % 2]
    return img.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def ms_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Five-scale structural similarity in [0, 1].

    11x11 Gaussian window (sigma 1.5), dyadic 2x2 mean-pool downsampling,
    contrast-structure terms at every scale and the luminance term at the
    coarsest only.  Negative contrast-structure means are clamped to 0 so
    fractional exponents stay real.
    """
    x, y = _to_unit(a), _to_unit(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} vs {y.shape}")
    if x.ndim != 2:
        raise DimensionMismatch("ms_ssim expects single-channel images")
    need = 2 ** (MSSSIM_SCALES - 1) * _WINDOW_SIZE
    if min(x.shape) < need:
        raise TooSmallForScales(
            f"min dimension {min(x.shape)} < {need} required for "
            f"{MSSSIM_SCALES} scales")

    window = _gaussian_window(_WINDOW_SIZE, _WINDOW_SIGMA)
    result = 1.0
    luminance = 1.0
    for scale in range(MSSSIM_SCALES):
        luminance, cs = _ssim_terms(x, y, window)
        result *= max(cs, 0.0) ** MSSSIM_WEIGHTS[scale]
        if scale < MSSSIM_SCALES - 1:
            x, y = _downsample2(x), _downsample2(y)
    result *= max(luminance, 0.0) ** MSSSIM_WEIGHTS[-1]
    return float(result)


def roundtrip_mse(a: np.ndarray, b: np.ndarray,
                  footprint: np.ndarray | None = None) -> float:
    """Mean squared intensity difference on the unit scale, restricted to
    footprint pixels when a footprint is given."""
    x, y = _to_unit(a), _to_unit(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} vs {y.shape}")
    sq = (x - y) ** 2
    if footprint is None:
        return float(sq.mean())
    fp = np.asarray(footprint).astype(bool)
    if fp.shape != x.shape:
        raise DimensionMismatch(f"footprint {fp.shape} vs image {x.shape}")
    if not fp.any():
        return 0.0
    return float(sq[fp].mean())
