"""Image representation and codecs.

Rasters are plain numpy arrays indexed [row, col] with the origin at the
top-left corner: row grows downward, col grows rightward.  An RGB image is
uint8 of shape (h, w, 3), a grayscale image uint8 (h, w), and a binary mask
uint8 (h, w) with values in {0, 1}.  All arrays are treated as immutable
once produced.
"""

from __future__ import annotations

import io
import os
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IoFailure, MalformedFile, TooSmall

# BT.601 luma weights; applied in R, G, B order.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class Point(NamedTuple):
    """Subpixel image location.  May lie outside the canvas (sector origins
    usually do)."""

    row: float
    col: float


def decode(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG/BMP bytes into an RGB raster.

    Grayscale and palette sources are replicated across three channels.
    Raises MalformedFile for undecodable bytes, TooSmall when either
    dimension is < 2.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedFile(f"cannot decode image: {exc}") from exc
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise TooSmall(f"image is {arr.shape[0]}x{arr.shape[1]}; need at least 2x2")
    return arr


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read and decode an image file."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return decode(data)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Fixed-weight luma conversion, rounded half-up and clamped to [0, 255].

    Gray-replicated inputs pass through unchanged.
    """
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.uint8, copy=False)
    r, g, b = (img[..., k].astype(np.float64) for k in range(3))
    y = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def replicate(gray: np.ndarray) -> np.ndarray:
    """Stack a grayscale raster into three identical channels."""
    gray = np.asarray(gray, dtype=np.uint8)
    return np.repeat(gray[..., None], 3, axis=2)


def encode(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write a raster as lossless PNG; decode(encode(x)) == x on pixels."""
    arr = np.ascontiguousarray(np.asarray(img, dtype=np.uint8))
    mode = "L" if arr.ndim == 2 else "RGB"
    try:
        Image.fromarray(arr, mode=mode).save(os.fspath(path), format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
