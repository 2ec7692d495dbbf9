"""Synthetic convex-plane renderer with exact ground truth.

Renders annulus sectors with pixel-centre inclusion testing (crisp binary
masks), several foreground textures, and deterministic corruption
operators modelling what public ultrasound exports suffer from: GUI
burn-in, cropped tops, sensor noise and contact shadows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CorruptionTooSevere, SpecOutOfCanvas
from .raster import Point
from .sector import AnnulusSector, footprint_mask, sector_keypoints

TEXTURES = ("constant", "radial", "angular", "speckle")

# radial extent of a contact shadow, as a fraction of (r_outer - r_inner);
# shadows start at the probe face and fade before full depth
NOTCH_DEPTH_FRACTION = 0.45


@dataclass(frozen=True)
class SectorSpec:
    """Parameters of one synthetic sector."""

    origin: Point
    theta: float  # radians
    r_inner: float
    r_outer: float
    canvas: tuple[int, int]
    texture: str = "radial"
    texture_seed: int = 0
    background_level: int = 0
    level_lo: int = 40
    level_hi: int = 220
    feather: bool = False


@dataclass(frozen=True)
class GuiBox:
    """Burned-in interface rectangle; striped boxes mimic text rows."""

    top: int
    left: int
    height: int
    width: int
    intensity: int = 200
    striped: bool = True


@dataclass(frozen=True)
class CorruptionSpec:
    """Deterministic degradations applied to a rendered sector.

    shadow_notches are (angle, width) pairs: an angular wedge centred at
    `angle` radians from the downward axis, `width` pixels wide at the
    outer arc, blanked over the near-field radial band.
    """

    crop_top_rows: int = 0
    gui_boxes: tuple[GuiBox, ...] = ()
    noise_sigma: float = 0.0
    shadow_notches: tuple[tuple[float, float], ...] = ()

    def is_empty(self) -> bool:
        return (self.crop_top_rows == 0 and not self.gui_boxes
                and self.noise_sigma == 0.0 and not self.shadow_notches)


def _truth_from_spec(spec: SectorSpec) -> AnnulusSector:
    keypoints = sector_keypoints(spec.origin, spec.theta, spec.r_inner,
                                 spec.r_outer)
    return AnnulusSector(origin=spec.origin, theta=spec.theta,
                         r_inner=spec.r_inner, r_outer=spec.r_outer,
                         axis_col=spec.origin.col, keypoints=keypoints,
                         source_dims=spec.canvas, cropped_top=False)


def _texture_values(spec: SectorSpec, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    lo, hi = float(spec.level_lo), float(spec.level_hi)
    if spec.texture == "constant":
        return np.full(r.shape, (lo + hi) / 2.0)
    if spec.texture == "radial":
        t = (r - spec.r_inner) / (spec.r_outer - spec.r_inner)
        return lo + (hi - lo) * np.clip(t, 0.0, 1.0)
    if spec.texture == "angular":
        t = (phi + spec.theta / 2.0) / spec.theta
        return lo + (hi - lo) * np.clip(t, 0.0, 1.0)
    if spec.texture == "speckle":
        rng = np.random.default_rng(spec.texture_seed)
        noise = rng.random(r.shape)
        kernel = np.exp(-0.5 * (np.arange(-4, 5) / 2.0) ** 2)
        kernel /= kernel.sum()
        for axis in (0, 1):
            noise = np.apply_along_axis(
                lambda v: np.convolve(np.pad(v, 4, mode="edge"), kernel,
                                      mode="valid"), axis, noise)
        span = noise.max() - noise.min()
        t = (noise - noise.min()) / (span if span > 0 else 1.0)
        return lo + (hi - lo) * t
    raise ValueError(f"texture must be one of {TEXTURES}")


def render(spec: SectorSpec) -> tuple[np.ndarray, AnnulusSector]:
    """Rasterise a sector; returns the grayscale image and exact truth."""
    h, w = spec.canvas
    if not 0.0 < spec.theta < math.pi:
        raise SpecOutOfCanvas(f"aperture {math.degrees(spec.theta):.1f} deg invalid")
    if not 0.0 <= spec.r_inner < spec.r_outer:
        raise SpecOutOfCanvas("radii must satisfy 0 <= r_inner < r_outer")
    arc_mid_row = spec.origin.row + spec.r_outer
    if not (0.0 <= arc_mid_row <= h - 1 and 0.0 <= spec.origin.col <= w - 1):
        raise SpecOutOfCanvas("outer arc midpoint falls outside the canvas")

    truth = _truth_from_spec(spec)
    rows = np.arange(h, dtype=np.float64)[:, None]
    cols = np.arange(w, dtype=np.float64)[None, :]
    dr = rows - spec.origin.row
    dc = cols - spec.origin.col
    r = np.hypot(dr, dc)
    phi = np.arctan2(dc, dr)

    values = _texture_values(spec, r, phi)
    img = np.full((h, w), float(spec.background_level))
    if spec.feather:
        half = spec.theta / 2.0
        dist = np.minimum(np.minimum(r - spec.r_inner, spec.r_outer - r),
                          (half - np.abs(phi)) * np.maximum(r, 1e-9))
        alpha = np.clip(dist + 0.5, 0.0, 1.0)
        img = img * (1.0 - alpha) + values * alpha
    else:
        inside = footprint_mask(truth, spec.canvas).astype(bool)
        img[inside] = values[inside]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), truth


def corrupt(img: np.ndarray, truth: AnnulusSector, spec: CorruptionSpec,
            seed: int = 0) -> tuple[np.ndarray, AnnulusSector]:
    """Apply a corruption spec; returns the new image and adjusted truth.

    Cropping shifts every keypoint; keypoints pushed above the canvas are
    clamped to row 0 along their own geometry, and cropped_top is set when
    the inner arc itself is removed.  Raises CorruptionTooSevere when more
    than 40% of sector pixels would be relabelled.
    """
    out = np.asarray(img, dtype=np.float64).copy()
    h, w = out.shape
    fp = footprint_mask(truth, (h, w)).astype(bool)
    sector_px = int(fp.sum())
    relabelled = 0

    if spec.shadow_notches:
        rows = np.arange(h, dtype=np.float64)[:, None]
        cols = np.arange(w, dtype=np.float64)[None, :]
        dr = rows - truth.origin.row
        dc = cols - truth.origin.col
        r = np.hypot(dr, dc)
        phi = np.arctan2(dc, dr)
        band_hi = truth.r_inner + NOTCH_DEPTH_FRACTION * (truth.r_outer - truth.r_inner)
        for angle, width in spec.shadow_notches:
            delta = (width / 2.0) / truth.r_outer
            wedge = (np.abs(phi - angle) <= delta) & (r >= truth.r_inner) \
                & (r <= band_hi)
            relabelled += int((wedge & fp).sum())
            out[wedge] = 0.0

    for box in spec.gui_boxes:
        sl = (slice(box.top, box.top + box.height),
              slice(box.left, box.left + box.width))
        relabelled += int(fp[sl].sum())
        patch = np.full((box.height, box.width), float(box.intensity))
        if box.striped:
            rows_in = np.arange(box.height)[:, None]
            patch[rows_in[:, 0] % 4 >= 2, :] = box.intensity / 3.0
        out[sl] = patch[: out[sl].shape[0], : out[sl].shape[1]]

    k = spec.crop_top_rows
    new_truth = truth
    if k > 0:
        if k >= h - 1:
            raise CorruptionTooSevere(f"crop of {k} rows leaves no image")
        relabelled += int(fp[:k].sum())
        out = out[k:, :]
        new_truth = _shift_truth(truth, k, (h - k, w))

    if relabelled > 0.4 * sector_px:
        raise CorruptionTooSevere(
            f"{relabelled} of {sector_px} sector pixels relabelled (>40%)")

    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        out = out + rng.normal(0.0, spec.noise_sigma, out.shape)

    return np.clip(np.rint(out), 0, 255).astype(np.uint8), new_truth


def _shift_truth(truth: AnnulusSector, k: int, dims: tuple[int, int]) -> AnnulusSector:
    o = Point(truth.origin.row - k, truth.origin.col)
    half = truth.theta / 2.0
    moved = {name: Point(p.row - k, p.col) for name, p in truth.keypoints.items()}
    moved["origin"] = o

    cropped_top = moved["arc_inner"].row < 0.0
    r_inner = truth.r_inner
    if cropped_top:
        moved["arc_inner"] = Point(0.0, o.col)
        r_inner = -o.row
    for name, side in (("legs_l_top", -1.0), ("legs_r_top", 1.0)):
        if moved[name].row < 0.0:
            moved[name] = Point(0.0, o.col + side * (-o.row) * math.tan(half))
    if moved["arc_outer"].row <= 0.0:
        raise CorruptionTooSevere("crop removes the outer arc")

    return AnnulusSector(origin=o, theta=truth.theta, r_inner=r_inner,
                         r_outer=truth.r_outer, axis_col=o.col,
                         keypoints=moved, source_dims=dims,
                         cropped_top=cropped_top)


# ---------------------------------------------------------------------------
# standard verification grids

GRID_THETAS_DEG = (40.0, 50.0, 60.0, 70.0, 80.0)
GRID_R_INNER = (40.0, 80.0, 120.0)
_GRID_CANVASES = (((512, 512), (250.0, 350.0)),
                  ((960, 1280), (350.0, 420.0)))
_TOP_MARGIN = 12.0


def _grid_spec(theta_deg: float, r_inner: float, r_outer: float,
               canvas: tuple[int, int], texture: str, seed: int,
               background_level: int = 0, level_lo: int = 40) -> SectorSpec:
    theta = math.radians(theta_deg)
    # top corners sit _TOP_MARGIN below the canvas top; origin may be negative
    origin = Point(_TOP_MARGIN - r_inner * math.cos(theta / 2.0),
                   (canvas[1] - 1) / 2.0)
    return SectorSpec(origin=origin, theta=theta, r_inner=r_inner,
                      r_outer=r_outer, canvas=canvas, texture=texture,
                      texture_seed=seed, background_level=background_level,
                      level_lo=level_lo)


def clean_grid() -> list[SectorSpec]:
    """The 60-case clean verification grid (both canvas sizes)."""
    textures = ("radial", "speckle", "angular")
    specs = []
    for canvas, r_outers in _GRID_CANVASES:
        for theta_deg in GRID_THETAS_DEG:
            for r_inner in GRID_R_INNER:
                for r_outer in r_outers:
                    i = len(specs)
                    specs.append(_grid_spec(theta_deg, r_inner, r_outer,
                                            canvas, textures[i % 3], i))
    return specs


def corrupted_grid() -> list[tuple[SectorSpec, CorruptionSpec]]:
    """30 corrupted cases: cropped inner arc, GUI boxes, noise and one
    contact-shadow notch on the left leg.

    The background sits at a nonzero capture floor so the added noise
    forms a histogram spike the background detector can absorb, as real
    exports do; a floor of exactly 0 would clip half the noise into bin 0.
    """
    cases = []
    canvas = (512, 512)
    for theta_deg in GRID_THETAS_DEG:
        for r_inner in GRID_R_INNER:
            for r_outer in (250.0, 350.0):
                i = len(cases)
                spec = _grid_spec(theta_deg, r_inner, r_outer, canvas,
                                  ("radial", "speckle")[i % 2], 100 + i,
                                  background_level=15, level_lo=60)
                arc_inner_row = spec.origin.row + r_inner
                corr = CorruptionSpec(
                    crop_top_rows=int(math.ceil(arc_inner_row)) + 8,
                    gui_boxes=(GuiBox(top=440, left=8, height=56, width=88),
                               GuiBox(top=448, left=canvas[1] - 96, height=48,
                                      width=88, intensity=160, striped=False)),
                    noise_sigma=8.0,
                    shadow_notches=((-spec.theta / 2.0, 20.0),),
                )
                cases.append((spec, corr))
    return cases
