"""Batch command-line front door.

Subcommands: extract, linearise, invert, evaluate, synth (plus `synth
grid`), overlay.  Exit codes: 0 all good, 1 usage or configuration error,
2 batch finished with per-image failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import synth
from .errors import AnnulusScanError
from .metrics import KeypointAnnotation, keypoint_mse, maad
from .overlay import render_overlay, save_symmetry_plot
from .raster import Point, encode, load_image, to_grayscale
from .resample import LinearImage, aspect_ratio, build_fan, invert, linearise
from .sector import (KEYPOINT_NAMES, AnnulusSector, ExtractOptions,
                     extract_trace)

SCHEMA_VERSION = 1
THREADS_ENV = "ANNULUS_SCAN_THREADS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors map to exit code 1
        raise _UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Validated batch configuration echoed into every output file."""

    seed: int = 7
    ransac_threshold: float = 2.0
    ransac_iters: int = 1000
    interp: str = "spline"
    downsample: float = 1.0
    closing: bool = False
    out_dir: Path = Path(".")
    save_mask: bool = False
    save_symmetry_plot: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.interp not in ("spline", "bilinear"):
            raise _UsageError(f"unknown interpolation mode {self.interp!r}")
        if self.ransac_iters < 1 or self.ransac_threshold <= 0:
            raise _UsageError("RANSAC parameters must be positive")
        if not 0.0 < self.downsample <= 4.0:
            raise _UsageError("downsample factor must be in (0, 4]")

    def extract_options(self) -> ExtractOptions:
        return ExtractOptions(seed=self.seed,
                              ransac_threshold=self.ransac_threshold,
                              ransac_iters=self.ransac_iters,
                              closing=self.closing)


# ---------------------------------------------------------------------------
# JSON schemas

def _point_dict(p: Point) -> dict:
    return {"row": float(p.row), "col": float(p.col)}


def _dict_point(d: dict) -> Point:
    return Point(float(d["row"]), float(d["col"]))


def sector_to_params(sec: AnnulusSector, image_id: str,
                     config: RunConfig | None = None) -> dict:
    params = {
        "schema_version": SCHEMA_VERSION,
        "image_id": image_id,
        "origin": _point_dict(sec.origin),
        "theta_deg": math.degrees(sec.theta),
        "r_inner": float(sec.r_inner),
        "r_outer": float(sec.r_outer),
        "axis_col": float(sec.axis_col),
        "cropped_top": bool(sec.cropped_top),
        "source_dims": [int(sec.source_dims[0]), int(sec.source_dims[1])],
        "keypoints": {name: _point_dict(sec.keypoints[name])
                      for name in KEYPOINT_NAMES},
        "config": None if config is None else {
            "seed": config.seed,
            "ransac_threshold": config.ransac_threshold,
            "ransac_iters": config.ransac_iters,
            "interp": config.interp,
            "downsample": config.downsample,
        },
    }
    return params


def params_to_sector(params: dict) -> AnnulusSector:
    keypoints = {name: _dict_point(params["keypoints"][name])
                 for name in KEYPOINT_NAMES}
    return AnnulusSector(
        origin=_dict_point(params["origin"]),
        theta=math.radians(float(params["theta_deg"])),
        r_inner=float(params["r_inner"]),
        r_outer=float(params["r_outer"]),
        axis_col=float(params["axis_col"]),
        keypoints=keypoints,
        source_dims=(int(params["source_dims"][0]), int(params["source_dims"][1])),
        cropped_top=bool(params["cropped_top"]),
    )


def dump_json(obj, path: Path) -> None:
    """Atomic write (temp file + rename) with stable key order."""
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_png(img: np.ndarray, path: Path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".png.tmp")
    os.close(fd)
    try:
        encode(img, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _maybe_gray(img: np.ndarray) -> np.ndarray:
    """Collapse channel-replicated RGB back to a single channel."""
    if img.ndim == 3 and (img[..., 0] == img[..., 1]).all() \
            and (img[..., 0] == img[..., 2]).all():
        return img[..., 0]
    return img


# ---------------------------------------------------------------------------
# subcommands

def cmd_extract(inputs: list[Path], config: RunConfig) -> int:
    missing = [str(p) for p in inputs if not p.is_file()]
    if not inputs or missing:
        print(f"error: missing input files: {missing or 'none given'}",
              file=sys.stderr)
        return EXIT_USAGE
    config.out_dir.mkdir(parents=True, exist_ok=True)
    opts = config.extract_options()

    def work(path: Path):
        img = load_image(path)
        trace = extract_trace(img, opts)
        return img, trace

    results = []
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        futures = [(path, pool.submit(work, path)) for path in inputs]
        for path, future in futures:
            image_id = path.stem
            entry = {"input": str(path), "image_id": image_id,
                     "status": "ok", "error_code": None, "params_file": None}
            try:
                img, trace = future.result()
            except AnnulusScanError as exc:
                entry["status"] = "error"
                entry["error_code"] = type(exc).__name__
                results.append(entry)
                print(f"{image_id}: {type(exc).__name__}: {exc}", file=sys.stderr)
                continue
            params_path = config.out_dir / f"{image_id}.sector.json"
            dump_json(sector_to_params(trace.sector, image_id, config), params_path)
            entry["params_file"] = str(params_path)
            if config.save_mask:
                write_png(trace.plane * 255, config.out_dir / f"{image_id}.mask.png")
            if config.save_symmetry_plot:
                save_symmetry_plot(trace, config.out_dir / f"{image_id}.symmetry.png")
            results.append(entry)
            print(f"{image_id}: ok")

    failed = sum(1 for r in results if r["status"] == "error")
    summary = {"schema_version": SCHEMA_VERSION, "results": results,
               "ok": len(results) - failed, "failed": failed}
    dump_json(summary, config.out_dir / "summary.json")
    return EXIT_OK if failed == 0 else EXIT_PARTIAL


def _resolve_resample_config(params: dict, interp: str | None,
                             downsample: float | None) -> tuple[str, float]:
    echo = params.get("config") or {}
    interp = interp if interp is not None else echo.get("interp", "spline")
    if downsample is None:
        downsample = float(echo.get("downsample", 1.0))
    if interp not in ("spline", "bilinear"):
        raise _UsageError(f"unknown interpolation mode {interp!r}")
    return interp, downsample


def cmd_linearise(in_path: Path, params_path: Path, out_path: Path,
                  interp: str | None, downsample: float | None) -> int:
    params = load_json(params_path)
    interp, downsample = _resolve_resample_config(params, interp, downsample)
    sec = params_to_sector(params)
    img = _maybe_gray(load_image(in_path))
    lin = linearise(img, sec, interp=interp, downsample=downsample)
    write_png(lin.pixels, out_path)
    return EXIT_OK


def cmd_invert(in_path: Path, params_path: Path, out_path: Path,
               interp: str | None, downsample: float | None) -> int:
    params = load_json(params_path)
    interp, downsample = _resolve_resample_config(params, interp, downsample)
    sec = params_to_sector(params)
    pixels = _maybe_gray(load_image(in_path))
    fan = build_fan(sec, downsample)
    if pixels.shape[:2] != (fan.samples_per_ray, fan.n_rays):
        print(f"error: linear image is {pixels.shape[:2]}, expected "
              f"{(fan.samples_per_ray, fan.n_rays)} for these parameters",
              file=sys.stderr)
        return EXIT_USAGE
    lin = LinearImage(pixels=pixels, sector=sec, ratio=aspect_ratio(sec),
                      n_rays=fan.n_rays, samples_per_ray=fan.samples_per_ray,
                      step=fan.step, interp=interp)
    write_png(invert(lin), out_path)
    return EXIT_OK


def _load_annotations(path: Path) -> tuple[list[KeypointAnnotation], dict[str, float]]:
    if path.is_dir():
        records = [load_json(p) for p in sorted(path.glob("*.sector.json"))]
    else:
        payload = load_json(path)
        records = payload["images"] if isinstance(payload, dict) else payload
    annotations = []
    thetas = {}
    for rec in records:
        points = {name: _dict_point(rec["keypoints"][name])
                  for name in KEYPOINT_NAMES}
        annotations.append(KeypointAnnotation(rec["image_id"], points))
        thetas[rec["image_id"]] = float(rec["theta_deg"])
    return annotations, thetas


def cmd_evaluate(pred_path: Path, gt_path: Path, out_path: Path) -> int:
    gt, gt_thetas = _load_annotations(gt_path)
    pred, pred_thetas = _load_annotations(pred_path)
    per_kp = keypoint_mse(gt, pred)
    ids = [a.image_id for a in gt]
    maad_mean, maad_std = maad([gt_thetas[i] for i in ids],
                               [pred_thetas[i] for i in ids])
    report = {
        "schema_version": SCHEMA_VERSION,
        "n_images": len(gt),
        "per_keypoint_mse": per_kp,
        "maad_deg": {"mean": maad_mean, "std": maad_std},
        "circularity_pair": None,
        "procrustes_disparity": None,
        "ms_ssim": None,
        "roundtrip_mse": None,
    }
    dump_json(report, out_path)
    return EXIT_OK


def _spec_from_json(payload: dict) -> synth.SectorSpec:
    return synth.SectorSpec(
        origin=_dict_point(payload["origin"]),
        theta=math.radians(float(payload["theta_deg"])),
        r_inner=float(payload["r_inner"]),
        r_outer=float(payload["r_outer"]),
        canvas=(int(payload["canvas"][0]), int(payload["canvas"][1])),
        texture=payload.get("texture", "radial"),
        texture_seed=int(payload.get("texture_seed", 0)),
        background_level=int(payload.get("background_level", 0)),
        level_lo=int(payload.get("level_lo", 40)),
        level_hi=int(payload.get("level_hi", 220)),
        feather=bool(payload.get("feather", False)),
    )


def cmd_synth(spec_path: Path, out_path: Path, truth_path: Path | None) -> int:
    img, truth = synth.render(_spec_from_json(load_json(spec_path)))
    write_png(img, out_path)
    if truth_path is not None:
        dump_json(sector_to_params(truth, Path(out_path).stem), truth_path)
    return EXIT_OK


def cmd_synth_grid(out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, spec in enumerate(synth.clean_grid()):
        img, truth = synth.render(spec)
        name = f"grid_{i:03d}"
        write_png(img, out_dir / f"{name}.png")
        dump_json(sector_to_params(truth, name), out_dir / f"{name}.truth.json")
    print(f"wrote {i + 1} grid cases to {out_dir}")
    return EXIT_OK


def cmd_overlay(in_path: Path, out_path: Path, config: RunConfig) -> int:
    img = load_image(in_path)
    trace = extract_trace(img, config.extract_options())
    write_png(render_overlay(img, trace), out_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise _UsageError(f"{THREADS_ENV} must be an integer: {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--ransac-threshold", type=float, default=2.0)
    parser.add_argument("--ransac-iters", type=int, default=1000)
    parser.add_argument("--interp", choices=("spline", "bilinear"),
                        default="spline")
    parser.add_argument("--downsample", type=float, default=1.0)
    parser.add_argument("--closing", action="store_true",
                        help="3x3 morphological closing of the plane mask")


def _config_from_args(args) -> RunConfig:
    return RunConfig(seed=args.seed, ransac_threshold=args.ransac_threshold,
                     ransac_iters=args.ransac_iters, interp=args.interp,
                     downsample=args.downsample, closing=args.closing,
                     out_dir=Path(getattr(args, "out_dir", ".")),
                     save_mask=getattr(args, "save_mask", False),
                     save_symmetry_plot=getattr(args, "save_symmetry_plot", False),
                     threads=_default_threads())


def build_parser() -> _Parser:
    parser = _Parser(prog="annulus-scan",
                     description="Convex ultrasound plane extraction, "
                                 "linearisation and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="estimate sector geometry per image")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--save-mask", action="store_true")
    p.add_argument("--save-symmetry-plot", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("linearise", help="resample scan lines into columns")
    p.add_argument("--in", dest="in_path", type=Path, required=True)
    p.add_argument("--params", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--interp", choices=("spline", "bilinear"), default=None)
    p.add_argument("--downsample", type=float, default=None)

    p = sub.add_parser("invert", help="re-project a linear image to convex")
    p.add_argument("--in", dest="in_path", type=Path, required=True)
    p.add_argument("--params", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--interp", choices=("spline", "bilinear"), default=None)
    p.add_argument("--downsample", type=float, default=None)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gt", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("synth", help="render a synthetic sector")
    p.add_argument("--spec", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--truth", type=Path, default=None)

    p = sub.add_parser("grid", help=argparse.SUPPRESS)  # via `synth grid`
    p.add_argument("--out", dest="out_dir", type=Path, required=True)

    p = sub.add_parser("overlay", help="draw the extraction debug overlay")
    p.add_argument("--in", dest="in_path", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["synth"] and argv[1:2] == ["grid"]:
        argv = argv[1:]  # `synth grid --out dir` -> hidden grid subcommand
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "extract":
            return cmd_extract(args.inputs, _config_from_args(args))
        if args.command == "linearise":
            return cmd_linearise(args.in_path, args.params, args.out,
                                 args.interp, args.downsample)
        if args.command == "invert":
            return cmd_invert(args.in_path, args.params, args.out,
                              args.interp, args.downsample)
        if args.command == "evaluate":
            return cmd_evaluate(args.pred, args.gt, args.out)
        if args.command == "synth":
            if args.spec is None or args.out is None:
                raise _UsageError("synth requires --spec and --out")
            return cmd_synth(args.spec, args.out, args.truth)
        if args.command == "grid":
            return cmd_synth_grid(args.out_dir)
        if args.command == "overlay":
            return cmd_overlay(args.in_path, args.out, _config_from_args(args))
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AnnulusScanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())
