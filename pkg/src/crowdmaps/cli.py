"""Command-line pipelines over the library.

Subcommands: densmap, anchormap, postprocess, eval, voronoi.  Every knob
has a built-in default, can be set in a JSON config file (--config), and
is overridden by an explicit flag; precedence is flag > config > default.
Exit codes: 0 success, 1 validation error, 2 I/O error.  Errors go to
stderr with an "error:" prefix.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .annotations import HeadAnnotation, parse_annotation
from .errors import CrowdMapsError, MalformedInputError
from .geometry import Tessellation, voronoi_tessellate
from .io import detections_to_json, read_map, write_map, write_png
from .kernels import GeoParams, VorParams, geo_kernel_specs, voronoi_kernel_specs
from .metrics import MetricReport, mae_mse
from .metrics import psnr as psnr_metric
from .metrics import ssim as ssim_metric
from .postprocess import (
    PostprocessParams,
    count_from_map,
    estimate_boxes,
    extract_anchors,
)
from .rasterize import blend, render_anchors, render_density

_DEFAULTS = {
    "method": "blend",
    "lambda": 0.5,
    "beta": 0.3,
    "m": 3,
    "gamma": 0.8,
    "eta": 1.0,
    "k": 2,
    "fallback_sigma": 15.0,
    "sigma_anc": 2.0,
    "threshold_frac": 0.2,
    "nms_radius": 3.0,
    "box_scale": 2.0,
    "metrics": "mae,mse,psnr,ssim",
    "colormap": "viridis",
    "merge_duplicates": False,
    "format": None,
    "width": None,
    "height": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are validation errors: exit 1
        self.exit(1, f"error: {message}\n")


def _load_config(args) -> dict:
    path = getattr(args, "config", None)
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedInputError(f"config {path}: must be a JSON object")
    return obj


def _opt(args, config: dict, key: str):
    """Resolve one option: CLI flag > config file > built-in default."""
    dest = "blend_lambda" if key == "lambda" else key
    val = getattr(args, dest, None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return _DEFAULTS[key]


def _load_annotation(args, config: dict) -> HeadAnnotation:
    path = Path(args.annotations)
    fmt = _opt(args, config, "format")
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    width = _opt(args, config, "width")
    height = _opt(args, config, "height")
    return parse_annotation(
        path.read_bytes(),
        fmt=fmt,
        width=None if width is None else int(width),
        height=None if height is None else int(height),
        merge_duplicates=bool(_opt(args, config, "merge_duplicates")),
    )


def _geo_params(args, config: dict) -> GeoParams:
    return GeoParams(
        beta=float(_opt(args, config, "beta")),
        m=int(_opt(args, config, "m")),
        fallback_sigma=float(_opt(args, config, "fallback_sigma")),
    )


def _cmd_densmap(args) -> int:
    config = _load_config(args)
    ann = _load_annotation(args, config)
    method = _opt(args, config, "method")
    if method not in ("geo", "voronoi", "blend"):
        raise MalformedInputError(f"unknown method {method!r}")
    geo = _geo_params(args, config)
    vor = VorParams(
        gamma=float(_opt(args, config, "gamma")),
        eta=float(_opt(args, config, "eta")),
        k=int(_opt(args, config, "k")),
    )
    lam = float(_opt(args, config, "lambda"))
    if len(ann) == 0:
        density = np.zeros((ann.rect.height, ann.rect.width))
    elif method == "geo":
        density = render_density(geo_kernel_specs(ann, geo), ann.rect)
    elif method == "voronoi":
        tess = voronoi_tessellate(ann.points, ann.rect)
        density = render_density(voronoi_kernel_specs(ann, tess, vor, geo), ann.rect)
    else:
        geo_map = render_density(geo_kernel_specs(ann, geo), ann.rect)
        tess = voronoi_tessellate(ann.points, ann.rect)
        vor_map = render_density(voronoi_kernel_specs(ann, tess, vor, geo), ann.rect)
        density = blend(geo_map, vor_map, lam)
    write_map(args.out, density)
    if args.png:
        write_png(args.png, density, colormap=_opt(args, config, "colormap"))
    return 0


def _cmd_anchormap(args) -> int:
    config = _load_config(args)
    ann = _load_annotation(args, config)
    sigma_anc = float(_opt(args, config, "sigma_anc"))
    if len(ann) == 0:
        anchor = np.zeros((ann.rect.height, ann.rect.width))
    else:
        anchor = render_anchors(ann, sigma_anc=sigma_anc)
    write_map(args.out, anchor)
    if args.png:
        write_png(args.png, anchor, colormap=_opt(args, config, "colormap"))
    return 0


def _cmd_postprocess(args) -> int:
    config = _load_config(args)
    arr = read_map(args.map).astype(np.float64)
    frac = float(_opt(args, config, "threshold_frac"))
    if not 0.0 <= frac <= 1.0:
        raise MalformedInputError(f"threshold-frac must be in [0, 1], got {frac}")
    box_scale = float(_opt(args, config, "box_scale"))
    params = PostprocessParams(
        threshold=frac * float(arr.max()) if arr.size else 0.0,
        nms_radius=float(_opt(args, config, "nms_radius")),
        box_scale=box_scale,
    )
    dets = extract_anchors(arr, params)
    dets = estimate_boxes(
        dets, [(d.x, d.y) for d in dets], _geo_params(args, config), box_scale
    )
    Path(args.out).write_text(detections_to_json(dets) + "\n")
    return 0


def _cmd_eval(args) -> int:
    config = _load_config(args)
    wanted = [m.strip() for m in str(_opt(args, config, "metrics")).split(",") if m.strip()]
    unknown = set(wanted) - {"mae", "mse", "psnr", "ssim"}
    if unknown:
        raise MalformedInputError(f"unknown metrics: {', '.join(sorted(unknown))}")
    pred_dir, gt_dir = Path(args.pred_dir), Path(args.gt_dir)
    preds = {p.name: p for p in pred_dir.glob("*.dmap")}
    gts = {p.name: p for p in gt_dir.glob("*.dmap")}
    missing_gt = sorted(set(preds) - set(gts))
    missing_pred = sorted(set(gts) - set(preds))
    if missing_gt or missing_pred:
        raise MalformedInputError(
            "unmatched files: "
            + ", ".join(
                [f"{n} (no ground truth)" for n in missing_gt]
                + [f"{n} (no prediction)" for n in missing_pred]
            )
        )
    est_counts, gt_counts, psnrs, ssims = [], [], [], []
    for name in sorted(preds):
        pred = read_map(preds[name]).astype(np.float64)
        gt = read_map(gts[name]).astype(np.float64)
        est_counts.append(count_from_map(pred))
        gt_counts.append(count_from_map(gt))
        if "psnr" in wanted:
            psnrs.append(psnr_metric(pred, gt))
        if "ssim" in wanted:
            ssims.append(ssim_metric(pred, gt))
    mae, mse = mae_mse(est_counts, gt_counts)
    report = MetricReport(
        mae=mae,
        mse=mse,
        n=len(est_counts),
        psnr=(math.inf if math.inf in psnrs else float(np.mean(psnrs))) if psnrs else None,
        ssim=float(np.mean(ssims)) if ssims else None,
    )
    Path(args.out).write_text(report.to_json() + "\n")
    return 0


def _draw_tessellation(tess: Tessellation) -> np.ndarray:
    """Cell edges and seed dots rasterized for a quick visual check."""
    canvas = np.zeros((tess.rect.height, tess.rect.width))
    h, w = canvas.shape
    for cell in tess.cells:
        verts = cell.vertices
        nxt = np.roll(verts, -1, axis=0)
        for (x0, y0), (x1, y1) in zip(verts, nxt):
            steps = max(2, int(2 * np.hypot(x1 - x0, y1 - y0)))
            xs = np.clip(np.rint(np.linspace(x0, x1, steps)), 0, w - 1).astype(int)
            ys = np.clip(np.rint(np.linspace(y0, y1, steps)), 0, h - 1).astype(int)
            canvas[ys, xs] = 0.5
    return canvas


def _cmd_voronoi(args) -> int:
    config = _load_config(args)
    ann = _load_annotation(args, config)
    tess = voronoi_tessellate(ann.points, ann.rect)
    cells = [
        {
            "seed_index": cell.seed_index,
            "seed": [float(ann.points[cell.seed_index, 0]), float(ann.points[cell.seed_index, 1])],
            "vertices": [[float(x), float(y)] for x, y in cell.vertices],
        }
        for cell in tess.cells
    ]
    doc = {"width": ann.rect.width, "height": ann.rect.height, "cells": cells}
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    if args.png:
        canvas = _draw_tessellation(tess)
        h, w = canvas.shape
        for x, y in ann.points:
            canvas[min(int(round(y)), h - 1), min(int(round(x)), w - 1)] = 1.0
        write_png(args.png, canvas, colormap="gray", normalize=True)
    return 0


def _add_annotation_flags(sub) -> None:
    sub.add_argument("--annotations", required=True, help="annotation file (JSON or CSV)")
    sub.add_argument("--format", choices=["json", "csv"], default=None,
                     help="annotation format (default: by file extension)")
    sub.add_argument("--width", type=int, default=None, help="image width for CSV input")
    sub.add_argument("--height", type=int, default=None, help="image height for CSV input")
    sub.add_argument("--merge-duplicates", action="store_true", default=None,
                     help="merge points closer than 0.5 px instead of rejecting")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crowdmaps", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("densmap", help="ground-truth density map from an annotation")
    _add_annotation_flags(p)
    p.add_argument("--method", choices=["geo", "voronoi", "blend"], default=None)
    p.add_argument("--lambda", dest="blend_lambda", type=float, default=None,
                   help="blend weight of the voronoi map (default 0.5)")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--fallback-sigma", type=float, default=None)
    p.add_argument("--out", required=True, help="output .dmap path")
    p.add_argument("--png", default=None, help="also write a PNG rendering")
    p.add_argument("--colormap", choices=["gray", "viridis"], default=None)
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=_cmd_densmap)

    p = sub.add_parser("anchormap", help="sparse anchor ground truth")
    _add_annotation_flags(p)
    p.add_argument("--sigma-anc", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--png", default=None)
    p.add_argument("--colormap", choices=["gray", "viridis"], default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_anchormap)

    p = sub.add_parser("postprocess", help="detections from a predicted anchor map")
    p.add_argument("--map", required=True, help="input .dmap path")
    p.add_argument("--threshold-frac", type=float, default=None,
                   help="threshold as a fraction of the map maximum (default 0.2)")
    p.add_argument("--nms-radius", type=float, default=None)
    p.add_argument("--box-scale", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--fallback-sigma", type=float, default=None)
    p.add_argument("--out", required=True, help="output detections JSON")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_postprocess)

    p = sub.add_parser("eval", help="score predicted maps against ground truth")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--metrics", default=None, help="comma list of mae,mse,psnr,ssim")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("voronoi", help="dump the tessellation for debugging")
    _add_annotation_flags(p)
    p.add_argument("--out", required=True, help="output cells JSON")
    p.add_argument("--png", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_voronoi)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CrowdMapsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
