"""Turn a predicted anchor map into head detections.

Pipeline: threshold away noise, keep local maxima (ties broken toward the
lexicographically smallest pixel), enforce a minimum Euclidean separation
greedily by descending score, then size a square box per detection from
the mean distance to its nearest detected neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import maximum_filter

from .errors import NonPositiveInputError
from .geometry import as_point_array
from .kernels import GeoParams


@dataclass(frozen=True)
class PostprocessParams:
    threshold: float
    nms_radius: float = 3.0
    box_scale: float = 2.0

    def __post_init__(self) -> None:
        if self.threshold < 0.0:
            raise ValueError("threshold must be non-negative")
        if self.nms_radius <= 0.0:
            raise NonPositiveInputError("nms_radius must be positive")
        if self.box_scale <= 0.0:
            raise NonPositiveInputError("box_scale must be positive")


@dataclass(frozen=True)
class Detection:
    """Head anchor with its map score and, once estimated, a bounding box."""

    x: float
    y: float
    score: float
    box: tuple[float, float, float, float] | None = None  # x, y, w, h (top-left)


def extract_anchors(values, params: PostprocessParams) -> list[Detection]:
    """Thresholded, non-maximum-suppressed peaks of a map, best first.

    A pixel qualifies when its value is positive, at least the threshold,
    and maximal over its (2r+1)^2 neighborhood with r = ceil(nms_radius);
    equal-valued neighbors concede to the lowest (row, col).  Surviving
    peaks then pass a greedy Euclidean pass so no two anchors lie within
    nms_radius of each other.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
    r = int(np.ceil(params.nms_radius))
    h, w = arr.shape
    win = maximum_filter(arr, size=2 * r + 1, mode="constant", cval=-np.inf)
    rows, cols = np.nonzero((arr > 0.0) & (arr >= params.threshold) & (arr == win))
    peaks: list[tuple[int, int, float]] = []
    for row, col in zip(rows.tolist(), cols.tolist()):
        v = arr[row, col]
        r0, c0 = max(0, row - r), max(0, col - r)
        block = arr[r0 : row + r + 1, c0 : col + r + 1]
        tr, tc = np.nonzero(block == v)
        tr = tr + r0
        tc = tc + c0
        if np.any((tr < row) | ((tr == row) & (tc < col))):
            continue  # an equal-valued neighbor wins the tie
        peaks.append((row, col, float(v)))
    peaks.sort(key=lambda p: (-p[2], p[0], p[1]))
    kept: list[tuple[int, int, float]] = []
    min_d2 = params.nms_radius * params.nms_radius
    for row, col, v in peaks:
        if all((row - kr) ** 2 + (col - kc) ** 2 >= min_d2 for kr, kc, _ in kept):
            kept.append((row, col, v))
    return [Detection(x=float(c), y=float(r_), score=v) for r_, c, v in kept]


def estimate_boxes(
    detections: list[Detection],
    anchor_points,
    geo: GeoParams | None = None,
    box_scale: float = 2.0,
) -> list[Detection]:
    """Square box per detection, side = box_scale * beta * mean-kNN-distance.

    Distances are measured within `anchor_points` (normally the detected
    anchors themselves), excluding the detection's own point.  With no
    neighbors available the side falls back to box_scale * fallback_sigma.
    Boxes are centered on their anchors.  Returns new Detection objects.
    """
    geo = geo or GeoParams()
    if box_scale <= 0.0:
        raise NonPositiveInputError("box_scale must be positive")
    pts = as_point_array(anchor_points)
    out = []
    for det in detections:
        d = np.sqrt((pts[:, 0] - det.x) ** 2 + (pts[:, 1] - det.y) ** 2)
        d = np.sort(d)
        if len(d) and d[0] <= 1e-9:
            d = d[1:]  # the detection itself
        if len(d) == 0:
            sigma = geo.fallback_sigma
        else:
            k = min(geo.m, len(d))
            sigma = geo.beta * float(d[:k].mean())
        side = box_scale * sigma
        box = (det.x - side / 2.0, det.y - side / 2.0, side, side)
        out.append(replace(det, box=box))
    return out


def count_from_map(values) -> float:
    """Estimated head count: the total mass of the map."""
    return float(np.asarray(values, dtype=np.float64).sum())
