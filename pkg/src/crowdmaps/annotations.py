"""Head-point annotations and their ingestion from JSON or CSV."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DuplicatePointError,
    MalformedInputError,
    PointOutOfBoundsError,
)
from .geometry import ImageRect, as_point_array, find_duplicate


@dataclass(frozen=True, eq=False)
class HeadAnnotation:
    """Per-image head points plus the image extent they live in.

    Construction validates the invariants: finite coordinates, every point
    within the half-open bounds [0, width) x [0, height), and no exact
    duplicates.
    """

    rect: ImageRect
    points: np.ndarray  # (N, 2) float64, columns x, y

    def __post_init__(self) -> None:
        pts = as_point_array(self.points)
        object.__setattr__(self, "points", pts)
        oob = (
            (pts[:, 0] < 0.0)
            | (pts[:, 0] >= self.rect.width)
            | (pts[:, 1] < 0.0)
            | (pts[:, 1] >= self.rect.height)
        )
        if oob.any():
            i = int(np.flatnonzero(oob)[0])
            raise PointOutOfBoundsError(
                f"point {i} at ({pts[i, 0]:g}, {pts[i, 1]:g}) outside "
                f"[0, {self.rect.width}) x [0, {self.rect.height})"
            )
        dup = find_duplicate(pts)
        if dup is not None:
            raise DuplicatePointError(
                f"points {dup[0]} and {dup[1]} are exact duplicates "
                "(use merge_duplicates to pre-merge)"
            )

    def __len__(self) -> int:
        return len(self.points)


def merge_close_points(points, radius: float = 0.5) -> np.ndarray:
    """Greedy duplicate merge: drop points within `radius` of an earlier one."""
    pts = as_point_array(points)
    if len(pts) < 2:
        return pts.copy()
    kept: list[int] = [0]
    for i in range(1, len(pts)):
        d2 = ((pts[kept] - pts[i]) ** 2).sum(axis=1)
        if d2.min() > radius * radius:
            kept.append(i)
    return pts[kept].copy()


def _parse_json(text: str) -> tuple[ImageRect, list]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedInputError("annotation JSON must be an object")
    for key in ("width", "height", "points"):
        if key not in obj:
            raise MalformedInputError(f"annotation JSON missing {key!r}")
    w, h = obj["width"], obj["height"]
    if not isinstance(w, int) or not isinstance(h, int):
        raise MalformedInputError("width and height must be integers")
    try:
        rect = ImageRect(w, h)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    raw = obj["points"]
    if not isinstance(raw, list):
        raise MalformedInputError("points must be a list of [x, y] pairs")
    for i, item in enumerate(raw):
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(v, (int, float)) for v in item)
        ):
            raise MalformedInputError(f"points[{i}] is not an [x, y] number pair")
    return rect, raw


def _parse_csv(text: str) -> list:
    raw = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise MalformedInputError(f"line {lineno}: expected 'x,y', got {line!r}")
        try:
            raw.append([float(fields[0]), float(fields[1])])
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: {exc}") from exc
    return raw


def parse_annotation(
    data: bytes | str,
    fmt: str = "json",
    width: int | None = None,
    height: int | None = None,
    merge_duplicates: bool = False,
    merge_radius: float = 0.5,
) -> HeadAnnotation:
    """Parse a JSON or CSV head-point annotation.

    JSON schema: {"width": int, "height": int, "points": [[x, y], ...]}.
    CSV carries one "x,y" pair per line; width and height must then be
    supplied by the caller.  With merge_duplicates, points within
    merge_radius of an earlier point are dropped before validation.

    Raises MalformedInputError, PointOutOfBoundsError (with the offending
    index) or DuplicatePointError.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInputError(f"annotation is not valid UTF-8: {exc}") from exc
    else:
        text = data
    if fmt == "json":
        rect, raw = _parse_json(text)
    elif fmt == "csv":
        if width is None or height is None:
            raise MalformedInputError("csv annotations need explicit width and height")
        try:
            rect = ImageRect(width, height)
        except ValueError as exc:
            raise MalformedInputError(str(exc)) from exc
        raw = _parse_csv(text)
    else:
        raise ValueError(f"unknown annotation format: {fmt!r}")
    try:
        pts = as_point_array(raw)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    if merge_duplicates:
        pts = merge_close_points(pts, merge_radius)
    return HeadAnnotation(rect=rect, points=pts)
