"""Planar geometry over head annotations.

Everything works in the image coordinate frame: x grows to the right,
y grows downward, and pixel centers sit at integer coordinates.  Polygons
are (K, 2) float arrays with positive shoelace orientation; every polygon
produced here is convex.

The Voronoi tessellation is built by clipping the image rectangle against
the perpendicular bisectors of each seed and its neighbors.  Cells are
therefore always bounded, which guarantees that a vertical ray cast from a
seed terminates on the cell boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import KDTree

from .errors import (
    DuplicatePointError,
    EmptyAnnotationError,
    PointOutOfBoundsError,
    SeedOnBoundaryError,
    SinglePointError,
)

GEOM_EPS = 1e-9


@dataclass(frozen=True)
class ImageRect:
    """Pixel extent of an image; the clip domain for Voronoi cells."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if int(self.width) != self.width or int(self.height) != self.height:
            raise ValueError("width and height must be integers")
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"image extent must be at least 1x1, got {self.width}x{self.height}"
            )

    def corners(self) -> np.ndarray:
        """Rectangle polygon (4, 2) with positive orientation."""
        w, h = float(self.width), float(self.height)
        return np.array([[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]])

    def contains(self, x: float, y: float) -> bool:
        """Half-open bounds test: [0, width) x [0, height)."""
        return 0.0 <= x < self.width and 0.0 <= y < self.height


@dataclass(frozen=True, eq=False)
class VoronoiCell:
    """Convex region of the image nearest to one seed point."""

    seed_index: int
    vertices: np.ndarray  # (K, 2) float64, positively oriented


@dataclass(frozen=True, eq=False)
class Tessellation:
    """One clipped Voronoi cell per annotated point."""

    cells: list[VoronoiCell]
    rect: ImageRect


def as_point_array(points) -> np.ndarray:
    """Coerce to an (N, 2) float64 array with finite coordinates."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def find_duplicate(points: np.ndarray) -> tuple[int, int] | None:
    """Return the indices of the first pair of exactly coincident points."""
    pts = as_point_array(points)
    if len(pts) < 2:
        return None
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    srt = pts[order]
    same = np.all(srt[1:] == srt[:-1], axis=1)
    if not same.any():
        return None
    k = int(np.flatnonzero(same)[0])
    i, j = sorted((int(order[k]), int(order[k + 1])))
    return i, j


def polygon_area(vertices: np.ndarray) -> float:
    """Shoelace area; positive for the orientation used in this module."""
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_contains(vertices: np.ndarray, points, eps: float = GEOM_EPS):
    """Test points against a convex, positively oriented polygon.

    `eps` is a tolerance in pixels on the signed distance to each edge, so
    points up to `eps` outside still count as contained.  Accepts a single
    (2,) point (returns bool) or an (N, 2) array (returns a bool array).
    """
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    ab = b - a
    lengths = np.hypot(ab[:, 0], ab[:, 1])
    lengths[lengths == 0.0] = 1.0
    # cross((b - a), (p - a)) >= 0 for every edge <=> p inside or on boundary
    px = pts[:, 0][None, :] - a[:, 0][:, None]
    py = pts[:, 1][None, :] - a[:, 1][:, None]
    signed = (ab[:, 0][:, None] * py - ab[:, 1][:, None] * px) / lengths[:, None]
    inside = np.all(signed >= -eps, axis=0)
    return bool(inside[0]) if single else inside


def point_segment_distances(point, vertices: np.ndarray) -> np.ndarray:
    """Distance from one point to every edge of a polygon, in edge order."""
    p = np.asarray(point, dtype=np.float64)
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    ab = b - a
    denom = (ab ** 2).sum(axis=1)
    safe = np.where(denom > 0.0, denom, 1.0)
    t = np.clip(((p - a) * ab).sum(axis=1) / safe, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.sqrt(((p - closest) ** 2).sum(axis=1))


def _halfplane_clip(poly: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip keeping vertices with signed value <= 0."""
    out: list[np.ndarray] = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        di, dj = sd[i], sd[j]
        if di <= 0.0:
            out.append(poly[i])
            if dj > 0.0:
                t = di / (di - dj)
                out.append(poly[i] + t * (poly[j] - poly[i]))
        elif dj <= 0.0:
            t = di / (di - dj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    clipped = np.asarray(out, dtype=np.float64)
    if len(clipped) > 1:
        # intersection points landing on existing vertices create duplicates
        dup = np.abs(clipped - np.roll(clipped, -1, axis=0)).max(axis=1) < 1e-12
        if dup.any():
            clipped = clipped[~dup]
    return clipped


def _clip_cell(pts: np.ndarray, i: int, rect_poly: np.ndarray) -> np.ndarray:
    si = pts[i]
    d2 = ((pts - si) ** 2).sum(axis=1)
    d2[i] = np.inf
    order = np.argsort(d2)[: len(pts) - 1]
    poly = rect_poly
    max_r2 = ((poly - si) ** 2).sum(axis=1).max()
    for j in order:
        if d2[j] >= 4.0 * max_r2:
            # bisector lies at distance >= circumradius of the current cell:
            # it cannot cut, and neither can any farther seed
            break
        sj = pts[j]
        mid = 0.5 * (si + sj)
        nrm = sj - si
        sd = (poly - mid) @ nrm
        if np.all(sd <= 0.0):
            continue
        poly = _halfplane_clip(poly, sd)
        max_r2 = ((poly - si) ** 2).sum(axis=1).max()
    return poly


def voronoi_tessellate(points, rect: ImageRect) -> Tessellation:
    """Split the image rectangle into one convex cell per seed point.

    Every pixel of the rectangle belongs to the cell of its nearest seed
    (ties on cell boundaries may go to either side).  Cells are clipped to
    the rectangle, so unbounded outer regions never occur.

    Raises EmptyAnnotationError, DuplicatePointError or
    PointOutOfBoundsError when the seeds violate the preconditions.
    """
    pts = as_point_array(points)
    n = len(pts)
    if n == 0:
        raise EmptyAnnotationError("cannot tessellate an empty point set")
    oob = (
        (pts[:, 0] < 0.0)
        | (pts[:, 0] >= rect.width)
        | (pts[:, 1] < 0.0)
        | (pts[:, 1] >= rect.height)
    )
    if oob.any():
        i = int(np.flatnonzero(oob)[0])
        raise PointOutOfBoundsError(
            f"seed {i} at ({pts[i, 0]:g}, {pts[i, 1]:g}) outside "
            f"[0, {rect.width}) x [0, {rect.height})"
        )
    dup = find_duplicate(pts)
    if dup is not None:
        raise DuplicatePointError(
            f"seeds {dup[0]} and {dup[1]} coincide; Voronoi split undefined"
        )
    rect_poly = rect.corners()
    cells = [
        VoronoiCell(seed_index=i, vertices=_clip_cell(pts, i, rect_poly))
        for i in range(n)
    ]
    return Tessellation(cells=cells, rect=rect)


def knn_mean_distance(points, index: int, m: int) -> float:
    """Mean distance from one point to its min(m, n-1) nearest other points."""
    pts = as_point_array(points)
    n = len(pts)
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for {n} points")
    if m < 1:
        raise ValueError("m must be at least 1")
    if n < 2:
        raise SinglePointError("no neighbors exist for a single point")
    d = np.sqrt(((pts - pts[index]) ** 2).sum(axis=1))
    d = np.delete(d, index)
    k = min(m, n - 1)
    return float(np.partition(d, k - 1)[:k].mean())


def mean_knn_distances(points, m: int) -> np.ndarray:
    """knn_mean_distance for every point at once (KD-tree backed)."""
    pts = as_point_array(points)
    n = len(pts)
    if m < 1:
        raise ValueError("m must be at least 1")
    if n < 2:
        raise SinglePointError("no neighbors exist for a single point")
    k = min(m, n - 1)
    dists, _ = KDTree(pts).query(pts, k=k + 1)
    return dists[:, 1:].mean(axis=1)


def downward_ray_intersection(cell: VoronoiCell, seed, eps: float = GEOM_EPS) -> float:
    """Distance from the seed straight down to the cell boundary.

    Only crossings strictly below the seed count, so a seed sitting on the
    upper boundary of its cell still gets the positive exit distance.
    Cells are clipped to the image rectangle, so the exit point always
    exists for a seed inside its cell.  Raises SeedOnBoundaryError when the
    exit degenerates to zero: seed within eps of the lower boundary, or the
    ray running along a vertical boundary edge.
    """
    sx, sy = float(seed[0]), float(seed[1])
    verts = cell.vertices
    if not polygon_contains(verts, (sx, sy), eps=1e-7):
        raise ValueError("seed must lie inside its cell")
    a = verts
    b = np.roll(verts, -1, axis=0)
    dx = b[:, 0] - a[:, 0]
    # a vertical boundary edge at the seed's x means the seed sits at the
    # polygon's x-extreme, i.e. on the boundary, with the ray along it
    for i in np.flatnonzero((dx == 0.0) & (np.abs(a[:, 0] - sx) <= eps)):
        if max(float(a[i, 1]), float(b[i, 1])) >= sy - eps:
            raise SeedOnBoundaryError("downward ray runs along a boundary edge")
    cand: list[float] = []
    crossing = ((a[:, 0] - sx) * (b[:, 0] - sx) <= 0.0) & (dx != 0.0)
    if crossing.any():
        t = (sx - a[crossing, 0]) / dx[crossing]
        y_hit = a[crossing, 1] + t * (b[crossing, 1] - a[crossing, 1])
        below = y_hit - sy
        cand.extend(below[below > eps].tolist())
    if not cand:
        raise SeedOnBoundaryError("downward exit within tolerance of the seed")
    return float(min(cand))


def mean_k_edge_distance(cell: VoronoiCell, seed, k: int) -> float:
    """Mean of the k smallest point-to-edge distances (k clamped to edges)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    d = point_segment_distances(seed, cell.vertices)
    kk = min(k, len(d))
    return float(np.partition(d, kk - 1)[:kk].mean())
