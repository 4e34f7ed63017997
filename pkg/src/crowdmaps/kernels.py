"""Per-head Gaussian kernel parameters.

Two estimators are provided.  The geometry-adaptive one is isotropic: the
standard deviation is a fixed fraction of the mean distance to the nearest
annotated neighbors.  The Voronoi one is anisotropic: an ellipse is fitted
inside the head's Voronoi cell (major axis pointing straight down toward
the body) and its semi-axes become the vertical and horizontal standard
deviations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotations import HeadAnnotation
from .errors import NonPositiveInputError, SeedOnBoundaryError
from .geometry import (
    GEOM_EPS,
    Tessellation,
    downward_ray_intersection,
    mean_k_edge_distance,
    mean_knn_distances,
)


@dataclass(frozen=True)
class GeoParams:
    """Geometry-adaptive kernel knobs: sigma = beta * mean-kNN-distance."""

    beta: float = 0.3
    m: int = 3
    fallback_sigma: float = 15.0  # used when no neighbors exist

    def __post_init__(self) -> None:
        if self.beta <= 0.0:
            raise NonPositiveInputError("beta must be positive")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.fallback_sigma <= 0.0:
            raise NonPositiveInputError("fallback_sigma must be positive")


@dataclass(frozen=True)
class VorParams:
    """Voronoi kernel knobs: ellipse reach gamma, sigma scale eta, edge count k."""

    gamma: float = 0.8
    eta: float = 1.0
    k: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.eta <= 0.0:
            raise NonPositiveInputError("eta must be positive")
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass(frozen=True)
class KernelSpec:
    """One Gaussian to rasterize: center plus per-axis standard deviations."""

    x: float
    y: float
    sigma_v: float  # vertical axis (y)
    sigma_h: float  # horizontal axis (x)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sigma_v) and np.isfinite(self.sigma_h)):
            raise ValueError("sigmas must be finite")
        if self.sigma_v <= 0.0 or self.sigma_h <= 0.0:
            raise NonPositiveInputError("sigmas must be positive")
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("center must be finite")

    @property
    def isotropic(self) -> bool:
        return self.sigma_v == self.sigma_h


def geo_kernel_specs(
    annotation: HeadAnnotation, params: GeoParams | None = None
) -> list[KernelSpec]:
    """Isotropic spec per head: sigma = beta * mean distance to m neighbors.

    m is clamped to n - 1 when fewer neighbors exist; a lone point falls
    back to params.fallback_sigma.
    """
    params = params or GeoParams()
    pts = annotation.points
    n = len(pts)
    if n == 0:
        return []
    if n == 1:
        s = params.fallback_sigma
        return [KernelSpec(float(pts[0, 0]), float(pts[0, 1]), s, s)]
    sigmas = params.beta * mean_knn_distances(pts, params.m)
    return [
        KernelSpec(float(x), float(y), float(s), float(s))
        for (x, y), s in zip(pts, sigmas)
    ]


def ellipse_semi_axes(d: float, l_bar: float, gamma: float) -> tuple[float, float]:
    """Semi-axes of the cell ellipse: focus at the head, reach gamma * d.

    The minor semi-axis is b = l_bar.  The major semi-axis solves
    c + a = gamma * d with linear eccentricity c = sqrt(a^2 - b^2), giving
    a = ((gamma * d)^2 + b^2) / (2 * gamma * d).  When b exceeds gamma * d
    no such ellipse exists and the degenerate circle a = b is returned.
    """
    if d <= 0.0 or l_bar <= 0.0 or gamma <= 0.0:
        raise NonPositiveInputError("d, l_bar and gamma must all be positive")
    if gamma > 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    reach = gamma * d
    b = l_bar
    if b >= reach:
        return b, b
    a = (reach * reach + b * b) / (2.0 * reach)
    return a, b


def voronoi_kernel_specs(
    annotation: HeadAnnotation,
    tess: Tessellation,
    params: VorParams | None = None,
    geo_params: GeoParams | None = None,
) -> list[KernelSpec]:
    """Anisotropic spec per head from its Voronoi cell.

    For each head: d is the distance straight down to the cell boundary,
    l_bar the mean distance to the k nearest cell edges; sigma_v = eta * a
    and sigma_h = eta * b with (a, b) from ellipse_semi_axes.  Degenerate
    cells (seed on the boundary: d ~ 0 or l_bar ~ 0) fall back to the
    isotropic geometry-adaptive sigma for that head.
    """
    params = params or VorParams()
    pts = annotation.points
    n = len(pts)
    if len(tess.cells) != n:
        raise ValueError(
            f"tessellation has {len(tess.cells)} cells for {n} points"
        )
    if tess.rect != annotation.rect:
        raise ValueError("tessellation rect does not match the annotation")
    specs: list[KernelSpec | None] = [None] * n
    geo_sigmas: np.ndarray | None = None

    def fallback(i: int) -> KernelSpec:
        nonlocal geo_sigmas
        if geo_sigmas is None:
            geo_sigmas = np.array(
                [s.sigma_v for s in geo_kernel_specs(annotation, geo_params)]
            )
        s = float(geo_sigmas[i])
        return KernelSpec(float(pts[i, 0]), float(pts[i, 1]), s, s)

    for cell in tess.cells:
        i = cell.seed_index
        try:
            d = downward_ray_intersection(cell, pts[i])
        except SeedOnBoundaryError:
            specs[i] = fallback(i)
            continue
        l_bar = mean_k_edge_distance(cell, pts[i], params.k)
        if l_bar <= GEOM_EPS:
            specs[i] = fallback(i)
            continue
        a, b = ellipse_semi_axes(d, l_bar, params.gamma)
        x, y = float(pts[i, 0]), float(pts[i, 1])
        specs[i] = KernelSpec(x, y, params.eta * a, params.eta * b)
    return specs  # type: ignore[return-value]
