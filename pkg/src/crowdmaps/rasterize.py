"""Render kernel specs into density maps and anchor maps.

Maps are (height, width) float64 arrays indexed [row, col] = [y, x].
Kernels are evaluated at pixel centers, which sit at integer coordinates.
Each kernel is truncated at `truncation_radius` standard deviations per
axis and renormalized over the in-image pixels it covers, so every
rendered head contributes exactly unit mass and the map total equals the
head count.  Accumulation is serial in spec order: output is bit-exact
deterministic.
"""

from __future__ import annotations

import numpy as np

from .annotations import HeadAnnotation
from .errors import CenterOutOfBoundsError, ShapeMismatchError
from .geometry import ImageRect
from .kernels import KernelSpec


def _kernel_patch(
    spec: KernelSpec, shape: tuple[int, int], truncation_radius: float
) -> tuple[slice, slice, np.ndarray]:
    """Unnormalized separable Gaussian over the clipped truncation window."""
    h, w = shape
    rx = truncation_radius * spec.sigma_h
    ry = truncation_radius * spec.sigma_v
    x0 = max(0, int(np.floor(spec.x - rx)))
    x1 = min(w - 1, int(np.ceil(spec.x + rx)))
    y0 = max(0, int(np.floor(spec.y - ry)))
    y1 = min(h - 1, int(np.ceil(spec.y + ry)))
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    gx = np.exp(-((xs - spec.x) ** 2) / (2.0 * spec.sigma_h**2))
    gy = np.exp(-((ys - spec.y) ** 2) / (2.0 * spec.sigma_v**2))
    return slice(y0, y1 + 1), slice(x0, x1 + 1), np.outer(gy, gx)


def render_density(
    specs: list[KernelSpec], rect: ImageRect, truncation_radius: float = 4.0
) -> np.ndarray:
    """Accumulate one unit-mass Gaussian per spec onto the pixel grid."""
    if truncation_radius <= 0.0:
        raise ValueError("truncation_radius must be positive")
    out = np.zeros((rect.height, rect.width), dtype=np.float64)
    for i, spec in enumerate(specs):
        if not rect.contains(spec.x, spec.y):
            raise CenterOutOfBoundsError(
                f"kernel {i} centered at ({spec.x:g}, {spec.y:g}) outside "
                f"{rect.width}x{rect.height}"
            )
        ys, xs, patch = _kernel_patch(spec, out.shape, truncation_radius)
        total = patch.sum()
        if total > 0.0:
            out[ys, xs] += patch / total
        else:
            # sigma so small that exp underflows at every pixel center:
            # the limit of the kernel is a point mass on the nearest pixel
            row = min(int(round(spec.y)), rect.height - 1)
            col = min(int(round(spec.x)), rect.width - 1)
            out[row, col] += 1.0
    return out


def render_anchors(
    annotation: HeadAnnotation,
    sigma_anc: float = 2.0,
    truncation_radius: float = 4.0,
) -> np.ndarray:
    """Sparse ground truth: one unit-mass Gaussian of fixed width per head."""
    if sigma_anc <= 0.0:
        raise ValueError("sigma_anc must be positive")
    specs = [
        KernelSpec(float(x), float(y), sigma_anc, sigma_anc)
        for x, y in annotation.points
    ]
    return render_density(specs, annotation.rect, truncation_radius)


def blend(geo: np.ndarray, vor: np.ndarray, lam: float) -> np.ndarray:
    """Pixel-wise convex combination (1 - lam) * geo + lam * vor.

    lam = 0 and lam = 1 return bit-exact copies of the respective input.
    """
    geo = np.asarray(geo, dtype=np.float64)
    vor = np.asarray(vor, dtype=np.float64)
    if geo.shape != vor.shape:
        raise ShapeMismatchError(f"map shapes differ: {geo.shape} vs {vor.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    if lam == 0.0:
        return geo.copy()
    if lam == 1.0:
        return vor.copy()
    return (1.0 - lam) * geo + lam * vor
