"""Counting and map-quality metrics.

Counting errors follow the usual crowd-counting convention: MAE is the
mean absolute error and "MSE" is the root of the mean squared error (the
name is kept for comparability with published tables).  Map fidelity is
measured with squared-error loss, PSNR and SSIM after scaling both maps by
the ground-truth maximum, so the nominal dynamic range is 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from .errors import (
    EmptyInputError,
    ShapeMismatchError,
    TooSmallError,
    ZeroGroundTruthError,
)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass
class MetricReport:
    """Aggregate evaluation result over a batch of image pairs."""

    mae: float
    mse: float
    n: int
    psnr: float | None = None
    ssim: float | None = None

    def to_json(self) -> str:
        obj: dict = {"mae": self.mae, "mse": self.mse, "n": self.n}
        if self.psnr is not None:
            obj["psnr"] = "inf" if math.isinf(self.psnr) else self.psnr
        if self.ssim is not None:
            obj["ssim"] = self.ssim
        return json.dumps(obj, indent=2)


def mae_mse(estimated, ground_truth) -> tuple[float, float]:
    """Counting errors over a batch: (mean absolute, root mean squared)."""
    est = np.asarray(estimated, dtype=np.float64).ravel()
    gt = np.asarray(ground_truth, dtype=np.float64).ravel()
    if est.size == 0:
        raise EmptyInputError("need at least one count pair")
    if est.shape != gt.shape:
        raise ShapeMismatchError(
            f"{est.size} estimates vs {gt.size} ground truths"
        )
    err = est - gt
    return float(np.mean(np.abs(err))), float(np.sqrt(np.mean(err**2)))


def map_euclidean_loss(pred, gt) -> float:
    """Half the sum of squared pixel differences between two maps."""
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise ShapeMismatchError(f"map shapes differ: {p.shape} vs {g.shape}")
    return 0.5 * float(((p - g) ** 2).sum())


def combined_loss(l_den: float, l_anc: float, omega: float = 0.5) -> float:
    """Weighted sum omega * l_den + (1 - omega) * l_anc."""
    return omega * l_den + (1.0 - omega) * l_anc


def _scaled_pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise ShapeMismatchError(f"map shapes differ: {p.shape} vs {g.shape}")
    gmax = float(g.max()) if g.size else 0.0
    if gmax <= 0.0:
        raise ZeroGroundTruthError("ground-truth map has no positive values")
    return p / gmax, g / gmax


def psnr(pred, gt) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical maps.

    Both maps are scaled by the ground-truth maximum, so the peak is 1 and
    psnr = -10 * log10(mean squared pixel difference).
    """
    p, g = _scaled_pair(pred, gt)
    mse_pix = float(np.mean((p - g) ** 2))
    if mse_pix == 0.0:
        return math.inf
    return -10.0 * math.log10(mse_pix)


def _ssim_window() -> np.ndarray:
    ax = np.arange(SSIM_WINDOW, dtype=np.float64) - (SSIM_WINDOW - 1) / 2.0
    g = np.exp(-(ax**2) / (2.0 * SSIM_SIGMA**2))
    w = np.outer(g, g)
    return w / w.sum()


def _valid_filter(arr: np.ndarray, w: np.ndarray) -> np.ndarray:
    half = SSIM_WINDOW // 2
    full = correlate(arr, w, mode="constant", cval=0.0)
    return full[half:-half, half:-half]


def ssim(pred, gt) -> float:
    """Mean local structural similarity between two maps.

    Maps are scaled by the ground-truth maximum (dynamic range 1), local
    statistics use an 11x11 Gaussian window with sigma 1.5 evaluated where
    the window fits entirely, and the stabilizers are K1 = 0.01,
    K2 = 0.03.  Result lies in [-1, 1]; identical maps give exactly 1.
    """
    p, g = _scaled_pair(pred, gt)
    if min(p.shape) < SSIM_WINDOW:
        raise TooSmallError(
            f"maps must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {p.shape}"
        )
    c1 = SSIM_K1 * SSIM_K1
    c2 = SSIM_K2 * SSIM_K2
    w = _ssim_window()
    mu_p = _valid_filter(p, w)
    mu_g = _valid_filter(g, w)
    var_p = _valid_filter(p * p, w) - mu_p * mu_p
    var_g = _valid_filter(g * g, w) - mu_g * mu_g
    cov = _valid_filter(p * g, w) - mu_p * mu_g
    num = (2.0 * mu_p * mu_g + c1) * (2.0 * cov + c2)
    den = (mu_p * mu_p + mu_g * mu_g + c1) * (var_p + var_g + c2)
    return float(np.mean(num / den))
