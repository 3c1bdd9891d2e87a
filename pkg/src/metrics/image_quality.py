"""
PSNR, SSIM and NRMSE on images in [0, 1], computed in float64.

SSIM defaults to the global-statistics form (one value over the whole
image); ``windowed=True`` switches to scikit-image's sliding-window SSIM.
"""

import math
from typing import Tuple

import numpy as np
from skimage.metrics import structural_similarity

from src.exceptions import MetricError, ShapeMismatchError

K1 = 0.01
K2 = 0.03


def _pair(real, synth) -> Tuple[np.ndarray, np.ndarray]:
    real = np.asarray(real, dtype=np.float64)
    synth = np.asarray(synth, dtype=np.float64)
    if real.shape != synth.shape:
        raise ShapeMismatchError(f"Metric inputs differ in shape: {real.shape} vs {synth.shape}")
    return real, synth


def to_unit_range(image) -> np.ndarray:
    """Map model space [-1, 1] to [0, 1]."""
    return np.clip((np.asarray(image, dtype=np.float64) + 1.0) / 2.0, 0.0, 1.0)


def psnr(real, synth) -> float:
    """
    10 * log10(A * MAX^2 / SSE), A the pixel count and MAX the peak of the
    real image. Identical images give +inf.
    """
    real, synth = _pair(real, synth)
    sse = float(np.sum((real - synth) ** 2))
    if sse == 0.0:
        return math.inf
    peak = float(np.max(real))
    if peak <= 0.0:
        return -math.inf
    return 10.0 * math.log10(real.size * peak ** 2 / sse)


def ssim(real, synth, dynamic_range: float = 1.0, windowed: bool = False) -> float:
    real, synth = _pair(real, synth)
    if windowed:
        return float(structural_similarity(real, synth, data_range=dynamic_range))

    c1 = (K1 * dynamic_range) ** 2
    c2 = (K2 * dynamic_range) ** 2
    mu_r, mu_s = real.mean(), synth.mean()
    dr, ds = real - mu_r, synth - mu_s
    var_r, var_s = np.mean(dr * dr), np.mean(ds * ds)
    cov = np.mean(dr * ds)
    numerator = (2 * mu_r * mu_s + c1) * (2 * cov + c2)
    denominator = (mu_r ** 2 + mu_s ** 2 + c1) * (var_r + var_s + c2)
    return float(numerator / denominator)


def nrmse(real, synth) -> float:
    real, synth = _pair(real, synth)
    norm = float(np.sum(real ** 2))
    if norm == 0.0:
        raise MetricError("NRMSE is undefined for an all-zero real image")
    return math.sqrt(float(np.sum((synth - real) ** 2)) / norm)


def slice_metrics(real, synth, windowed_ssim: bool = False) -> Tuple[float, float, float]:
    """(psnr, ssim, nrmse) for one pair of [0, 1] images; undefined NRMSE becomes NaN."""
    try:
        error = nrmse(real, synth)
    except MetricError:
        error = math.nan
    return psnr(real, synth), ssim(real, synth, windowed=windowed_ssim), error
