"""Full-reference image quality metrics: PSNR and SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .core.image import as_image, require_same_shape


def psnr(image, reference) -> float:
    """Peak signal-to-noise ratio in dB for unit dynamic range.

    Returns +inf when the images are identical.
    """
    x = as_image(image)
    ref = as_image(reference)
    require_same_shape(x, ref)
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


@dataclass(frozen=True)
class SsimConfig:
    """Gaussian-window SSIM constants (standard defaults)."""

    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")

    def window(self) -> np.ndarray:
        r = np.arange(self.window_size, dtype=np.float64) - self.window_size // 2
        g = np.exp(-0.5 * (r / self.sigma) ** 2)
        win = np.outer(g, g)
        return win / win.sum()


def ssim(image, reference, cfg: SsimConfig | None = None) -> float:
    """Mean structural similarity with Gaussian weighting.

    The local map is computed over fully-contained windows only and
    averaged; the result lies in [-1, 1] with 1 for identical images.
    """
    cfg = cfg or SsimConfig()
    x = as_image(image)
    y = as_image(reference)
    require_same_shape(x, y)
    if min(x.shape) < cfg.window_size:
        raise ValueError(f"images must be at least "
                         f"{cfg.window_size}x{cfg.window_size} for SSIM")
    win = cfg.window()

    def local_mean(img):
        return fftconvolve(img, win, mode="valid")

    mu_x = local_mean(x)
    mu_y = local_mean(y)
    xx = local_mean(x * x) - mu_x ** 2
    yy = local_mean(y * y) - mu_y ** 2
    xy = local_mean(x * y) - mu_x * mu_y

    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    denominator = (mu_x ** 2 + mu_y ** 2 + c1) * (xx + yy + c2)
    return float(np.mean(numerator / denominator))
