"""Additive white Gaussian noise calibrated by SNR in decibels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import as_image, require_same_shape


@dataclass(frozen=True)
class NoiseSpec:
    """AWGN description: target SNR in dB and an RNG seed.

    SNR is defined as 10*log10(signal power / noise power) with signal
    power the mean of squared image values.  ``snr_db = inf`` is the
    no-noise sentinel.
    """

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")


def add_awgn(image, spec: NoiseSpec) -> np.ndarray:
    """Corrupt ``image`` with white Gaussian noise at ``spec.snr_db``.

    Deterministic for a given seed; rejects all-zero images (their SNR is
    undefined).
    """
    img = as_image(image)
    if math.isinf(spec.snr_db) and spec.snr_db > 0:
        return img.copy()
    signal_power = float(np.mean(img ** 2))
    if signal_power == 0.0:
        raise ValueError("all-zero image: signal power is zero, SNR undefined")
    sigma = math.sqrt(signal_power * 10.0 ** (-spec.snr_db / 10.0))
    rng = np.random.default_rng(spec.seed)
    return img + rng.normal(0.0, sigma, img.shape)


def measure_snr_db(clean, noisy) -> float:
    """Empirical SNR: 10*log10(sum(x^2) / sum(n^2)) with n = noisy - clean."""
    x = as_image(clean)
    y = as_image(noisy)
    require_same_shape(x, y)
    noise_energy = float(np.sum((y - x) ** 2))
    if noise_energy == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.sum(x ** 2)) / noise_energy)
