"""2-D convolution with selectable boundary handling.

Two computation paths are provided: direct spatial convolution and an
FFT path.  Under periodic boundary conditions they agree to floating
point accuracy; the non-periodic modes are realized on the FFT path by
padding with the boundary extension before the circular convolution.
FFT sizes are padded to the next fast composite length rather than the
next power of two to keep the memory overhead of typical video frames
low.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.fft import irfft2, next_fast_len, rfft2

from .image import as_image
from .kernel import Kernel

# boundary name -> (scipy.ndimage mode, numpy.pad mode)
_BOUNDARY_MODES = {
    "replicate": ("nearest", "edge"),
    "symmetric": ("reflect", "symmetric"),
    "periodic": ("wrap", "wrap"),
}

# Kernels up to this many taps run the direct path under method="auto".
_DIRECT_TAP_LIMIT = 81


def boundary_modes() -> tuple[str, ...]:
    return tuple(_BOUNDARY_MODES)


def otf(weights: np.ndarray, shape: tuple[int, int],
        anchor: tuple[int, int] | None = None) -> np.ndarray:
    """Transfer function of a small kernel on an image-sized periodic grid.

    Embeds ``weights`` into a ``shape`` canvas with the anchor tap moved
    to index (0, 0) and returns its ``rfft2``.  ``anchor`` defaults to the
    center tap.
    """
    ky, kx = weights.shape
    h, w = shape
    if ky > h or kx > w:
        raise ValueError(f"kernel {weights.shape} larger than image {shape}")
    if anchor is None:
        anchor = (ky // 2, kx // 2)
    padded = np.zeros(shape)
    padded[:ky, :kx] = weights
    padded = np.roll(padded, (-anchor[0], -anchor[1]), axis=(0, 1))
    return rfft2(padded)


def convolve(image, kernel: Kernel, boundary: str = "symmetric",
             method: str = "auto") -> np.ndarray:
    """Convolve ``image`` with ``kernel`` preserving the image size.

    boundary: one of "replicate", "symmetric", "periodic".
    method: "direct", "fft", or "auto" (direct for small kernels).
    """
    img = as_image(image)
    if boundary not in _BOUNDARY_MODES:
        raise ValueError(f"unknown boundary mode {boundary!r}; "
                         f"expected one of {sorted(_BOUNDARY_MODES)}")
    w = kernel.weights
    if w.shape[0] > img.shape[0] or w.shape[1] > img.shape[1]:
        raise ValueError(
            f"kernel {w.shape} larger than image {img.shape}")
    if method == "auto":
        method = "direct" if w.size <= _DIRECT_TAP_LIMIT else "fft"
    if method == "direct":
        return ndimage.convolve(img, w, mode=_BOUNDARY_MODES[boundary][0])
    if method == "fft":
        return _convolve_fft(img, w, boundary)
    raise ValueError(f"unknown method {method!r}")


def _convolve_fft(img: np.ndarray, weights: np.ndarray, boundary: str) -> np.ndarray:
    h, w = img.shape
    if boundary == "periodic":
        return irfft2(rfft2(img) * otf(weights, img.shape), s=img.shape)
    ry, rx = weights.shape[0] // 2, weights.shape[1] // 2
    fh, fw = next_fast_len(h + 2 * ry), next_fast_len(w + 2 * rx)
    pad_mode = _BOUNDARY_MODES[boundary][1]
    padded = np.pad(img, ((ry, fh - h - ry), (rx, fw - w - rx)), mode=pad_mode)
    out = irfft2(rfft2(padded) * otf(weights, padded.shape), s=padded.shape)
    return out[ry:ry + h, rx:rx + w]


def pad_for_fft(img: np.ndarray, margin: tuple[int, int],
                mode: str = "symmetric") -> tuple[np.ndarray, tuple[int, int]]:
    """Extend an image by at least ``margin`` to a fast FFT size.

    Returns the padded array and the (top, left) offset of the original
    region, for cropping results back with ``crop_padded``.
    """
    h, w = img.shape
    ry, rx = margin
    fh, fw = next_fast_len(h + 2 * ry), next_fast_len(w + 2 * rx)
    padded = np.pad(img, ((ry, fh - h - ry), (rx, fw - w - rx)), mode=mode)
    return padded, (ry, rx)


def crop_padded(padded: np.ndarray, offset: tuple[int, int],
                shape: tuple[int, int]) -> np.ndarray:
    ry, rx = offset
    h, w = shape
    return padded[ry:ry + h, rx:rx + w]
