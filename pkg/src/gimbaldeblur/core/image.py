"""Grayscale image conventions.

Images are plain 2-D float64 numpy arrays in row-major order: ``shape ==
(height, width)``, values nominally in [0, 1] after file load.  All pixel
math happens in double precision; quantization only occurs at file I/O.
"""

from __future__ import annotations

import numpy as np

# Type alias used in signatures throughout the package.
GrayImage = np.ndarray


def as_image(data) -> np.ndarray:
    """Coerce ``data`` to a valid grayscale image array.

    Returns a C-contiguous float64 2-D array (no copy when already one)
    and raises ``ValueError`` for anything that violates the image
    invariants (wrong rank, empty, non-finite values).
    """
    img = np.ascontiguousarray(data, dtype=np.float64)
    validate_image(img)
    return img


def validate_image(image: np.ndarray) -> None:
    if not isinstance(image, np.ndarray) or image.ndim != 2:
        raise ValueError("image must be a 2-D array (height x width)")
    if image.size == 0:
        raise ValueError("image must be non-empty")
    if not np.isfinite(image).all():
        raise ValueError("image contains NaN or Inf values")


def require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"images differ in shape: {a.shape} vs {b.shape}")
