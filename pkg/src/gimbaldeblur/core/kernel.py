"""Blur kernel (PSF) value type and its text file format.

A kernel is a small non-negative raster with odd dimensions whose weights
sum to 1; the anchor is the unique center pixel.  Kernels are treated as
immutable values: the wrapped array is marked read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ImageFormatError

# Negatives smaller than this are treated as numerical noise and clipped;
# anything more negative is rejected.
NEGATIVE_TOL = 1e-9
SUM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Kernel:
    """Normalized PSF raster with odd support and a central anchor."""

    weights: np.ndarray

    def __post_init__(self):
        w = self.weights
        if not isinstance(w, np.ndarray) or w.ndim != 2:
            raise ValueError("kernel weights must be a 2-D array")
        if w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {w.shape}")
        if not np.isfinite(w).all():
            raise ValueError("kernel weights must be finite")
        if w.min() < 0:
            raise ValueError("kernel weights must be non-negative")
        total = float(w.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"kernel weights must sum to 1 (got {total:.9g})")

    @classmethod
    def from_weights(cls, weights, normalize: bool = True) -> "Kernel":
        """Build a kernel from raw weights.

        Clips numerical-noise negatives (>= -1e-9) to zero, rejects real
        negatives, and renormalizes to unit sum when ``normalize`` is set.
        """
        w = np.array(weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("kernel weights must be a 2-D array")
        if not np.isfinite(w).all():
            raise ValueError("kernel weights must be finite")
        if w.min() < -NEGATIVE_TOL:
            raise ValueError(f"kernel has negative weights (min {w.min():.3g})")
        np.clip(w, 0.0, None, out=w)
        total = w.sum()
        if normalize:
            if total <= 0:
                raise ValueError("kernel weights sum to zero; cannot normalize")
            w /= total
        w.setflags(write=False)
        return cls(w)

    @property
    def size_x(self) -> int:
        return self.weights.shape[1]

    @property
    def size_y(self) -> int:
        return self.weights.shape[0]

    @property
    def anchor(self) -> tuple[int, int]:
        """(row, column) of the center pixel."""
        return (self.size_y // 2, self.size_x // 2)

    @classmethod
    def delta(cls) -> "Kernel":
        """Identity kernel: a single unit weight."""
        return cls.from_weights(np.ones((1, 1)), normalize=False)

    @classmethod
    def gaussian(cls, size: int, sigma: float) -> "Kernel":
        """Isotropic Gaussian on an odd ``size`` x ``size`` grid."""
        if size < 1 or size % 2 == 0:
            raise ValueError("gaussian kernel size must be odd and positive")
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        r = np.arange(size, dtype=np.float64) - size // 2
        g = np.exp(-0.5 * (r / sigma) ** 2)
        return cls.from_weights(np.outer(g, g))

    @classmethod
    def line(cls, length: float, angle_deg: float, oversample: int = 64) -> "Kernel":
        """Linear motion kernel: a segment of ``length`` pixels at ``angle_deg``.

        The segment is centered on the anchor and rendered by bilinear
        splatting of densely sampled points, so fractional endpoints are
        anti-aliased.  Angle follows image-math convention: positive angles
        rise toward the top of the image.
        """
        if length < 1:
            raise ValueError("line length must be >= 1 pixel")
        half = (length - 1) / 2.0
        phi = math.radians(angle_deg)
        ux, uy = math.cos(phi), -math.sin(phi)
        half_x, half_y = abs(half * ux), abs(half * uy)
        side_x = 2 * (math.ceil(half_x) + 1) + 1
        side_y = 2 * (math.ceil(half_y) + 1) + 1
        canvas = np.zeros((side_y, side_x))
        n = max(2, int(round(length * oversample)))
        t = np.linspace(-half, half, n)
        _splat_bilinear(canvas, t * ux + side_x // 2, t * uy + side_y // 2,
                        np.full(n, 1.0 / n))
        return cls.from_weights(canvas).trimmed()

    def trimmed(self, tol: float = 0.0) -> "Kernel":
        """Crop all-zero border rows/columns, keeping the anchor centered."""
        w = self.weights
        cy, cx = self.anchor
        rows = np.flatnonzero(w.sum(axis=1) > tol)
        cols = np.flatnonzero(w.sum(axis=0) > tol)
        my = int(max(abs(rows - cy).max(), 0)) if rows.size else 0
        mx = int(max(abs(cols - cx).max(), 0)) if cols.size else 0
        out = w[cy - my:cy + my + 1, cx - mx:cx + mx + 1]
        return Kernel.from_weights(out)

    def nonzero_extent(self, axis: int = 1, tol: float = 1e-12) -> int:
        """Number of columns (axis=1) or rows (axis=0) carrying weight."""
        mass = self.weights.sum(axis=1 - axis)
        return int(np.count_nonzero(mass > tol))

    def flipped(self) -> "Kernel":
        """Kernel rotated 180 degrees (the correlation/adjoint kernel)."""
        return Kernel.from_weights(self.weights[::-1, ::-1], normalize=False)


def _splat_bilinear(canvas: np.ndarray, xs, ys, amounts) -> None:
    """Deposit ``amounts`` at continuous positions via bilinear weights."""
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    fx = xs - x0
    fy = ys - y0
    h, w = canvas.shape
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            np.add.at(canvas, (np.clip(y0 + dy, 0, h - 1),
                               np.clip(x0 + dx, 0, w - 1)), amounts * wy * wx)


def save_psf_text(kernel: Kernel, path) -> None:
    """Write a kernel in the text format ``PSF <size_x> <size_y>`` + rows."""
    lines = [f"PSF {kernel.size_x} {kernel.size_y}"]
    for row in kernel.weights:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_psf_text(path) -> Kernel:
    """Read a kernel from the text format; re-normalizes on load."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("PSF"):
        raise ImageFormatError(f"{path}: missing 'PSF' header line")
    header = lines[0].split()
    if len(header) != 3:
        raise ImageFormatError(f"{path}: header must be 'PSF <size_x> <size_y>'")
    try:
        size_x, size_y = int(header[1]), int(header[2])
    except ValueError as exc:
        raise ImageFormatError(f"{path}: non-integer kernel dimensions") from exc
    if size_x < 1 or size_y < 1:
        raise ImageFormatError(f"{path}: kernel dimensions must be positive")
    if len(lines) - 1 != size_y:
        raise ImageFormatError(
            f"{path}: expected {size_y} weight rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        try:
            row = [float(v) for v in ln.split()]
        except ValueError as exc:
            raise ImageFormatError(f"{path}: non-numeric kernel weight") from exc
        if len(row) != size_x:
            raise ImageFormatError(
                f"{path}: expected {size_x} weights per row, found {len(row)}")
        rows.append(row)
    try:
        return Kernel.from_weights(np.array(rows))
    except ValueError as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc
