"""Synthetic scene and frame-sequence generation.

Used by the benchmark harness, the dataset tooling and the test suite
when no real footage is available: scenes are piecewise-structured
(blobs, bars, gradients) so that blur and deblurring have visible
effect on them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .core.imgio import save_pgm


def random_scene(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Structured random scene in [0.05, 0.95].

    A smooth background with random rectangles, soft blobs and a few
    high-contrast bars, lightly smoothed so the spectrum resembles a
    natural image more than white noise does.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    img = 0.35 + 0.25 * (xx / max(width - 1, 1)) + 0.15 * (yy / max(height - 1, 1))

    for _ in range(12):
        x0 = rng.integers(0, width)
        y0 = rng.integers(0, height)
        rw = int(rng.integers(width // 12 + 1, width // 3 + 2))
        rh = int(rng.integers(height // 12 + 1, height // 3 + 2))
        img[y0:y0 + rh, x0:x0 + rw] += rng.uniform(-0.35, 0.35)

    for _ in range(10):
        cx = rng.uniform(0, width)
        cy = rng.uniform(0, height)
        radius = rng.uniform(min(width, height) / 24, min(width, height) / 6)
        blob = np.exp(-(((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * radius ** 2)))
        img += rng.uniform(-0.3, 0.3) * blob

    for _ in range(6):
        x0 = int(rng.integers(0, max(1, width - 4)))
        bw = int(rng.integers(2, 6))
        img[:, x0:x0 + bw] += rng.uniform(-0.4, 0.4)

    img = ndimage.gaussian_filter(img, 0.8)
    lo, hi = img.min(), img.max()
    return 0.05 + 0.9 * (img - lo) / max(hi - lo, 1e-12)


def panning_frames(scene: np.ndarray, count: int, width: int,
                   step_px: int = 1) -> list[np.ndarray]:
    """Crop a sliding window from a wide scene: a slow-pan sequence."""
    h, w = scene.shape
    if width > w or (count - 1) * step_px + width > w:
        raise ValueError("scene too narrow for the requested pan")
    return [scene[:, i * step_px:i * step_px + width].copy() for i in range(count)]


def write_frame_sequence(out_dir, count: int, width: int, height: int,
                         seed: int = 0, pan_step: int = 1,
                         bit_depth: int = 16, prefix: str = "frame") -> list[Path]:
    """Render a panning synthetic sequence as numbered PGM frames."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scene = random_scene(width + (count - 1) * pan_step, height, seed=seed)
    paths = []
    for i, frame in enumerate(panning_frames(scene, count, width, pan_step)):
        path = out_dir / f"{prefix}_{i + 1:05d}.pgm"
        save_pgm(frame, path, bit_depth=bit_depth)
        paths.append(path)
    return paths
