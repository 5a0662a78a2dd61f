"""Blur kernel estimation from blur-sharp image pairs.

Pairs are manufactured from a slow-pan frame sequence: the mean of N
consecutive nearly-sharp frames stands in for the blurred image and the
center frame for the sharp one.  The kernel is then recovered by least
squares on the convolution model, constrained to the physical set
(non-negative, unit sum), via projected conjugate gradient on the
normal equations.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.fft import irfft2, rfft2

from .core.image import as_image, require_same_shape
from .core.imgio import load_image, save_pgm
from .core.kernel import Kernel
from .errors import IllPosedError
from .psf_analytic import GimbalMotion

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSpec:
    """Frame count to average and the derived sharp-frame index."""

    n_frames: int

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")

    @property
    def center_index(self) -> int:
        """1-based index of the frame taken as sharp: (N+1)/2 odd, N/2+1 even."""
        n = self.n_frames
        return (n + 1) // 2 if n % 2 == 1 else n // 2 + 1


def frames_for_steering(motion: GimbalMotion) -> int:
    """Number of 1 deg/s frames whose average matches the motion's blur.

    N = frame_rate * exposure * steering_rate, rounded half-up and clamped
    to >= 1.
    """
    n = motion.frame_rate * motion.exposure * motion.steering_rate
    return max(1, math.floor(n + 0.5))


def average_frames(frames, spec: PairSpec):
    """Build a (blurred, sharp) pair: pixel-wise mean and the center frame."""
    if len(frames) != spec.n_frames:
        raise ValueError(f"expected {spec.n_frames} frames, got {len(frames)}")
    imgs = [as_image(f) for f in frames]
    for other in imgs[1:]:
        require_same_shape(imgs[0], other)
    blurred = np.mean(imgs, axis=0)
    sharp = imgs[spec.center_index - 1].copy()
    return blurred, sharp


@dataclass
class EstimationConfig:
    """Least-squares kernel estimation settings.

    kernel_size: odd support of the estimated kernel; max_iters / tol stop
    the solver; init is "uniform" (default) or "delta".
    """

    kernel_size: int = 21
    max_iters: int = 100
    tol: float = 1e-6
    init: str = "uniform"

    def __post_init__(self):
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.init not in ("uniform", "delta"):
            raise ValueError("init must be 'uniform' or 'delta'")


class IterationStats(NamedTuple):
    residual: float
    min_weight: float
    weight_sum: float


def _project_simplex_like(k: np.ndarray) -> np.ndarray:
    """Clip negatives to zero and renormalize to unit sum."""
    out = np.clip(k, 0.0, None)
    total = out.sum()
    if total <= 0.0:
        out = np.full_like(k, 1.0 / k.size)
    else:
        out = out / total
    return out


def estimate_kernel(blurred, sharp, cfg: EstimationConfig | None = None,
                    return_history: bool = False):
    """Estimate the blur kernel relating a blur-sharp pair.

    Minimizes the interior-cropped data term ||B - L (*) k||_2 subject to
    k >= 0 and sum(k) = 1.  Conjugate gradient runs on the kernel-support
    normal equations; after each step the iterate is projected back onto
    the constraint set (clip + renormalize) and the search direction is
    restarted whenever the projection was active.  Only residual-decreasing
    steps are accepted, so the data term is non-increasing.

    Parameters
    ----------
    blurred, sharp : arrays of the same shape.
    cfg : EstimationConfig, optional.
    return_history : when True, also return per-iteration
        ``IterationStats`` (accepted iterates only, initial point first).

    Returns
    -------
    Kernel, or (Kernel, list[IterationStats]) with ``return_history``.
    """
    cfg = cfg or EstimationConfig()
    B = as_image(blurred)
    L = as_image(sharp)
    require_same_shape(B, L)
    size = cfg.kernel_size
    if size > min(B.shape):
        raise ValueError(f"kernel_size {size} exceeds image extent {B.shape}")

    margin = size // 2
    h, w = L.shape
    interior = np.zeros((h, w))
    interior[margin:h - margin, margin:w - margin] = 1.0
    if float(L[margin:h - margin, margin:w - margin].std()) < 1e-10:
        raise IllPosedError(
            "sharp image has no texture in the interior region; "
            "the kernel estimate is unconstrained")

    FL = rfft2(L)
    FLc = np.conj(FL)
    shape = L.shape

    def forward(k: np.ndarray) -> np.ndarray:
        # L (*) k, periodic; boundary error is masked out by `interior`.
        padded = np.zeros(shape)
        padded[:size, :size] = k
        padded = np.roll(padded, (-margin, -margin), axis=(0, 1))
        return irfft2(FL * rfft2(padded), s=shape)

    def adjoint(img: np.ndarray) -> np.ndarray:
        corr = irfft2(FLc * rfft2(img), s=shape)
        return np.roll(corr, (margin, margin), axis=(0, 1))[:size, :size]

    def normal_op(k: np.ndarray) -> np.ndarray:
        return adjoint(interior * forward(k))

    def data_residual(k: np.ndarray) -> float:
        return float(np.linalg.norm(interior * (forward(k) - B)))

    rhs = adjoint(interior * B)

    if cfg.init == "uniform":
        k = np.full((size, size), 1.0 / (size * size))
    else:
        k = np.zeros((size, size))
        k[margin, margin] = 1.0

    residual = data_residual(k)
    history = [IterationStats(residual, float(k.min()), float(k.sum()))]
    grad = normal_op(k) - rhs
    direction = -grad
    tiny = 1e-30

    for _ in range(cfg.max_iters):
        a_dir = normal_op(direction)
        curvature = float(np.vdot(direction, a_dir).real)
        if not math.isfinite(curvature) or curvature <= tiny:
            direction = -grad
            a_dir = normal_op(direction)
            curvature = float(np.vdot(direction, a_dir).real)
            if not math.isfinite(curvature) or curvature <= tiny:
                break
        alpha = -float(np.vdot(grad, direction).real) / curvature
        if alpha <= 0:
            break

        step = alpha
        candidate = _project_simplex_like(k + step * direction)
        cand_residual = data_residual(candidate)
        backtracks = 0
        while cand_residual > residual and backtracks < 8:
            step *= 0.5
            candidate = _project_simplex_like(k + step * direction)
            cand_residual = data_residual(candidate)
            backtracks += 1
        if cand_residual > residual:
            break  # no improving feasible step along this direction

        projection_active = not np.allclose(candidate, k + step * direction,
                                            rtol=0.0, atol=1e-14)
        rel_drop = (residual - cand_residual) / max(residual, tiny)
        k, residual = candidate, cand_residual
        history.append(IterationStats(residual, float(k.min()), float(k.sum())))

        new_grad = normal_op(k) - rhs
        if projection_active or backtracks:
            direction = -new_grad
        else:
            beta = float(np.vdot(new_grad, new_grad - grad).real)
            beta = max(0.0, beta / max(float(np.vdot(grad, grad).real), tiny))
            direction = -new_grad + beta * direction
        grad = new_grad

        if rel_drop < cfg.tol:
            break

    kernel = Kernel.from_weights(k)
    if return_history:
        return kernel, history
    return kernel


_FRAME_EXTENSIONS = (".pgm", ".png")


def list_frames(frame_dir) -> list[Path]:
    """Frame files in a directory, ordered by embedded frame number."""
    frame_dir = Path(frame_dir)

    def sort_key(p: Path):
        digits = re.findall(r"\d+", p.stem)
        return (int(digits[-1]) if digits else -1, p.name)

    frames = [p for p in frame_dir.iterdir()
              if p.is_file() and p.suffix.lower() in _FRAME_EXTENSIONS]
    return sorted(frames, key=sort_key)


def build_pair_dataset(frame_dir, motions: list[GimbalMotion], out_dir,
                       manifest_name: str = "pairs.jsonl",
                       bit_depth: int = 16) -> Path:
    """Emit sliding-window blur-sharp pairs for each motion.

    For every motion the window length N comes from ``frames_for_steering``;
    consecutive non-overlapping windows of the source sequence each yield
    one (mean, center-frame) pair written as PGM.  The manifest is JSON
    lines: one record per pair with blur/sharp paths, N, steering rate and
    source frame indices; motions that the sequence is too short for are
    recorded as warning entries and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = list_frames(frame_dir)
    manifest_path = out_dir / manifest_name
    records = []
    for motion in motions:
        n = frames_for_steering(motion)
        spec = PairSpec(n)
        rate = motion.steering_rate
        if n > len(frames):
            log.warning("sequence too short for steering rate %s (needs %d frames)",
                        rate, n)
            records.append({
                "warning": f"sequence has {len(frames)} frames, needs {n}",
                "steering_rate_deg_s": rate,
                "N": n,
            })
            continue
        pair_idx = 0
        for start in range(0, len(frames) - n + 1, n):
            window = frames[start:start + n]
            images = [load_image(p) for p in window]
            blurred, sharp = average_frames(images, spec)
            tag = f"sr{rate:g}_{pair_idx:04d}"
            blur_path = out_dir / f"{tag}_blur.pgm"
            sharp_path = out_dir / f"{tag}_sharp.pgm"
            save_pgm(blurred, blur_path, bit_depth=bit_depth)
            save_pgm(sharp, sharp_path, bit_depth=bit_depth)
            records.append({
                "blur_path": str(blur_path),
                "sharp_path": str(sharp_path),
                "N": n,
                "steering_rate_deg_s": rate,
                "source_indices": list(range(start + 1, start + n + 1)),
            })
            pair_idx += 1
    with open(manifest_path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return manifest_path
