"""Closed-form synthesis of the yaw-rotation blur kernel.

A camera panning about its vertical axis smears each scene point along a
nearly horizontal track during the exposure.  Given the pinhole
intrinsics and the pan (steering) rate, the track is fully determined:
every intermediate rotation maps the anchor pixel through the pure
rotation homography K R_y K^-1, and accumulating those positions over
the exposure yields the PSF, no blurred observations needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.kernel import Kernel, _splat_bilinear


def focal_from_fov(alpha_deg: float, width: int, height: int) -> float:
    """Focal length in pixels from the diagonal field of view.

    f = sqrt(h^2 + w^2) / (2 tan(alpha / 2))
    """
    if not 0.0 < alpha_deg < 180.0:
        raise ValueError(f"field of view must be in (0, 180) degrees, got {alpha_deg}")
    return math.hypot(width, height) / (2.0 * math.tan(math.radians(alpha_deg) / 2.0))


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics with the principal point fixed at the image center.

    f: focal length in pixels; width/height: frame size in pixels.
    """

    f: float
    width: int
    height: int

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("focal length must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")

    @classmethod
    def from_fov(cls, alpha_deg: float, width: int, height: int) -> "CameraIntrinsics":
        return cls(focal_from_fov(alpha_deg, width, height), width, height)

    @property
    def principal_point(self) -> tuple[float, float]:
        return (self.width / 2.0, self.height / 2.0)

    @property
    def matrix(self) -> np.ndarray:
        cx, cy = self.principal_point
        return np.array([[self.f, 0.0, cx],
                         [0.0, self.f, cy],
                         [0.0, 0.0, 1.0]])

    @property
    def matrix_inv(self) -> np.ndarray:
        cx, cy = self.principal_point
        return np.array([[1.0 / self.f, 0.0, -cx / self.f],
                         [0.0, 1.0 / self.f, -cy / self.f],
                         [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class GimbalMotion:
    """Pan motion parameters: steering rate (deg/s), exposure (s), frame rate (fps)."""

    steering_rate: float
    exposure: float
    frame_rate: float

    def __post_init__(self):
        if self.steering_rate < 0:
            raise ValueError("steering rate must be >= 0")
        if self.exposure <= 0:
            raise ValueError("exposure must be positive")
        if self.frame_rate <= 0:
            raise ValueError("frame rate must be positive")

    @property
    def exposure_rotation(self) -> float:
        """Total rotation during one exposure, in radians."""
        return math.radians(self.steering_rate * self.exposure)


@dataclass(frozen=True)
class PsfSynthesisConfig:
    """Controls for PSF synthesis.

    anchor: (x, y) pixel where the PSF is evaluated; None means image center.
    oversample: rotation substep factor (samples per one-pixel-spread angle).
    max_spread_override: force the half-spread in pixels instead of deriving
    it from the motion.
    """

    anchor: tuple[float, float] | None = None
    oversample: int = 4
    max_spread_override: float | None = None

    def __post_init__(self):
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")
        if self.max_spread_override is not None and self.max_spread_override < 0:
            raise ValueError("max_spread_override must be >= 0")


def rotation_for_spread(spread_px: float, f: float, d_m: float = 0.0) -> float:
    """Rotation angle (radians) that displaces a pixel by ``spread_px``.

    theta = p_s * f / (f^2 + d_m^2), where d_m is the pixel's horizontal
    offset from the principal point.
    """
    if f <= 0:
        raise ValueError("focal length must be positive")
    if spread_px < 0:
        raise ValueError("pixel spread must be >= 0")
    if d_m < 0:
        raise ValueError("d_m must be >= 0")
    return spread_px * f / (f * f + d_m * d_m)


def max_spread(motion: GimbalMotion, f: float, d_m: float = 0.0) -> float:
    """Maximum pixel spread from the anchor over one exposure.

    s = (phi/2) * (f^2 + d_m^2) / f with phi the exposure rotation in
    radians; the factor 1/2 reflects the spread being measured from the
    track center.
    """
    if f <= 0:
        raise ValueError("focal length must be positive")
    phi = motion.exposure_rotation
    return (phi / 2.0) * (f * f + d_m * d_m) / f


def yaw_homography(intrinsics: CameraIntrinsics, theta: float) -> np.ndarray:
    """Pixel-coordinate mapping induced by a pure yaw rotation ``theta``.

    H = K R_y(theta) K^-1; positive theta displaces pixels toward +x.
    """
    if not abs(theta) < math.pi / 2:
        raise ValueError("|theta| must be < pi/2")
    c, s = math.cos(theta), math.sin(theta)
    rot_y = np.array([[c, 0.0, s],
                      [0.0, 1.0, 0.0],
                      [-s, 0.0, c]])
    return intrinsics.matrix @ rot_y @ intrinsics.matrix_inv


def synthesize_psf(intrinsics: CameraIntrinsics, motion: GimbalMotion,
                   config: PsfSynthesisConfig | None = None) -> Kernel:
    """Synthesize the yaw-pan blur kernel at an anchor pixel.

    Rotations are sampled uniformly over [-theta_max, +theta_max] (constant
    steering rate, track centered on the anchor) at a substep of the
    one-pixel-spread angle; each sampled rotation maps the anchor through
    the yaw homography and deposits equal weight at the mapped position by
    bilinear splatting.  The accumulated canvas is normalized to unit sum
    and trimmed of empty borders.
    """
    config = config or PsfSynthesisConfig()
    ax, ay = config.anchor if config.anchor is not None else intrinsics.principal_point
    if not (0 <= ax <= intrinsics.width - 1 and 0 <= ay <= intrinsics.height - 1):
        raise ValueError(f"anchor ({ax}, {ay}) outside image bounds")

    d_m = abs(ax - intrinsics.principal_point[0])
    if config.max_spread_override is not None:
        spread = config.max_spread_override
    else:
        spread = max_spread(motion, intrinsics.f, d_m)
    if spread <= 0:
        return Kernel.delta()

    theta_max = rotation_for_spread(spread, intrinsics.f, d_m)
    theta_one = rotation_for_spread(1.0, intrinsics.f, d_m)
    half_steps = max(1, math.ceil(theta_max / (theta_one / config.oversample)))
    thetas = np.linspace(-theta_max, theta_max, 2 * half_steps + 1)

    side = 2 * (math.ceil(spread) + 1) + 1
    center = side // 2
    canvas = np.zeros((side, side))
    anchor_h = np.array([ax, ay, 1.0])
    xs = np.empty(thetas.size)
    ys = np.empty(thetas.size)
    for i, theta in enumerate(thetas):
        mapped = yaw_homography(intrinsics, theta) @ anchor_h
        xs[i] = mapped[0] / mapped[2]
        ys[i] = mapped[1] / mapped[2]
    _splat_bilinear(canvas, xs - ax + center, ys - ay + center,
                    np.full(thetas.size, 1.0 / thetas.size))
    # tol absorbs splat dust (~1e-17) from homography round-off
    return Kernel.from_weights(canvas).trimmed(tol=1e-12)


def default_anchors(intrinsics: CameraIntrinsics) -> list[tuple[float, float]]:
    """Center plus the four frame corners: the standard 5-anchor set."""
    w, h = intrinsics.width, intrinsics.height
    cx, cy = intrinsics.principal_point
    return [(cx, cy), (0.0, 0.0), (w - 1.0, 0.0), (0.0, h - 1.0), (w - 1.0, h - 1.0)]


def psf_grid(intrinsics: CameraIntrinsics, motion: GimbalMotion,
             anchors: list[tuple[float, float]] | None = None,
             config: PsfSynthesisConfig | None = None) -> Kernel:
    """Average of per-anchor kernels, re-normalized.

    Kernels of different sizes are zero-padded to the largest support
    (center-aligned) before averaging.  Default anchors are the image
    center and the four corners.
    """
    base = config or PsfSynthesisConfig()
    if anchors is None:
        anchors = default_anchors(intrinsics)
    if not anchors:
        raise ValueError("at least one anchor is required")
    kernels = [
        synthesize_psf(intrinsics, motion,
                       PsfSynthesisConfig(anchor=tuple(a),
                                          oversample=base.oversample,
                                          max_spread_override=base.max_spread_override))
        for a in anchors
    ]
    return average_kernels(kernels)


def average_kernels(kernels: list[Kernel]) -> Kernel:
    """Element-wise mean of center-aligned kernels, padded to a common size."""
    if not kernels:
        raise ValueError("no kernels to average")
    sy = max(k.size_y for k in kernels)
    sx = max(k.size_x for k in kernels)
    acc = np.zeros((sy, sx))
    for k in kernels:
        oy = (sy - k.size_y) // 2
        ox = (sx - k.size_x) // 2
        acc[oy:oy + k.size_y, ox:ox + k.size_x] += k.weights
    return Kernel.from_weights(acc / len(kernels))
