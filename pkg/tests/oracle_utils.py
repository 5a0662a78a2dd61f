"""Independent oracles used by the test suite.

These deliberately avoid the library's computation paths: convolution is
re-done by shifted sums / nested loops, the PSF oracle builds its own
projection matrices and inverse-warps a rendered impulse, SSIM walks
windows explicitly.  They must stay independent of the code they check.
"""

from __future__ import annotations

import math

import numpy as np


def direct_convolve_loops(image: np.ndarray, weights: np.ndarray,
                          boundary: str = "replicate") -> np.ndarray:
    """Nested-loop 2-D convolution for small inputs."""
    h, w = image.shape
    ky, kx = weights.shape
    cy, cx = ky // 2, kx // 2
    out = np.zeros_like(image, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(ky):
                for j in range(kx):
                    yy = y - (i - cy)
                    xx = x - (j - cx)
                    if boundary == "replicate":
                        yy = min(max(yy, 0), h - 1)
                        xx = min(max(xx, 0), w - 1)
                    elif boundary == "periodic":
                        yy %= h
                        xx %= w
                    elif boundary == "symmetric":
                        yy = _mirror(yy, h)
                        xx = _mirror(xx, w)
                    else:
                        raise ValueError(boundary)
                    acc += weights[i, j] * image[yy, xx]
            out[y, x] = acc
    return out


def _mirror(i: int, n: int) -> int:
    period = 2 * n
    i %= period
    if i < 0:
        i += period
    return i if i < n else period - 1 - i


def shifted_sum_convolve(image: np.ndarray, weights: np.ndarray,
                         boundary: str = "symmetric") -> np.ndarray:
    """Vectorized independent convolution: pad, then sum shifted slices."""
    pad_mode = {"replicate": "edge", "symmetric": "symmetric",
                "periodic": "wrap"}[boundary]
    ky, kx = weights.shape
    cy, cx = ky // 2, kx // 2
    padded = np.pad(image, ((cy, ky - 1 - cy), (cx, kx - 1 - cx)), mode=pad_mode)
    h, w = image.shape
    out = np.zeros((h, w))
    for i in range(ky):
        for j in range(kx):
            # kernel tap (i, j) multiplies image shifted by -(i-cy, j-cx)
            out += weights[i, j] * padded[ky - 1 - i:ky - 1 - i + h,
                                          kx - 1 - j:kx - 1 - j + w]
    return out


def warp_psf_oracle(fov_deg: float, width: int, height: int,
                    steering_rate: float, exposure: float,
                    anchor: tuple[int, int], half_window: int,
                    samples: int = 501) -> np.ndarray:
    """Dense image-warping PSF oracle.

    Renders an impulse at integer pixel ``anchor``, warps it by the yaw
    homography for each sampled rotation (inverse bilinear warping, the
    standard image-resampling form), averages the warps and crops a
    (2*half_window+1)^2 patch around the impulse.  All matrices are built
    here from scratch.
    """
    f = math.hypot(width, height) / (2.0 * math.tan(math.radians(fov_deg) / 2.0))
    K = np.array([[f, 0, width / 2.0], [0, f, height / 2.0], [0, 0, 1.0]])
    K_inv = np.linalg.inv(K)
    phi = math.radians(steering_rate * exposure)
    theta_max = phi / 2.0
    thetas = np.linspace(-theta_max, theta_max, samples)

    ax, ay = anchor
    size = 2 * half_window + 1
    ys, xs = np.mgrid[-half_window:half_window + 1, -half_window:half_window + 1]
    targets = np.stack([xs.ravel() + ax, ys.ravel() + ay,
                        np.ones(size * size)])

    acc = np.zeros(size * size)
    for theta in thetas:
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
        h_inv = K @ rot.T @ K_inv  # inverse of K R K^-1
        src = h_inv @ targets
        sx = src[0] / src[2]
        sy = src[1] / src[2]
        # bilinear sample of an impulse image: tent weight around the anchor
        acc += (np.maximum(0.0, 1.0 - np.abs(sx - ax))
                * np.maximum(0.0, 1.0 - np.abs(sy - ay)))
    psf = acc.reshape(size, size)
    return psf / psf.sum()


def l1_center_aligned(a: np.ndarray, b: np.ndarray) -> float:
    """L1 distance between center-aligned odd-sized kernels."""
    ea, eb = pad_to_common(a, b)
    return float(np.abs(ea - eb).sum())


def pad_to_common(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sy = max(a.shape[0], b.shape[0])
    sx = max(a.shape[1], b.shape[1])

    def embed(k):
        out = np.zeros((sy, sx))
        oy = (sy - k.shape[0]) // 2
        ox = (sx - k.shape[1]) // 2
        out[oy:oy + k.shape[0], ox:ox + k.shape[1]] = k
        return out

    return embed(a), embed(b)


def kernel_ncc(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized cross-correlation of center-aligned kernels."""
    ea, eb = pad_to_common(a, b)
    ea = ea - ea.mean()
    eb = eb - eb.mean()
    denom = np.linalg.norm(ea) * np.linalg.norm(eb)
    return float((ea * eb).sum() / denom)


def ssim_direct(x: np.ndarray, y: np.ndarray, window_size: int = 11,
                sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03,
                dynamic_range: float = 1.0) -> float:
    """Sliding-window SSIM computed with explicit loops."""
    r = np.arange(window_size) - window_size // 2
    g = np.exp(-0.5 * (r / sigma) ** 2)
    win = np.outer(g, g)
    win /= win.sum()
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    h, w = x.shape
    values = []
    for i in range(h - window_size + 1):
        for j in range(w - window_size + 1):
            px = x[i:i + window_size, j:j + window_size]
            py = y[i:i + window_size, j:j + window_size]
            mx = (win * px).sum()
            my = (win * py).sum()
            vx = (win * px * px).sum() - mx * mx
            vy = (win * py * py).sum() - my * my
            vxy = (win * px * py).sum() - mx * my
            values.append(((2 * mx * my + c1) * (2 * vxy + c2))
                          / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return float(np.mean(values))


def moment_support_length(weights: np.ndarray) -> float:
    """Blur-track length estimate from the second moment along x.

    For a uniform segment convolved with the bilinear splat tent, the
    variance is len^2/12 + tent variance, so sqrt(12 var) estimates the
    segment length without pixel-quantization jumps.
    """
    mass = weights.sum(axis=0)
    mass = mass / mass.sum()
    xs = np.arange(mass.size, dtype=np.float64)
    mean = (xs * mass).sum()
    var = ((xs - mean) ** 2 * mass).sum()
    return math.sqrt(max(12.0 * var, 0.0))
