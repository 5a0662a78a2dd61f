"""PSNR / SSIM contracts against direct oracles."""

import math

import numpy as np
import pytest

from gimbaldeblur import SsimConfig, psnr, ssim
from oracle_utils import ssim_direct


class TestPsnr:
    def test_identical_images_infinite(self, rng):
        img = rng.random((16, 16))
        assert psnr(img, img) == math.inf

    def test_constant_offset_closed_form(self):
        ref = np.full((32, 32), 0.5)
        x = np.full((32, 32), 0.6)
        assert psnr(x, ref) == pytest.approx(20.0, abs=1e-9)

    def test_against_double_loop_mse(self, rng):
        x = rng.random((12, 14))
        ref = rng.random((12, 14))
        acc = 0.0
        for i in range(12):
            for j in range(14):
                acc += (x[i, j] - ref[i, j]) ** 2
        expected = 10.0 * math.log10(1.0 / (acc / (12 * 14)))
        assert psnr(x, ref) == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self, rng):
        x = rng.random((16, 16))
        y = rng.random((16, 16))
        assert psnr(x, y) == psnr(y, x)

    def test_translation_invariance(self, rng):
        x = rng.random((16, 16))
        y = rng.random((16, 16))
        assert psnr(x + 0.1, y + 0.1) == pytest.approx(psnr(x, y), abs=1e-9)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError, match="shape"):
            psnr(rng.random((8, 8)), rng.random((8, 9)))


class TestSsim:
    def test_identical_images_one(self, rng):
        img = rng.random((24, 24))
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)

    def test_inverted_structure_negative(self, rng):
        pattern = 0.5 + 0.4 * np.sin(np.linspace(0, 14 * np.pi, 32))
        ref = np.tile(pattern, (32, 1))
        assert ssim(1.0 - ref, ref) < 0.0

    def test_against_sliding_window_oracle(self, rng):
        x = rng.random((32, 32))
        y = np.clip(x + 0.08 * rng.standard_normal((32, 32)), 0, 1)
        assert ssim(x, y) == pytest.approx(ssim_direct(x, y), abs=1e-6)

    def test_argument_swap_invariance(self, rng):
        x = rng.random((24, 24))
        y = rng.random((24, 24))
        assert ssim(x, y) == pytest.approx(ssim(y, x), abs=1e-12)

    def test_too_small_rejected(self, rng):
        with pytest.raises(ValueError, match="at least"):
            ssim(rng.random((8, 8)), rng.random((8, 8)))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SsimConfig(window_size=10)
        with pytest.raises(ValueError):
            SsimConfig(k1=0.0)

    def test_in_valid_range(self, rng):
        x = rng.random((20, 20))
        y = rng.random((20, 20))
        value = ssim(x, y)
        assert -1.0 <= value <= 1.0
