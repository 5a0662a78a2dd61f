"""Kernel estimation from blur-sharp pairs and pair-dataset generation."""

import json

import numpy as np
import pytest

from conftest import motion
from gimbaldeblur import (EstimationConfig, IllPosedError, Kernel, NoiseSpec,
                          PairSpec, add_awgn, average_frames, build_pair_dataset,
                          convolve, estimate_kernel, frames_for_steering)
from gimbaldeblur.scenes import random_scene, write_frame_sequence
from oracle_utils import kernel_ncc, pad_to_common


class TestFramesForSteering:
    @pytest.mark.parametrize("rate,expected", [(60, 9), (50, 8), (40, 6), (30, 5)])
    def test_reference_rates(self, rate, expected):
        assert frames_for_steering(motion(rate)) == expected

    def test_half_up_rounding(self):
        # 50 deg/s gives 7.5 frames: rounds up, not to even
        assert frames_for_steering(motion(50)) == 8

    @pytest.mark.parametrize("rate,expected", [(10, 2), (20, 3)])
    def test_low_rates_follow_formula(self, rate, expected):
        # The formula gives 1.5 and 3.0 here; the reference experiments
        # used 3 and 4 (chosen empirically), a documented deviation.  The
        # computed value is exposed and callers may override N.
        assert frames_for_steering(motion(rate)) == expected

    def test_clamped_to_one(self):
        assert frames_for_steering(motion(0.1)) == 1


class TestPairSpec:
    @pytest.mark.parametrize("n,center", [(1, 1), (5, 3), (6, 4), (9, 5), (2, 2)])
    def test_center_index(self, n, center):
        assert PairSpec(n).center_index == center

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            PairSpec(0)


class TestAverageFrames:
    def test_single_frame(self, rng):
        frame = rng.random((8, 8))
        blurred, sharp = average_frames([frame], PairSpec(1))
        np.testing.assert_array_equal(blurred, frame)
        np.testing.assert_array_equal(sharp, frame)

    def test_constant_frames_mean(self):
        frames = [np.full((4, 4), v) for v in (0.2, 0.4, 0.6)]
        blurred, sharp = average_frames(frames, PairSpec(3))
        np.testing.assert_allclose(blurred, 0.4)
        np.testing.assert_allclose(sharp, 0.4)

    def test_center_selection(self, rng):
        frames = [rng.random((6, 6)) for _ in range(5)]
        _, sharp = average_frames(frames, PairSpec(5))
        np.testing.assert_array_equal(sharp, frames[2])

    def test_count_mismatch_rejected(self, rng):
        with pytest.raises(ValueError, match="expected"):
            average_frames([rng.random((4, 4))], PairSpec(3))

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError, match="shape"):
            average_frames([rng.random((4, 4)), rng.random((4, 5)),
                            rng.random((4, 4))], PairSpec(3))


class TestEstimateKernel:
    def test_identity_pair_gives_delta(self):
        sharp = random_scene(96, 96, seed=3)
        cfg = EstimationConfig(kernel_size=9, max_iters=60)
        kernel = estimate_kernel(sharp, sharp, cfg)
        assert kernel.weights[4, 4] >= 0.95

    def test_recovers_diagonal_line(self):
        sharp = random_scene(256, 256, seed=11)
        true = Kernel.line(21, 30.0)
        blurred = convolve(sharp, true, boundary="symmetric")
        kernel = estimate_kernel(blurred, sharp, EstimationConfig(kernel_size=23))
        assert kernel_ncc(kernel.weights, true.weights) >= 0.95

    def test_recovers_gaussian(self):
        sharp = random_scene(192, 192, seed=4)
        true = Kernel.gaussian(7, 1.5)
        blurred = convolve(sharp, true, boundary="symmetric")
        est = estimate_kernel(blurred, sharp, EstimationConfig(kernel_size=7))
        a, b = pad_to_common(est.weights, true.weights)
        assert np.linalg.norm(a - b) <= 0.05

    def test_flat_sharp_image_rejected(self):
        flat = np.full((64, 64), 0.5)
        with pytest.raises(IllPosedError):
            estimate_kernel(flat, flat, EstimationConfig(kernel_size=5))

    def test_monotone_residual_and_projection(self):
        sharp = random_scene(128, 128, seed=9)
        true = Kernel.line(9, 15.0)
        blurred = convolve(sharp, true, boundary="symmetric")
        _, history = estimate_kernel(blurred, sharp,
                                     EstimationConfig(kernel_size=11),
                                     return_history=True)
        residuals = [h.residual for h in history]
        assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))
        for stats in history:
            assert stats.min_weight >= 0.0
            assert abs(stats.weight_sum - 1.0) <= 1e-9

    def test_residual_not_above_initial_guess(self):
        sharp = random_scene(96, 96, seed=6)
        blurred = convolve(sharp, Kernel.gaussian(5, 1.0), boundary="symmetric")
        _, history = estimate_kernel(blurred, sharp,
                                     EstimationConfig(kernel_size=7, max_iters=1),
                                     return_history=True)
        assert history[-1].residual <= history[0].residual

    def test_shift_equivariance_periodic(self):
        sharp = random_scene(128, 128, seed=21)
        true = Kernel.line(9, 40.0)
        blurred = convolve(sharp, true, boundary="periodic")
        cfg = EstimationConfig(kernel_size=13)
        base = estimate_kernel(blurred, sharp, cfg)
        shifted = estimate_kernel(np.roll(blurred, (5, -7), axis=(0, 1)),
                                  np.roll(sharp, (5, -7), axis=(0, 1)), cfg)
        assert np.linalg.norm(base.weights - shifted.weights) <= 1e-3

    def test_noise_robustness_soft(self):
        sharp = random_scene(256, 256, seed=11)
        true = Kernel.line(21, 30.0)
        blurred = convolve(sharp, true, boundary="symmetric")
        cfg = EstimationConfig(kernel_size=23)
        clean_ncc = kernel_ncc(estimate_kernel(blurred, sharp, cfg).weights,
                               true.weights)
        noisy = add_awgn(blurred, NoiseSpec(38.0, seed=2))
        noisy_ncc = kernel_ncc(estimate_kernel(noisy, sharp, cfg).weights,
                               true.weights)
        assert clean_ncc - noisy_ncc <= 0.1

    def test_kernel_size_validation(self):
        with pytest.raises(ValueError):
            EstimationConfig(kernel_size=8)
        sharp = random_scene(16, 16, seed=0)
        with pytest.raises(ValueError, match="kernel_size"):
            estimate_kernel(sharp, sharp, EstimationConfig(kernel_size=21))


class TestBuildPairDataset:
    def test_window_count_and_manifest(self, tmp_path):
        write_frame_sequence(tmp_path / "frames", 20, 48, 40, seed=5)
        manifest = build_pair_dataset(tmp_path / "frames", [motion(60.0)],
                                      tmp_path / "pairs")
        records = [json.loads(line) for line in manifest.read_text().splitlines()]
        pairs = [r for r in records if "blur_path" in r]
        assert len(pairs) == 20 // 9
        for rec in pairs:
            assert rec["N"] == 9
            assert rec["steering_rate_deg_s"] == 60.0
            assert len(rec["source_indices"]) == 9
            assert (tmp_path / "pairs").joinpath(
                rec["blur_path"].split("/")[-1]).exists()

    def test_short_sequence_warns(self, tmp_path):
        write_frame_sequence(tmp_path / "frames", 4, 32, 32, seed=5)
        manifest = build_pair_dataset(tmp_path / "frames", [motion(60.0)],
                                      tmp_path / "pairs")
        records = [json.loads(line) for line in manifest.read_text().splitlines()]
        assert len(records) == 1
        assert "warning" in records[0]

    def test_unit_window_pairs_frame_with_itself(self, tmp_path):
        write_frame_sequence(tmp_path / "frames", 3, 32, 32, seed=5)
        manifest = build_pair_dataset(tmp_path / "frames", [motion(0.5)],
                                      tmp_path / "pairs")
        records = [json.loads(line) for line in manifest.read_text().splitlines()]
        assert all(r["N"] == 1 for r in records)
        from gimbaldeblur import load_image
        blur = load_image(records[0]["blur_path"])
        sharp = load_image(records[0]["sharp_path"])
        np.testing.assert_array_equal(blur, sharp)
