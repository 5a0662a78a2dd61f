"""AWGN synthesis: SNR calibration and determinism."""

import math

import numpy as np
import pytest

from gimbaldeblur import NoiseSpec, add_awgn, measure_snr_db


def test_infinite_snr_is_identity(rng):
    img = rng.random((32, 32))
    out = add_awgn(img, NoiseSpec(math.inf))
    np.testing.assert_array_equal(out, img)


def test_snr_calibration_on_frame_sized_image(rng):
    img = 0.2 + 0.6 * rng.random((481, 558))
    noisy = add_awgn(img, NoiseSpec(38.0, seed=7))
    measured = measure_snr_db(img, noisy)
    assert 37.7 <= measured <= 38.3


@pytest.mark.parametrize("snr_db", (32.0, 35.0, 38.0))
def test_snr_within_tolerance_at_256(rng, snr_db):
    img = 0.1 + 0.8 * rng.random((256, 256))
    for seed in (0, 1):
        noisy = add_awgn(img, NoiseSpec(snr_db, seed=seed))
        assert abs(measure_snr_db(img, noisy) - snr_db) <= 0.3


def test_same_seed_bit_identical(rng):
    img = rng.random((64, 64))
    a = add_awgn(img, NoiseSpec(35.0, seed=123))
    b = add_awgn(img, NoiseSpec(35.0, seed=123))
    np.testing.assert_array_equal(a, b)


def test_different_seed_differs(rng):
    img = rng.random((64, 64))
    a = add_awgn(img, NoiseSpec(35.0, seed=1))
    b = add_awgn(img, NoiseSpec(35.0, seed=2))
    assert not np.array_equal(a, b)


def test_all_zero_image_rejected():
    with pytest.raises(ValueError, match="zero"):
        add_awgn(np.zeros((16, 16)), NoiseSpec(30.0))


def test_nan_snr_rejected():
    with pytest.raises(ValueError):
        NoiseSpec(math.nan)


def test_measure_snr_identical_is_infinite(rng):
    img = rng.random((8, 8))
    assert measure_snr_db(img, img) == math.inf
