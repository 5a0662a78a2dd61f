import numpy as np
import pytest

from gimbaldeblur import CameraIntrinsics, GimbalMotion

# The reference camera used throughout: 8 degree diagonal FOV, 558x481
# frames, 5 ms exposure at 30 fps.
FOV_DEG = 8.0
FRAME_W = 558
FRAME_H = 481
EXPOSURE_S = 0.005
FRAME_RATE = 30.0


@pytest.fixture
def camera() -> CameraIntrinsics:
    return CameraIntrinsics.from_fov(FOV_DEG, FRAME_W, FRAME_H)


@pytest.fixture
def motion60() -> GimbalMotion:
    return GimbalMotion(60.0, EXPOSURE_S, FRAME_RATE)


def motion(rate: float) -> GimbalMotion:
    return GimbalMotion(rate, EXPOSURE_S, FRAME_RATE)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
