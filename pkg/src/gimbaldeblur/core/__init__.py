"""Image/kernel value types, convolution, noise synthesis, and file I/O."""

from .convolve import boundary_modes, convolve, crop_padded, otf, pad_for_fft
from .image import GrayImage, as_image, require_same_shape, validate_image
from .imgio import load_image, load_pgm, save_image, save_pgm
from .kernel import Kernel, load_psf_text, save_psf_text
from .noise import NoiseSpec, add_awgn, measure_snr_db

__all__ = [
    "GrayImage",
    "Kernel",
    "NoiseSpec",
    "add_awgn",
    "as_image",
    "boundary_modes",
    "convolve",
    "crop_padded",
    "load_image",
    "load_pgm",
    "load_psf_text",
    "measure_snr_db",
    "otf",
    "pad_for_fft",
    "require_same_shape",
    "save_image",
    "save_pgm",
    "save_psf_text",
    "validate_image",
]
