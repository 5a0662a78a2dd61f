"""PSF-aware motion deblurring for yaw-panning gimbal cameras.

The blur kernel of a pure-yaw pan is predictable: it can be synthesized
in closed form from the camera intrinsics and steering rate
(``psf_analytic``) or estimated once from a blur-sharp frame pair
(``psf_estimate``), after which frames are deblurred in real time with
non-blind deconvolution (``deconv``) driven by a steering-rate lookup
table (``pipeline``).
"""

from .core import (GrayImage, Kernel, NoiseSpec, add_awgn, convolve,
                   load_image, load_psf_text, measure_snr_db, save_image,
                   save_psf_text)
from .deconv import (EdgeTaperSpec, HyperLapParams, RlParams, WienerParams,
                     deblur, edge_taper, hyperlap_deblur, nsr_from_snr_db,
                     rl_deblur, shrink, wiener_deblur)
from .errors import (GimbalDeblurError, IllPosedError, ImageFormatError,
                     LutMissError, UnsupportedFormatError)
from .metrics import SsimConfig, psnr, ssim
from .pipeline import (PipelineConfig, PsfLut, TimingReport, bench, build_lut,
                       run_pipeline)
from .psf_analytic import (CameraIntrinsics, GimbalMotion, PsfSynthesisConfig,
                           focal_from_fov, max_spread, psf_grid,
                           rotation_for_spread, synthesize_psf, yaw_homography)
from .psf_estimate import (EstimationConfig, PairSpec, average_frames,
                           build_pair_dataset, estimate_kernel,
                           frames_for_steering)

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics",
    "EdgeTaperSpec",
    "EstimationConfig",
    "GimbalDeblurError",
    "GimbalMotion",
    "GrayImage",
    "HyperLapParams",
    "IllPosedError",
    "ImageFormatError",
    "Kernel",
    "LutMissError",
    "NoiseSpec",
    "PairSpec",
    "PipelineConfig",
    "PsfLut",
    "PsfSynthesisConfig",
    "RlParams",
    "SsimConfig",
    "TimingReport",
    "UnsupportedFormatError",
    "WienerParams",
    "add_awgn",
    "average_frames",
    "bench",
    "build_lut",
    "build_pair_dataset",
    "convolve",
    "deblur",
    "edge_taper",
    "estimate_kernel",
    "focal_from_fov",
    "frames_for_steering",
    "hyperlap_deblur",
    "load_image",
    "load_psf_text",
    "max_spread",
    "measure_snr_db",
    "nsr_from_snr_db",
    "psf_grid",
    "psnr",
    "rl_deblur",
    "rotation_for_spread",
    "run_pipeline",
    "save_image",
    "save_psf_text",
    "shrink",
    "ssim",
    "synthesize_psf",
    "wiener_deblur",
    "yaw_homography",
]
