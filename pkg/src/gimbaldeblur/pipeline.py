"""Deployable layer: PSF lookup table, parallel frame deblurring, benchmarks.

The lookup table maps quantized steering rates to precomputed kernels so
a video stream can be deblurred without any per-frame kernel estimation.
Frames are independent, so the runner parallelizes at frame granularity
with a process pool; outputs are written by frame name and are
bit-identical for any worker count.
"""

from __future__ import annotations

import json
import logging
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .core.imgio import load_image, save_pgm
from .core.kernel import Kernel, load_psf_text, save_psf_text
from .deconv import deblur, method_names
from .errors import GimbalDeblurError, LutMissError
from .psf_analytic import CameraIntrinsics, GimbalMotion, PsfSynthesisConfig, psf_grid
from .psf_estimate import (EstimationConfig, PairSpec, average_frames,
                           estimate_kernel, frames_for_steering, list_frames)

log = logging.getLogger(__name__)

_LUT_INDEX_NAME = "index.json"

PROVENANCE_ANALYTIC = "analytic"
PROVENANCE_PAIR = "blur-sharp-pair"


def rate_key(steering_rate: float) -> str:
    """Steering rates are quantized to 0.1 deg/s for LUT keys."""
    return f"{round(float(steering_rate), 1):.1f}"


@dataclass
class PsfLut:
    """Steering rate -> kernel map with per-entry provenance.

    Lookup of an absent rate raises ``LutMissError``; there is no silent
    interpolation between entries.
    """

    camera_id: str = "unknown"
    entries: dict[str, tuple[Kernel, str]] = field(default_factory=dict)

    def add(self, steering_rate: float, kernel: Kernel,
            provenance: str = PROVENANCE_ANALYTIC) -> None:
        self.entries[rate_key(steering_rate)] = (kernel, provenance)

    def get(self, steering_rate: float) -> Kernel:
        key = rate_key(steering_rate)
        try:
            return self.entries[key][0]
        except KeyError:
            raise LutMissError(key, available=sorted(self.entries)) from None

    def rates(self) -> list[float]:
        return sorted(float(k) for k in self.entries)

    def save(self, lut_dir) -> Path:
        """Persist as a directory: JSON index plus one kernel text file per rate."""
        lut_dir = Path(lut_dir)
        lut_dir.mkdir(parents=True, exist_ok=True)
        index = {"camera_id": self.camera_id, "entries": {}}
        for key in sorted(self.entries):
            kernel, provenance = self.entries[key]
            filename = f"sr_{key}.psf"
            save_psf_text(kernel, lut_dir / filename)
            index["entries"][key] = {"file": filename, "provenance": provenance}
        with open(lut_dir / _LUT_INDEX_NAME, "w") as fh:
            json.dump(index, fh, indent=2)
        return lut_dir

    @classmethod
    def load(cls, lut_dir) -> "PsfLut":
        lut_dir = Path(lut_dir)
        index_path = lut_dir / _LUT_INDEX_NAME
        if not index_path.is_file():
            raise GimbalDeblurError(f"{lut_dir}: not a PSF LUT (no {_LUT_INDEX_NAME})")
        with open(index_path) as fh:
            index = json.load(fh)
        lut = cls(camera_id=index.get("camera_id", "unknown"))
        for key, entry in index.get("entries", {}).items():
            kernel = load_psf_text(lut_dir / entry["file"])
            lut.entries[rate_key(float(key))] = (kernel,
                                                 entry.get("provenance", "unknown"))
        return lut


def build_lut(intrinsics: CameraIntrinsics | None,
              motions: list[GimbalMotion],
              mode: str = "analytic",
              frame_dir=None,
              estimation: EstimationConfig | None = None,
              synthesis: PsfSynthesisConfig | None = None,
              camera_id: str = "unknown") -> PsfLut:
    """Precompute one kernel per steering rate.

    analytic mode synthesizes the averaged multi-anchor kernel from the
    intrinsics; pairs mode estimates kernels from a slow-pan frame
    directory (rates the sequence is too short for are omitted and
    logged).
    """
    lut = PsfLut(camera_id=camera_id)
    if mode == "analytic":
        if intrinsics is None:
            raise ValueError("analytic mode requires camera intrinsics")
        for motion in motions:
            kernel = psf_grid(intrinsics, motion, config=synthesis)
            lut.add(motion.steering_rate, kernel, PROVENANCE_ANALYTIC)
    elif mode == "pairs":
        if frame_dir is None:
            raise ValueError("pairs mode requires a frame directory")
        frames = list_frames(frame_dir)
        for motion in motions:
            n = frames_for_steering(motion)
            if n > len(frames):
                log.warning("LUT entry for %s deg/s omitted: needs %d frames, "
                            "directory has %d", motion.steering_rate, n, len(frames))
                continue
            images = [load_image(p) for p in frames[:n]]
            blurred, sharp = average_frames(images, PairSpec(n))
            kernel = estimate_kernel(blurred, sharp, estimation)
            lut.add(motion.steering_rate, kernel, PROVENANCE_PAIR)
    else:
        raise ValueError(f"unknown LUT mode {mode!r}")
    return lut


@dataclass
class PipelineConfig:
    """One deblurring run over a frame directory."""

    input_dir: Path
    output_dir: Path
    steering_rate: float
    method: str = "wiener"
    params: object = None
    workers: int = 1
    taper: bool = True
    bit_depth: int = 16
    report_path: Path | None = None
    rates_sidecar: dict[int, float] | None = None  # 1-based frame index -> rate

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.method not in method_names():
            raise ValueError(f"unknown method {self.method!r}")


def _machine_note() -> str:
    return platform.processor() or platform.machine() or "unknown"


@dataclass
class TimingReport:
    """Wall-clock accounting for a pipeline run."""

    method: str
    workers: int
    frames: int = 0
    per_frame_ms: dict[str, float] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)
    total_seconds: float = 0.0
    machine: str = field(default_factory=_machine_note)

    @property
    def fps(self) -> float:
        return self.frames / self.total_seconds if self.total_seconds > 0 else 0.0

    @property
    def mean_frame_ms(self) -> float:
        if not self.per_frame_ms:
            return 0.0
        return sum(self.per_frame_ms.values()) / len(self.per_frame_ms)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "workers": self.workers,
            "frames": self.frames,
            "fps": self.fps,
            "total_seconds": self.total_seconds,
            "mean_frame_ms": self.mean_frame_ms,
            "machine": self.machine,
            "per_frame_ms": self.per_frame_ms,
            "skipped": self.skipped,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _process_frame(task) -> tuple[str, float | None, str | None]:
    """Worker body: load, deblur, save one frame.  Returns (name, ms, error)."""
    in_path, out_path, kernel, method, params, taper, bit_depth = task
    name = Path(in_path).name
    try:
        image = load_image(in_path)
        timings: list[dict] = []
        result = deblur(image, kernel, method, params=params, taper=taper,
                        timings=timings)
        save_pgm(result, out_path, bit_depth=bit_depth)
        return name, timings[0]["ms"], None
    except Exception as exc:  # frame-level fault tolerance
        return name, None, f"{type(exc).__name__}: {exc}"


def run_pipeline(cfg: PipelineConfig, lut: PsfLut) -> TimingReport:
    """Deblur every frame of a directory with the LUT kernel for its rate.

    The LUT must contain every needed steering rate before processing
    starts; unreadable frames are recorded and skipped.  Outputs are named
    after the inputs, so results do not depend on worker count or
    scheduling order.
    """
    frames = list_frames(cfg.input_dir)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # Resolve all kernels up front: a LUT miss aborts before any processing.
    sidecar = cfg.rates_sidecar or {}
    tasks = []
    for idx, frame in enumerate(frames, start=1):
        rate = sidecar.get(idx, cfg.steering_rate)
        kernel = lut.get(rate)
        tasks.append((str(frame), str(out_dir / (frame.stem + ".pgm")),
                      kernel, cfg.method, cfg.params, cfg.taper, cfg.bit_depth))

    report = TimingReport(method=cfg.method, workers=cfg.workers)
    start = time.perf_counter()
    if cfg.workers == 1:
        results = map(_process_frame, tasks)
        outcomes = list(results)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_process_frame, tasks))
    report.total_seconds = time.perf_counter() - start

    for name, ms, error in outcomes:
        if error is None:
            report.per_frame_ms[name] = ms
            report.frames += 1
        else:
            log.warning("frame %s skipped: %s", name, error)
            report.skipped.append(name)

    if cfg.report_path is not None:
        report.save(cfg.report_path)
    return report


STREAMING_FRAME_COUNT = 30
BATCH_FRAME_COUNT = 312

_EXPECTED_ORDER = ("wiener", "rl", "hyperlap")


def bench(input_dir, lut: PsfLut, steering_rate: float,
          methods: tuple[str, ...] = _EXPECTED_ORDER,
          workers: int = 1,
          protocols: dict[str, int] | None = None,
          work_dir=None) -> list[dict]:
    """Per-method timing comparison over the streaming/batch protocols.

    Returns one row per (method, protocol) with ms/frame and fps.  The
    expected speed ordering (wiener fastest, hyper-Laplacian slowest) is
    checked softly: violations warn but do not fail.
    """
    if not methods:
        raise ValueError("at least one method is required")
    protocols = protocols or {"streaming": STREAMING_FRAME_COUNT,
                              "batch": BATCH_FRAME_COUNT}
    frames = list_frames(input_dir)
    work_dir = Path(work_dir) if work_dir is not None else Path(input_dir) / "bench_out"
    rows = []
    for protocol, count in protocols.items():
        if count > len(frames):
            log.warning("protocol %r wants %d frames, directory has %d; using all",
                        protocol, count, len(frames))
            count = len(frames)
        subset_dir = work_dir / f"{protocol}_frames"
        subset_dir.mkdir(parents=True, exist_ok=True)
        for p in frames[:count]:
            target = subset_dir / p.name
            if not target.exists():
                try:
                    target.symlink_to(p.resolve())
                except OSError:
                    target.write_bytes(p.read_bytes())
        for method in methods:
            cfg = PipelineConfig(input_dir=subset_dir,
                                 output_dir=work_dir / f"{protocol}_{method}",
                                 steering_rate=steering_rate,
                                 method=method, workers=workers)
            report = run_pipeline(cfg, lut)
            rows.append({
                "method": method,
                "protocol": protocol,
                "frames": report.frames,
                "total_seconds": round(report.total_seconds, 6),
                "ms_per_frame": round(report.mean_frame_ms, 3),
                "fps": round(report.fps, 3),
            })
    _check_method_ordering(rows)
    return rows


def _check_method_ordering(rows: list[dict]) -> None:
    by_protocol: dict[str, dict[str, float]] = {}
    for row in rows:
        by_protocol.setdefault(row["protocol"], {})[row["method"]] = row["ms_per_frame"]
    for protocol, times in by_protocol.items():
        present = [m for m in _EXPECTED_ORDER if m in times]
        measured = [times[m] for m in present]
        if measured != sorted(measured):
            warnings.warn(
                f"{protocol}: per-frame times {times} violate the expected "
                "ordering wiener < rl < hyperlap", RuntimeWarning)
