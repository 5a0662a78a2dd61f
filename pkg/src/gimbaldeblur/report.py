"""Report rendering: CSV tables and the matplotlib figures beside them.

Every CLI path that writes a delimited report also renders a PNG figure
next to it, so runs can be inspected without re-parsing the numbers.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .core.kernel import Kernel  # noqa: E402
from .pipeline import TimingReport  # noqa: E402


def figure_path_for(report_path, suffix: str = "") -> Path:
    p = Path(report_path)
    return p.with_name(p.stem + (f"_{suffix}" if suffix else "") + ".png")


def write_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    if rows:
        fieldnames = list(rows[0].keys())
        for row in rows[1:]:
            for key in row:
                if key not in fieldnames:
                    fieldnames.append(key)
    else:
        fieldnames = []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return path


def save_timing_figure(report: TimingReport, path) -> Path:
    """Per-frame time trace for one pipeline run."""
    names = sorted(report.per_frame_ms)
    values = [report.per_frame_ms[n] for n in names]
    fig, ax = plt.subplots(figsize=(8, 4))
    if values:
        ax.plot(range(1, len(values) + 1), values, marker=".", lw=1)
        ax.axhline(report.mean_frame_ms, color="r", ls="--", lw=1,
                   label=f"mean {report.mean_frame_ms:.1f} ms")
        ax.legend()
    ax.set_xlabel("frame")
    ax.set_ylabel("ms")
    ax.set_title(f"{report.method}, {report.workers} worker(s), "
                 f"{report.fps:.1f} fps")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_bench_figure(rows: list[dict], path) -> Path:
    """Grouped bars of ms/frame per method and protocol."""
    protocols = sorted({r["protocol"] for r in rows})
    methods = list(dict.fromkeys(r["method"] for r in rows))
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(len(protocols), 1)
    x = np.arange(len(methods))
    for i, protocol in enumerate(protocols):
        values = []
        for m in methods:
            match = [r for r in rows if r["method"] == m and r["protocol"] == protocol]
            values.append(match[0]["ms_per_frame"] if match else 0.0)
        ax.bar(x + i * width, values, width, label=protocol)
    ax.set_xticks(x + width * (len(protocols) - 1) / 2)
    ax.set_xticklabels(methods)
    ax.set_ylabel("ms / frame")
    ax.set_title("Deblurring time per frame")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_eval_figure(rows: list[dict], path) -> Path:
    """PSNR / SSIM summary bars per method."""
    methods = sorted({r.get("method", "") for r in rows})
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, metric in zip(axes, ("psnr_db", "ssim")):
        means = []
        for m in methods:
            vals = [float(r[metric]) for r in rows
                    if r.get("method", "") == m and np.isfinite(float(r[metric]))]
            means.append(np.mean(vals) if vals else 0.0)
        ax.bar(methods, means)
        ax.set_title(metric)
        ax.grid(True, axis="y", alpha=0.3)
        ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_kernel_figure(kernel: Kernel, path, title: str = "PSF") -> Path:
    """Intensity map of a kernel, for LUT/synthesis inspection."""
    fig, ax = plt.subplots(figsize=(4, 4))
    im = ax.imshow(kernel.weights, cmap="magma", interpolation="nearest")
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(f"{title} ({kernel.size_x}x{kernel.size_y})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
