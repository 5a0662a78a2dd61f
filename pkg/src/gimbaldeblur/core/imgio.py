"""Grayscale raster file I/O.

Binary PGM ("P5", 8- or 16-bit big-endian) is the canonical format; PNG
grayscale is accepted for ingestion.  Loaded values are scaled to [0, 1]
by the file's maxval; writing quantizes to the requested bit depth.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ImageFormatError, UnsupportedFormatError
from .image import as_image

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def save_pgm(image, path, bit_depth: int = 16) -> None:
    """Write ``image`` as binary PGM, clipping to [0, 1] before quantizing."""
    img = as_image(image)
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    maxval = (1 << bit_depth) - 1
    quantized = np.rint(np.clip(img, 0.0, 1.0) * maxval)
    h, w = img.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    payload = quantized.astype(">u2" if bit_depth == 16 else "u1").tobytes()
    Path(path).write_bytes(header + payload)


def load_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise UnsupportedFormatError(f"{path}: not a binary PGM (magic {data[:2]!r})")
    fields, offset = _read_header_tokens(data, 2, count=3, path=path)
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: non-positive dimensions {width}x{height}")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: maxval {maxval} out of range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise ImageFormatError(
            f"{path}: truncated payload ({len(payload)} of {expected} bytes "
            f"for {width}x{height})")
    raw = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return raw.astype(np.float64) / maxval


def _read_header_tokens(data: bytes, offset: int, count: int, path) -> tuple[list[int], int]:
    """Parse whitespace/comment-separated integer header fields.

    Returns the fields and the offset of the first payload byte (one
    whitespace character past the last field, per the PGM spec).
    """
    fields: list[int] = []
    i = offset
    n = len(data)
    while len(fields) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] not in (0x0A, 0x0D):
                i += 1
            continue
        start = i
        while i < n and not data[i:i + 1].isspace():
            i += 1
        token = data[start:i]
        if not token:
            raise ImageFormatError(f"{path}: header ended before {count} fields")
        try:
            fields.append(int(token))
        except ValueError as exc:
            raise ImageFormatError(f"{path}: bad header field {token!r}") from exc
    if i >= n or not data[i:i + 1].isspace():
        raise ImageFormatError(f"{path}: header not terminated by whitespace")
    return fields, i + 1


def _load_png(path) -> np.ndarray:
    from PIL import Image as PilImage

    try:
        with PilImage.open(path) as im:
            mode = im.mode
            if mode in ("1", "L"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            elif mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            else:
                raise UnsupportedFormatError(
                    f"{path}: PNG mode {mode!r} is not grayscale")
    except UnsupportedFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: failed to decode PNG ({exc})") from exc
    if arr.ndim != 2:
        raise UnsupportedFormatError(f"{path}: PNG has {arr.ndim} dimensions")
    return arr


def load_image(path) -> np.ndarray:
    """Load a grayscale raster, sniffing the format from its magic bytes."""
    p = Path(path)
    with open(p, "rb") as fh:
        magic = fh.read(8)
    if magic[:2] == b"P5":
        return load_pgm(p)
    if magic == _PNG_SIGNATURE:
        return _load_png(p)
    raise UnsupportedFormatError(f"{path}: unrecognized raster format")


def save_image(image, path, bit_depth: int = 16) -> None:
    """Write a grayscale raster; only the canonical PGM format is emitted."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix in ("", ".pgm"):
        save_pgm(image, p, bit_depth=bit_depth)
    else:
        raise UnsupportedFormatError(
            f"{path}: writing {suffix!r} is not supported (use .pgm)")
