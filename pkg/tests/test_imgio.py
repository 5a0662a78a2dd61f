"""PGM codec and PNG ingestion."""

import numpy as np
import pytest
from PIL import Image as PilImage

from gimbaldeblur import ImageFormatError, UnsupportedFormatError
from gimbaldeblur.core.imgio import load_image, load_pgm, save_image, save_pgm


def test_roundtrip_16bit_gradient(tmp_path):
    img = np.linspace(0.0, 1.0, 16).reshape(4, 4)
    path = tmp_path / "g.pgm"
    save_pgm(img, path, bit_depth=16)
    back = load_pgm(path)
    assert np.abs(back - img).max() <= 1.0 / 65535


def test_roundtrip_8bit(tmp_path):
    img = np.linspace(0.0, 1.0, 64).reshape(8, 8)
    path = tmp_path / "g8.pgm"
    save_pgm(img, path, bit_depth=8)
    back = load_pgm(path)
    assert np.abs(back - img).max() <= 1.0 / 255


def test_8bit_values_scaled_by_255(tmp_path):
    payload = bytes([0, 51, 102, 255])
    path = tmp_path / "raw.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + payload)
    img = load_pgm(path)
    np.testing.assert_allclose(img.ravel(), np.array(list(payload)) / 255.0)


def test_16bit_big_endian(tmp_path):
    path = tmp_path / "raw16.pgm"
    path.write_bytes(b"P5\n2 1\n65535\n" + (0).to_bytes(2, "big")
                     + (65535).to_bytes(2, "big"))
    img = load_pgm(path)
    np.testing.assert_allclose(img.ravel(), [0.0, 1.0])


def test_header_comments_and_whitespace(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n 2 \n# another\n2\n255\n" + bytes(4))
    img = load_pgm(path)
    assert img.shape == (2, 2)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + bytes(7))  # needs 16 bytes
    with pytest.raises(ImageFormatError, match="truncated"):
        load_pgm(path)


def test_inconsistent_header_rejected(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P5\n0 4\n255\n")
    with pytest.raises(ImageFormatError, match="dimensions"):
        load_pgm(path)
    path.write_bytes(b"P5\n2 2\n99999\n" + bytes(8))
    with pytest.raises(ImageFormatError, match="maxval"):
        load_pgm(path)


def test_unknown_magic_rejected(tmp_path):
    path = tmp_path / "x.pgm"
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(UnsupportedFormatError):
        load_pgm(path)
    path2 = tmp_path / "garbage.bin"
    path2.write_bytes(b"\x00\x01\x02\x03four567")
    with pytest.raises(UnsupportedFormatError):
        load_image(path2)


def test_png_grayscale_ingestion(tmp_path, rng):
    img8 = (rng.random((10, 12)) * 255).astype(np.uint8)
    path = tmp_path / "a.png"
    PilImage.fromarray(img8, mode="L").save(path)
    loaded = load_image(path)
    np.testing.assert_allclose(loaded, img8 / 255.0, atol=1e-12)


def test_png_color_rejected(tmp_path, rng):
    img = (rng.random((6, 6, 3)) * 255).astype(np.uint8)
    path = tmp_path / "rgb.png"
    PilImage.fromarray(img, mode="RGB").save(path)
    with pytest.raises(UnsupportedFormatError, match="grayscale"):
        load_image(path)


def test_save_image_dispatch(tmp_path, rng):
    img = rng.random((5, 5))
    save_image(img, tmp_path / "ok.pgm")
    assert (tmp_path / "ok.pgm").exists()
    with pytest.raises(UnsupportedFormatError):
        save_image(img, tmp_path / "no.tiff")


def test_values_clipped_on_save(tmp_path):
    img = np.array([[-0.5, 0.5], [1.5, 1.0]])
    path = tmp_path / "clip.pgm"
    save_pgm(img, path, bit_depth=8)
    back = load_pgm(path)
    np.testing.assert_allclose(back, [[0.0, 0.5], [1.0, 1.0]], atol=1 / 255)
