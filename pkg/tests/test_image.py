from __future__ import annotations

import json

import numpy as np
import pytest

from subtherm import (DimensionError, FormatError, GrayImage, ShiftSpec,
                      apply_brightness, clip_unit, export_scaled_pgm,
                      load_pgm, save_pgm, subpixel_shift)


def ramp(width=16, height=12):
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    return GrayImage((xx + yy * width) / (width * height))


def smooth_noise(width=32, height=24, seed=0, cutoff=0.2):
    """Band-limited random field, safe for exact Fourier translation."""
    rng = np.random.default_rng(seed)
    spectrum = np.fft.fft2(rng.normal(size=(height, width)))
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    spectrum[np.hypot(fx, fy) > cutoff] = 0.0
    field = np.fft.ifft2(spectrum).real
    field = (field - field.min()) / (field.max() - field.min() + 1e-12)
    return GrayImage(field)


# ---------------------------------------------------------------- GrayImage

def test_gray_image_is_float64_and_write_protected():
    img = ramp()
    assert img.pixels.dtype == np.float64
    assert not img.pixels.flags.writeable
    assert img.width == 16 and img.height == 12


def test_gray_image_rejects_bad_data():
    with pytest.raises(DimensionError):
        GrayImage(np.zeros(10))
    with pytest.raises(DimensionError):
        GrayImage(np.zeros((0, 5)))
    with pytest.raises(DimensionError):
        GrayImage(np.array([[1.0, np.nan], [0.0, 0.0]]))
    with pytest.raises(DimensionError):
        GrayImage(np.array([[1.0, np.inf], [0.0, 0.0]]))


# ---------------------------------------------------------------- PGM I/O

def test_pgm_binary_round_trip_8bit(tmp_path):
    img = ramp()
    path = tmp_path / "a.pgm"
    save_pgm(img, path, bit_depth=8)
    back = load_pgm(path)
    # 8-bit quantization: exact up to 1/255 steps
    assert np.array_equal(back.pixels, np.round(img.pixels * 255) / 255)


def test_pgm_binary_round_trip_16bit(tmp_path):
    img = ramp()
    path = tmp_path / "a.pgm"
    save_pgm(img, path, bit_depth=16)
    back = load_pgm(path)
    assert np.abs(back.pixels - img.pixels).max() <= 0.5 / 65535


def test_pgm_ascii_matches_binary(tmp_path):
    img = ramp()
    save_pgm(img, tmp_path / "bin.pgm", bit_depth=16)
    save_pgm(img, tmp_path / "asc.pgm", bit_depth=16, ascii_format=True)
    a = load_pgm(tmp_path / "bin.pgm")
    b = load_pgm(tmp_path / "asc.pgm")
    assert np.array_equal(a.pixels, b.pixels)
    assert (tmp_path / "asc.pgm").read_bytes().startswith(b"P2")
    assert (tmp_path / "bin.pgm").read_bytes().startswith(b"P5")


def test_pgm_ascii_comments_are_skipped(tmp_path):
    rows = "\n".join(" ".join("7" for _ in range(8)) for _ in range(8))
    text = "P2\n# a comment\n8 8\n# another\n255\n" + rows + "\n"
    path = tmp_path / "c.pgm"
    path.write_text(text)
    img = load_pgm(path)
    assert img.width == img.height == 8
    assert np.allclose(img.pixels, 7 / 255)


def test_pgm_16bit_is_big_endian(tmp_path):
    # one bright pixel: 0x0100 must decode as 256, not 1
    payload = np.full((8, 8), 256, dtype=">u2")
    path = tmp_path / "be.pgm"
    path.write_bytes(b"P5\n8 8\n65535\n" + payload.tobytes())
    img = load_pgm(path)
    assert np.allclose(img.pixels, 256 / 65535)


@pytest.mark.parametrize("payload", [
    b"P3\n8 8\n255\n" + b"0 " * 64,          # wrong magic
    b"P5\n8 8\n255\n" + b"\x00" * 63,        # truncated binary body
    b"P2\n8 8\n255\n" + b"0 " * 63,          # truncated ascii body
    b"P2\n8 8\n255\n" + b"0 " * 63 + b"x",   # non-numeric sample
    b"P2\n8 8\n255\n" + b"0 " * 63 + b"300",  # sample above maxval
    b"P5\n8 8\n0\n",                          # bad maxval
])
def test_pgm_malformed_payloads_raise(tmp_path, payload):
    path = tmp_path / "bad.pgm"
    path.write_bytes(payload)
    with pytest.raises(FormatError):
        load_pgm(path)


def test_tiny_images_load_but_cannot_be_shifted(tmp_path):
    # loading is size-agnostic; the FFT-based operations enforce MIN_SIDE
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P2\n4 4\n255\n" + b"0 " * 16)
    tiny = load_pgm(path)
    assert tiny.width == tiny.height == 4
    with pytest.raises(DimensionError):
        subpixel_shift(tiny, ShiftSpec(dx=0.5))


def test_export_scaled_pgm_round_trip(tmp_path):
    img = GrayImage(ramp().pixels * 3.7)  # values beyond [0, 1]
    path = tmp_path / "m.pgm"
    scale = export_scaled_pgm(img, path)
    sidecar = json.loads((tmp_path / "m.pgm.json").read_text())
    assert sidecar["scale"] == scale == pytest.approx(img.pixels.max())
    back = load_pgm(path)
    assert np.abs(back.pixels * scale - img.pixels).max() <= scale / 65535


# ---------------------------------------------------------------- shifting

def test_subpixel_shift_integer_equals_roll():
    img = smooth_noise()
    out = subpixel_shift(img, ShiftSpec(dx=3.0))
    assert np.allclose(out.pixels, np.roll(img.pixels, 3, axis=1), atol=1e-10)


def test_subpixel_shift_round_trip():
    img = smooth_noise(seed=1)
    out = subpixel_shift(subpixel_shift(img, ShiftSpec(dx=2.3, dy=-1.1)),
                         ShiftSpec(dx=-2.3, dy=1.1))
    assert np.allclose(out.pixels, img.pixels, atol=1e-10)


def test_subpixel_shift_composes():
    # exact on band-limited content; an even-sized axis projects its
    # self-conjugate Nyquist bin back to real after each shift, so
    # full-band content composes only approximately
    img = smooth_noise(seed=2)
    once = subpixel_shift(img, ShiftSpec(dx=1.7))
    twice = subpixel_shift(once, ShiftSpec(dx=0.8))
    direct = subpixel_shift(img, ShiftSpec(dx=2.5))
    assert np.allclose(twice.pixels, direct.pixels, atol=1e-10)


def test_subpixel_shift_rejects_huge_shift():
    img = smooth_noise()
    with pytest.raises(DimensionError):
        subpixel_shift(img, ShiftSpec(dx=img.width / 2 + 1))


def test_shift_spec_defaults():
    spec = ShiftSpec(dx=0.5)
    assert spec.dy == 0.0


# ---------------------------------------------------------------- photometry

def test_apply_brightness_is_affine_without_clipping():
    img = ramp()
    out = apply_brightness(img, alpha=1.3, beta=0.39)
    assert np.array_equal(out.pixels, 1.3 * img.pixels + 0.39)
    assert out.pixels.max() > 1.0  # deliberately not clipped


def test_clip_unit_saturates():
    img = GrayImage(np.linspace(-0.5, 1.5, 64).reshape(8, 8))
    out = clip_unit(img)
    assert out.pixels.min() == 0.0 and out.pixels.max() == 1.0
    inside = (img.pixels >= 0) & (img.pixels <= 1)
    assert np.array_equal(out.pixels[inside], img.pixels[inside])
