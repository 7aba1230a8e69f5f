"""Grayscale image container, PGM I/O and synthetic-shift utilities.

Images are stored as float64 arrays normalised to [0, 1] on load.  The
sub-pixel shift used to build ground-truth pairs is exact in the Fourier
domain (periodic boundaries), so shifting by dx and then by -dx returns
the original image up to floating-point error.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError

# Smallest image the FFT-based operations accept.
MIN_SIDE = 8


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable single-channel image with float64 pixels.

    :param pixels: 2-D array, any finite values (loads are in [0, 1],
        derived maps such as moment maps may exceed it)
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError("image data must be a non-empty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise DimensionError("image data must be finite")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class ShiftSpec:
    """Sub-pixel translation along x (and optionally y), in pixels."""

    dx: float
    dy: float = 0.0


def _require_min_size(img: GrayImage) -> None:
    if img.width < MIN_SIDE or img.height < MIN_SIDE:
        raise DimensionError(
            f"image must be at least {MIN_SIDE}x{MIN_SIDE}, "
            f"got {img.width}x{img.height}"
        )


_TOKEN = re.compile(rb"\s*(?:#[^\n\r]*[\n\r]\s*)*([^\s#]+)")


def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Return the first ``count`` whitespace-separated tokens, skipping
    ``#`` comments, plus the offset just past the final separator byte."""
    tokens = []
    pos = 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    # exactly one whitespace byte separates the header from binary data
    return tokens, pos + 1


def load_pgm(path: str | Path) -> GrayImage:
    """Load an 8- or 16-bit PGM (binary P5 or ASCII P2) as a GrayImage.

    Pixel values are normalised by the file's maxval so the result lies
    in [0, 1].  16-bit binary samples are big-endian per the standard.
    """
    data = Path(path).read_bytes()
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise FormatError("not a PGM file (expected P2 or P5 magic)")
    magic = data[:2]
    try:
        tokens, offset = _read_header_tokens(data[2:], 3)
        width, height, maxval = (int(t) for t in tokens)
    except (ValueError, FormatError) as exc:
        raise FormatError(f"invalid PGM header: {exc}") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise FormatError("invalid PGM dimensions or maxval")

    n = width * height
    if magic == b"P5":
        raw = data[2 + offset:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        if len(raw) < need:
            raise FormatError("truncated PGM pixel data")
        values = np.frombuffer(raw[:need], dtype=dtype).astype(np.float64)
    else:
        body = re.sub(rb"#[^\n\r]*", b"", data[2:]).split()[3:]
        if len(body) < n:
            raise FormatError("truncated PGM pixel data")
        try:
            values = np.array(body[:n], dtype=np.float64)
        except ValueError as exc:
            raise FormatError("non-numeric PGM sample") from exc
    if values.max(initial=0.0) > maxval or values.min(initial=0.0) < 0:
        raise FormatError("PGM sample out of declared range")
    return GrayImage(values.reshape(height, width) / maxval)


def save_pgm(img: GrayImage, path: str | Path, bit_depth: int = 8,
             ascii_format: bool = False) -> None:
    """Write a PGM file; values are clipped to [0, 1] then quantised.

    Round-trip error through save/load is at most 1/(2**bit_depth - 1)
    per pixel for in-range images.
    """
    if bit_depth not in (8, 16):
        raise FormatError("bit_depth must be 8 or 16")
    maxval = (1 << bit_depth) - 1
    quant = np.rint(np.clip(img.pixels, 0.0, 1.0) * maxval).astype(np.uint32)
    header = f"{'P2' if ascii_format else 'P5'}\n{img.width} {img.height}\n{maxval}\n"
    out = Path(path)
    if ascii_format:
        rows = "\n".join(" ".join(str(v) for v in row) for row in quant)
        out.write_text(header + rows + "\n")
        return
    dtype = np.dtype(">u2") if bit_depth == 16 else np.dtype("u1")
    out.write_bytes(header.encode("ascii") + quant.astype(dtype).tobytes())


def export_scaled_pgm(img: GrayImage, path: str | Path) -> float:
    """Write a 16-bit PGM of ``img`` rescaled by its own maximum.

    Maps with unbounded range (e.g. moment maps) are divided by their max
    before quantisation; the scale is returned and recorded in a JSON
    sidecar ``<path>.json`` as {"scale": <float>} so values can be
    recovered as pixel * scale.
    """
    scale = float(img.pixels.max())
    if scale <= 0.0:
        scale = 1.0
    save_pgm(GrayImage(img.pixels / scale), path, bit_depth=16)
    Path(str(path) + ".json").write_text(json.dumps({"scale": scale}) + "\n")
    return scale


def subpixel_shift(img: GrayImage, spec: ShiftSpec) -> GrayImage:
    """Translate image content by (dx, dy) pixels via the Fourier shift
    theorem.  Boundaries are periodic; integer shifts reproduce a
    circular roll.  Shifts must stay below half the image extent."""
    _require_min_size(img)
    if abs(spec.dx) >= img.width / 2 or abs(spec.dy) >= img.height / 2:
        raise DimensionError("shift magnitude must be below half the image extent")
    fx = np.fft.fftfreq(img.width)[None, :]
    fy = np.fft.fftfreq(img.height)[:, None]
    phase = np.exp(-2j * np.pi * (fx * spec.dx + fy * spec.dy))
    shifted = np.fft.ifft2(np.fft.fft2(img.pixels) * phase).real
    return GrayImage(shifted)


def apply_brightness(img: GrayImage, alpha: float = 1.0, beta: float = 0.0) -> GrayImage:
    """Affine intensity change alpha * pixel + beta, with no clipping.

    The robustness experiments rely on exact linearity; clamping to
    [0, 1] is the separate :func:`clip_unit`.
    """
    return GrayImage(img.pixels * alpha + beta)


def clip_unit(img: GrayImage) -> GrayImage:
    """Clamp pixel values to [0, 1]."""
    return GrayImage(np.clip(img.pixels, 0.0, 1.0))
