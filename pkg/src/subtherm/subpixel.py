"""Sub-pixel disparity refinement by phase-only correlation (POC).

For each integer match, square windows around the two features are
correlated through the normalised cross-power spectrum with a
rectangular low-pass.  Near its peak the correlation follows a sinc
profile

    r(x) ~ alpha * sin((V/M) * pi * (x + dx)) / (pi * (x + dx))

where M is the window side, U = floor(lowpass_ratio * M) the passband
half-width and V = 2U + 1 the passband size; the peak sits at -dx.  The
identity (x + dx) * r(x) = (alpha/pi) * sin(c * (x + dx)) turns samples
around the peak into the linear system u_i * dx = v_i, solved in closed
form by least squares.  Failures fall back to the integer disparity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (ConfigError, DegenerateSystem, DimensionMismatch,
                     FormatError, OutOfRange)
from .features import Feature
from .image import GrayImage
from .matching import Match

# magnitudes below this count as "no signal" in the cross-power spectrum
SPECTRUM_FLOOR = 1e-12
# and least-squares systems below this carry no information
SYSTEM_FLOOR = 1e-12

STATUS_REFINED = "refined"
STATUS_FALLBACK = "fallback_integer"

SOURCE_MOMENT = "moment_map"
SOURCE_RAW = "raw_image"

# (peak offset, sample distance) pairs: three positions around the peak,
# each probed at distances 1 and 2
DEFAULT_OBSERVATIONS = ((-1, 1), (0, 1), (1, 1), (-1, 2), (0, 2), (1, 2))


@dataclass(frozen=True)
class PocConfig:
    """Parameters of the POC refinement stage."""

    window: int = 9
    lowpass_ratio: float = 0.5
    observations: tuple[tuple[int, int], ...] = DEFAULT_OBSERVATIONS
    max_refine: float = 1.0
    source: str = SOURCE_MOMENT

    def __post_init__(self) -> None:
        if self.window % 2 == 0 or not 7 <= self.window <= 41:
            raise ConfigError("window must be odd and within [7, 41]")
        if not 0.0 < self.lowpass_ratio <= 1.0:
            raise ConfigError("lowpass_ratio must be in (0, 1]")
        if not self.observations:
            raise ConfigError("observations must be non-empty")
        if any(d < 1 for _, d in self.observations):
            raise ConfigError("observation distances must be >= 1")
        if self.max_refine <= 0:
            raise ConfigError("max_refine must be > 0")
        if self.source not in (SOURCE_MOMENT, SOURCE_RAW):
            raise ConfigError(f"source must be {SOURCE_MOMENT!r} or {SOURCE_RAW!r}")


@dataclass(frozen=True)
class CorrelationSurface:
    """Centred POC surface with its 1-D best-row extraction.

    ``values[i]`` is r(x) at x = i - size//2; ``peak_index`` is in the
    same centred coordinates.
    """

    values: np.ndarray
    peak_index: int
    peak_value: float
    size: int
    surface: np.ndarray

    def value_at(self, x: int) -> float:
        return float(self.values[x + self.size // 2])


@dataclass(frozen=True)
class RefinedMatch:
    """A match with sub-pixel disparity, or its integer fallback."""

    base: Match
    delta_x: float
    disparity: float
    status: str


def cross_power_spectrum(sub_l: GrayImage, sub_r: GrayImage,
                         lowpass_ratio: float = 0.5) -> np.ndarray:
    """Normalised cross-power spectrum with a rectangular low-pass.

    Returns a complex array in FFT layout (DC at [0, 0]).  Bins whose
    raw cross-power magnitude is below 1e-12 are zeroed instead of
    normalised; bins with |u| or |v| above floor(lowpass_ratio * side)
    are zeroed by the low-pass.
    """
    if sub_l.pixels.shape != sub_r.pixels.shape:
        raise DimensionMismatch("sub-images must share a shape")
    if not 0.0 < lowpass_ratio <= 1.0:
        raise ConfigError("lowpass_ratio must be in (0, 1]")
    h, w = sub_l.pixels.shape
    cross = np.fft.fft2(sub_l.pixels) * np.conj(np.fft.fft2(sub_r.pixels))
    mag = np.abs(cross)
    keep = mag >= SPECTRUM_FLOOR
    spectrum = np.zeros_like(cross)
    np.divide(cross, mag, out=spectrum, where=keep)

    ux = np.rint(np.fft.fftfreq(w) * w).astype(int)[None, :]
    vy = np.rint(np.fft.fftfreq(h) * h).astype(int)[:, None]
    u_max = math.floor(lowpass_ratio * w)
    v_max = math.floor(lowpass_ratio * h)
    spectrum[(np.abs(ux) > u_max) | (np.abs(vy) > v_max)] = 0.0
    return spectrum


def poc_surface(spectrum: np.ndarray) -> CorrelationSurface:
    """Invert the cross-power spectrum to the centred correlation surface
    and extract its best row.

    The row maximising max_x |r(x, y)| becomes the 1-D profile (after
    rectification the expected peak row is y = 0); the peak index is the
    argmax of r on that row, in centred coordinates.
    """
    h, w = spectrum.shape
    if h % 2 == 0 or w % 2 == 0:
        raise DimensionMismatch("correlation surface requires odd dimensions")
    # inverse transform with the e^{-2 pi i} convention == conjugate trick
    surface = np.fft.fftshift(np.fft.ifft2(np.conj(spectrum)).real)
    best_row = int(np.argmax(np.abs(surface).max(axis=1)))
    values = surface[best_row]
    peak = int(np.argmax(values))
    return CorrelationSurface(values=values, peak_index=peak - w // 2,
                              peak_value=float(values[peak]), size=w,
                              surface=surface)


def estimate_delta(surface: CorrelationSurface, cfg: PocConfig = PocConfig()) -> float:
    """Closed-form least-squares estimate of the sub-pixel peak offset dx.

    Each observation (p_off, d) samples r at p_i - d, p_i, p_i + d with
    p_i = peak_index + p_off and contributes

        u_i = r(p_i-d) + r(p_i+d) - 2 cos(V pi d / M) r(p_i)
        v_i = 2 p_i cos(V pi d / M) r(p_i)
              - (p_i-d) r(p_i-d) - (p_i+d) r(p_i+d)

    so that dx = sum(u_i v_i) / sum(u_i^2).  Observations whose sample
    indices leave [-M//2, M//2] are discarded.  Raises DegenerateSystem
    when no information remains and OutOfRange when |dx| > max_refine.
    """
    m_half = surface.size // 2
    u_pass = math.floor(cfg.lowpass_ratio * surface.size)
    v_band = 2 * u_pass + 1
    cos_arg = v_band * math.pi / surface.size

    num = 0.0
    den = 0.0
    for p_off, d in cfg.observations:
        p_i = surface.peak_index + p_off
        if p_i - d < -m_half or p_i + d > m_half:
            continue
        r_lo = surface.value_at(p_i - d)
        r_hi = surface.value_at(p_i + d)
        r_pk = surface.value_at(p_i)
        cos_d = math.cos(cos_arg * d)
        u_i = r_lo + r_hi - 2.0 * cos_d * r_pk
        v_i = 2.0 * p_i * cos_d * r_pk - (p_i - d) * r_lo - (p_i + d) * r_hi
        num += u_i * v_i
        den += u_i * u_i
    if den < SYSTEM_FLOOR:
        raise DegenerateSystem("correlation surface carries no peak information")
    delta = num / den
    if abs(delta) > cfg.max_refine:
        raise OutOfRange(f"refinement {delta:.3f} exceeds max_refine {cfg.max_refine}")
    return delta


def refine_match(match: Match, map_l: GrayImage, map_r: GrayImage,
                 cfg: PocConfig = PocConfig()) -> RefinedMatch:
    """Refine one integer match to sub-pixel disparity.

    ``map_l``/``map_r`` are the maps selected by ``cfg.source`` (moment
    maps by default).  Windows that leave the maps, degenerate
    correlation surfaces and refinements beyond max_refine all fall back
    to the integer disparity.
    """
    half = cfg.window // 2
    lf, rf = match.left, match.right
    h, w = map_l.pixels.shape
    fits = (half <= lf.x < w - half and half <= lf.y < h - half
            and half <= rf.x < map_r.width - half
            and half <= rf.y < map_r.height - half)
    if not fits:
        return RefinedMatch(base=match, delta_x=0.0,
                            disparity=float(match.disparity_int),
                            status=STATUS_FALLBACK)
    sub_l = GrayImage(map_l.pixels[lf.y - half:lf.y + half + 1,
                                   lf.x - half:lf.x + half + 1])
    sub_r = GrayImage(map_r.pixels[rf.y - half:rf.y + half + 1,
                                   rf.x - half:rf.x + half + 1])
    try:
        spectrum = cross_power_spectrum(sub_l, sub_r, cfg.lowpass_ratio)
        delta = estimate_delta(poc_surface(spectrum), cfg)
    except (DegenerateSystem, OutOfRange):
        return RefinedMatch(base=match, delta_x=0.0,
                            disparity=float(match.disparity_int),
                            status=STATUS_FALLBACK)
    return RefinedMatch(base=match, delta_x=delta,
                        disparity=match.disparity_int + delta,
                        status=STATUS_REFINED)


REFINED_CSV_HEADER = ["xl", "yl", "xr", "yr", "disparity", "status", "similarity"]


def write_refined_csv(matches: list[RefinedMatch], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REFINED_CSV_HEADER)
        for rm in matches:
            writer.writerow([rm.base.left.x, rm.base.left.y,
                             rm.base.right.x, rm.base.right.y,
                             repr(rm.disparity), rm.status,
                             repr(rm.base.similarity)])


def read_refined_csv(path: str | Path) -> list[RefinedMatch]:
    """Rebuild refined matches from CSV.  Feature strengths and
    orientations are not stored, so they come back as 0."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REFINED_CSV_HEADER:
            raise FormatError(f"unexpected refined-match header in {path}")
        for row in reader:
            xl, yl = int(row["xl"]), int(row["yl"])
            xr, yr = int(row["xr"]), int(row["yr"])
            disparity = float(row["disparity"])
            base = Match(left=Feature(xl, yl, 0.0, 0.0),
                         right=Feature(xr, yr, 0.0, 0.0),
                         disparity_int=xl - xr,
                         similarity=float(row["similarity"]))
            out.append(RefinedMatch(base=base,
                                    delta_x=disparity - base.disparity_int,
                                    disparity=disparity,
                                    status=row["status"]))
    return out
