"""Feature detection by thresholding the maximum-moment map."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .phasecong import PhaseCongruencyResult


@dataclass(frozen=True)
class Feature:
    """A detected feature point.

    :param x: column, integer pixels
    :param y: row, integer pixels
    :param strength: maximum-moment value at (x, y)
    :param orientation: axis of the strongest PC response, radians in [0, pi)
    """

    x: int
    y: int
    strength: float
    orientation: float


def detect_features(pc: PhaseCongruencyResult, gamma: float,
                    nms_radius: int = 0) -> list[Feature]:
    """All pixels whose maximum moment reaches the threshold gamma.

    With ``nms_radius > 0`` only local maxima survive: a feature is kept
    when its strength is the largest within Chebyshev distance
    nms_radius (ties broken toward smaller (y, x)).  Results are sorted
    by descending strength, ties by (y, x).
    """
    if not 0.0 < gamma < 1.0:
        raise ConfigError("gamma must be in (0, 1)")
    if nms_radius < 0:
        raise ConfigError("nms_radius must be >= 0")
    moment = pc.moment_max.pixels
    stack = np.stack([m.pixels for m in pc.pc_by_orientation])
    best_orientation = np.argmax(stack, axis=0)
    angles = pc.orientations

    ys, xs = np.nonzero(moment >= gamma)
    feats = [
        Feature(x=int(x), y=int(y), strength=float(moment[y, x]),
                orientation=angles[best_orientation[y, x]])
        for y, x in zip(ys, xs)
    ]
    if nms_radius > 0:
        feats = [f for f in feats if _is_local_max(moment, f, nms_radius)]
    feats.sort(key=lambda f: (-f.strength, f.y, f.x))
    return feats


def _is_local_max(moment: np.ndarray, f: Feature, radius: int) -> bool:
    y0, y1 = max(0, f.y - radius), min(moment.shape[0], f.y + radius + 1)
    x0, x1 = max(0, f.x - radius), min(moment.shape[1], f.x + radius + 1)
    patch = moment[y0:y1, x0:x1]
    peak = patch.max()
    if f.strength < peak:
        return False
    # on ties, keep only the first (y, x) position holding the peak value
    ys, xs = np.nonzero(patch == peak)
    return (f.y, f.x) == (int(ys[0]) + y0, int(xs[0]) + x0)


def redetection_rate(base: list[Feature], perturbed: list[Feature],
                     tolerance_px: int = 0) -> float:
    """Fraction of ``base`` features that reappear in ``perturbed``
    within the given Chebyshev distance.  An empty base counts as 1.0."""
    if tolerance_px < 0:
        raise ConfigError("tolerance_px must be >= 0")
    if not base:
        return 1.0
    if not perturbed:
        return 0.0
    if tolerance_px == 0:
        got = {(f.x, f.y) for f in perturbed}
        hits = sum(1 for f in base if (f.x, f.y) in got)
    else:
        px = np.array([(f.x, f.y) for f in perturbed])
        hits = 0
        for f in base:
            d = np.abs(px - (f.x, f.y)).max(axis=1)
            if d.min() <= tolerance_px:
                hits += 1
    return hits / len(base)


FEATURE_CSV_HEADER = ["x", "y", "strength", "orientation"]


def write_features_csv(features: list[Feature], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_CSV_HEADER)
        for f in features:
            writer.writerow([f.x, f.y, repr(f.strength), repr(f.orientation)])


def read_features_csv(path: str | Path) -> list[Feature]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != FEATURE_CSV_HEADER:
        raise ConfigError(f"unexpected feature CSV header in {path}")
    return [Feature(x=int(r[0]), y=int(r[1]), strength=float(r[2]),
                    orientation=float(r[3])) for r in rows[1:]]
