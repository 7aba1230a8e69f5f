"""Integer-pixel stereo matching of features on rectified pairs.

Similarity is measured on small windows of the maximum-moment map with
the normalised dot product (Lades similarity), so the score depends on
local phase-congruency structure rather than raw intensities.  Accepted
matches must survive, in order: the similarity threshold, mutual
left/right best-candidate consistency, a uniqueness pass, the epipolar
ordering constraint, and a disparity-continuity check against same-row
neighbours.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionMismatch
from .features import Feature
from .image import GrayImage

# continuity is judged against accepted neighbours within this x-distance
NEIGHBOUR_RADIUS_PX = 5


@dataclass(frozen=True)
class MatchConfig:
    """Parameters of the integer matching stage.

    Disparity is x_left - x_right; positive disparity means right-image
    content appears shifted left relative to the left image.
    """

    window: int = 5
    disparity_min: int = 0
    disparity_max: int = 30
    min_similarity: float = 0.8
    continuity_max_jump: int = 3
    row_tolerance: int = 0
    orientation_gate: float = math.pi / 6.0

    def __post_init__(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise ConfigError("window must be odd and >= 3")
        if self.disparity_min > self.disparity_max:
            raise ConfigError("disparity_min must be <= disparity_max")
        if not 0.0 < self.min_similarity <= 1.0:
            raise ConfigError("min_similarity must be in (0, 1]")
        if self.continuity_max_jump < 0:
            raise ConfigError("continuity_max_jump must be >= 0")
        if self.row_tolerance < 0:
            raise ConfigError("row_tolerance must be >= 0")
        if self.orientation_gate <= 0:
            raise ConfigError("orientation_gate must be > 0")


@dataclass(frozen=True)
class Match:
    """An accepted integer-pixel correspondence."""

    left: Feature
    right: Feature
    disparity_int: int
    similarity: float


def lades_similarity(patch_l: GrayImage, patch_r: GrayImage) -> float:
    """Normalised correlation sum(l*r)/sqrt(sum(l^2)*sum(r^2)) in [-1, 1].

    Returns 0.0 when either patch has zero energy.  Patches must share
    the same odd-sided shape.
    """
    a, b = patch_l.pixels, patch_r.pixels
    if a.shape != b.shape:
        raise DimensionMismatch(f"patch shapes differ: {a.shape} vs {b.shape}")
    if a.shape[0] % 2 == 0 or a.shape[1] % 2 == 0:
        raise DimensionMismatch("patches must have odd side lengths")
    return _similarity(a.ravel(), float(np.dot(a.ravel(), a.ravel())),
                       b.ravel(), float(np.dot(b.ravel(), b.ravel())))


def _similarity(flat_l: np.ndarray, energy_l: float,
                flat_r: np.ndarray, energy_r: float) -> float:
    if energy_l <= 0.0 or energy_r <= 0.0:
        return 0.0
    s = float(np.dot(flat_l, flat_r)) / math.sqrt(energy_l * energy_r)
    return min(1.0, max(-1.0, s))


def _orientation_distance(a: float, b: float) -> float:
    """Circular distance between orientation axes (period pi)."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


class _Side:
    """Per-image matching state: window patches and row index."""

    def __init__(self, features: list[Feature], moment: np.ndarray, window: int):
        half = window // 2
        h, w = moment.shape
        self.features: list[Feature] = []
        self.flat: list[np.ndarray] = []
        self.energy: list[float] = []
        self.by_row: dict[int, list[int]] = {}
        for f in features:
            if not (half <= f.x < w - half and half <= f.y < h - half):
                continue  # window would leave the map; feature cannot be scored
            patch = moment[f.y - half:f.y + half + 1,
                           f.x - half:f.x + half + 1].ravel()
            idx = len(self.features)
            self.features.append(f)
            self.flat.append(patch)
            self.energy.append(float(np.dot(patch, patch)))
            self.by_row.setdefault(f.y, []).append(idx)


def match_features(left_features: list[Feature], right_features: list[Feature],
                   map_l: GrayImage, map_r: GrayImage,
                   cfg: MatchConfig = MatchConfig()) -> list[Match]:
    """Match features across a rectified pair on their moment maps.

    Candidates satisfy the row tolerance, the disparity range and the
    orientation gate; each accepted match is its left feature's best
    candidate and vice versa (ties broken toward smaller |disparity|,
    then smaller x).  Crossing matches lose their lower-similarity
    member, and disparities jumping more than continuity_max_jump away
    from the median of nearby accepted matches are dropped.
    """
    if map_l.pixels.shape != map_r.pixels.shape:
        raise DimensionMismatch("left/right maps must share a shape")
    lhs = _Side(left_features, map_l.pixels, cfg.window)
    rhs = _Side(right_features, map_r.pixels, cfg.window)

    # score every admissible (left, right) pair once
    pair_sim: dict[tuple[int, int], float] = {}
    cand_l: dict[int, list[int]] = {}
    cand_r: dict[int, list[int]] = {}
    for li, lf in enumerate(lhs.features):
        for row in range(lf.y - cfg.row_tolerance, lf.y + cfg.row_tolerance + 1):
            for ri in rhs.by_row.get(row, ()):
                rf = rhs.features[ri]
                d = lf.x - rf.x
                if not cfg.disparity_min <= d <= cfg.disparity_max:
                    continue
                if _orientation_distance(lf.orientation, rf.orientation) \
                        > cfg.orientation_gate + 1e-12:
                    continue
                pair_sim[(li, ri)] = _similarity(lhs.flat[li], lhs.energy[li],
                                                 rhs.flat[ri], rhs.energy[ri])
                cand_l.setdefault(li, []).append(ri)
                cand_r.setdefault(ri, []).append(li)

    def best_right(li: int) -> int | None:
        cands = cand_l.get(li)
        if not cands:
            return None
        return min(cands, key=lambda ri: (-pair_sim[(li, ri)],
                                          abs(lhs.features[li].x - rhs.features[ri].x),
                                          rhs.features[ri].x))

    def best_left(ri: int) -> int | None:
        cands = cand_r.get(ri)
        if not cands:
            return None
        return min(cands, key=lambda li: (-pair_sim[(li, ri)],
                                          abs(lhs.features[li].x - rhs.features[ri].x),
                                          lhs.features[li].x))

    # mutual consistency + similarity threshold
    accepted = []
    for li in range(len(lhs.features)):
        ri = best_right(li)
        if ri is None or best_left(ri) != li:
            continue
        sim = pair_sim[(li, ri)]
        if sim < cfg.min_similarity:
            continue
        lf, rf = lhs.features[li], rhs.features[ri]
        accepted.append(Match(left=lf, right=rf,
                              disparity_int=lf.x - rf.x, similarity=sim))

    accepted = _enforce_uniqueness(accepted)
    accepted = _enforce_ordering(accepted)
    accepted = _enforce_continuity(accepted, cfg.continuity_max_jump)
    accepted.sort(key=lambda m: (m.left.y, m.left.x))
    return accepted


def _enforce_uniqueness(matches: list[Match]) -> list[Match]:
    """Greedy one-to-one assignment by descending similarity."""
    used_l: set[tuple[int, int]] = set()
    used_r: set[tuple[int, int]] = set()
    kept = []
    for m in sorted(matches, key=lambda m: (-m.similarity, m.left.y, m.left.x)):
        kl, kr = (m.left.x, m.left.y), (m.right.x, m.right.y)
        if kl in used_l or kr in used_r:
            continue
        used_l.add(kl)
        used_r.add(kr)
        kept.append(m)
    return kept


def _enforce_ordering(matches: list[Match]) -> list[Match]:
    """Drop the lower-similarity member of every crossing pair per row."""
    by_row: dict[int, list[Match]] = {}
    for m in matches:
        by_row.setdefault(m.left.y, []).append(m)
    kept = []
    for row in by_row.values():
        row.sort(key=lambda m: m.left.x)
        while True:
            crossing = None
            for i in range(len(row)):
                for j in range(i + 1, len(row)):
                    if row[i].right.x > row[j].right.x:
                        crossing = (i, j)
                        break
                if crossing:
                    break
            if crossing is None:
                break
            i, j = crossing
            drop = i if row[i].similarity <= row[j].similarity else j
            del row[drop]
        kept.extend(row)
    return kept


def _enforce_continuity(matches: list[Match], max_jump: int) -> list[Match]:
    """Drop matches far from the median disparity of nearby matches."""
    by_row: dict[int, list[Match]] = {}
    for m in matches:
        by_row.setdefault(m.left.y, []).append(m)
    kept = []
    for row in by_row.values():
        decisions = []
        for m in row:
            near = [n.disparity_int for n in row
                    if n is not m and abs(n.left.x - m.left.x) <= NEIGHBOUR_RADIUS_PX]
            ok = (not near
                  or abs(m.disparity_int - float(np.median(near))) <= max_jump)
            decisions.append(ok)
        kept.extend(m for m, ok in zip(row, decisions) if ok)
    return kept


MATCH_CSV_HEADER = ["xl", "yl", "xr", "yr", "disparity_int", "similarity"]


def write_matches_csv(matches: list[Match], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MATCH_CSV_HEADER)
        for m in matches:
            writer.writerow([m.left.x, m.left.y, m.right.x, m.right.y,
                             m.disparity_int, repr(m.similarity)])


def read_matches_csv(path: str | Path) -> list[Match]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != MATCH_CSV_HEADER:
        raise ConfigError(f"unexpected match CSV header in {path}")
    out = []
    for r in rows[1:]:
        left = Feature(x=int(r[0]), y=int(r[1]), strength=0.0, orientation=0.0)
        right = Feature(x=int(r[2]), y=int(r[3]), strength=0.0, orientation=0.0)
        out.append(Match(left=left, right=right,
                         disparity_int=int(r[4]), similarity=float(r[5])))
    return out
