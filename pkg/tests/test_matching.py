from __future__ import annotations

import numpy as np
import pytest

from subtherm import (ConfigError, DimensionMismatch, Feature, GrayImage,
                      Match, MatchConfig, lades_similarity, match_features)
from subtherm.matching import (MATCH_CSV_HEADER, read_matches_csv,
                               write_matches_csv)

# hand-picked 3x3 stamps with pairwise |cosine| <= 0.67, well under the
# default similarity threshold, so each left window has one clear mate
STAMP_A = np.array([[1, 0, -1], [1, 0, -1], [1, 0, -1]], dtype=float)
STAMP_B = np.array([[1, 1, 1], [0, 0, 0], [-1, -1, -1]], dtype=float)
STAMP_C = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
STAMP_D = np.array([[1, -1, 1], [-1, 1, -1], [1, -1, 1]], dtype=float)


def stamp_scene(width=40, height=24, stamps=()):
    """Zero maps with 3x3 stamps; returns (map, features)."""
    grid = np.zeros((height, width))
    feats = []
    for x, y, stamp, orientation in stamps:
        grid[y - 1:y + 2, x - 1:x + 2] = stamp
        feats.append(Feature(x=x, y=y, strength=1.0, orientation=orientation))
    return GrayImage(grid), feats


def cfg3(**kwargs):
    return MatchConfig(window=3, **kwargs)


# ---------------------------------------------------------------- similarity

def test_lades_similarity_identity_and_sign():
    p = GrayImage(STAMP_A)
    assert lades_similarity(p, p) == 1.0
    assert lades_similarity(p, GrayImage(-STAMP_A)) == -1.0


def test_lades_similarity_scale_invariance():
    p = GrayImage(STAMP_B)
    q = GrayImage(3.7 * STAMP_B)
    assert lades_similarity(p, q) == pytest.approx(1.0, abs=1e-12)


def test_lades_similarity_zero_energy():
    zero = GrayImage(np.zeros((3, 3)))
    assert lades_similarity(zero, GrayImage(STAMP_A)) == 0.0
    assert lades_similarity(zero, zero) == 0.0


def test_lades_similarity_shape_checks():
    with pytest.raises(DimensionMismatch):
        lades_similarity(GrayImage(np.zeros((3, 3))),
                         GrayImage(np.zeros((5, 5))))
    with pytest.raises(DimensionMismatch):
        lades_similarity(GrayImage(np.zeros((4, 4))),
                         GrayImage(np.zeros((4, 4))))


def test_lades_similarity_known_value():
    # cos(C, D) = -4 / (2 * 3) = -2/3, worked out by hand
    got = lades_similarity(GrayImage(STAMP_C), GrayImage(STAMP_D))
    assert got == pytest.approx(-2 / 3, abs=1e-12)


# ---------------------------------------------------------------- config

@pytest.mark.parametrize("kwargs", [
    {"window": 4}, {"window": 1},
    {"disparity_min": 5, "disparity_max": 3},
    {"min_similarity": 0.0}, {"min_similarity": 1.2},
    {"continuity_max_jump": -1},
    {"row_tolerance": -1},
    {"orientation_gate": 0.0},
])
def test_match_config_validation(kwargs):
    with pytest.raises(ConfigError):
        MatchConfig(**kwargs)


# ---------------------------------------------------------------- matching

def test_perfect_pairs_match_with_unit_similarity():
    right, rf = stamp_scene(stamps=[(10, 6, STAMP_A, 0.0),
                                    (14, 12, STAMP_B, 0.0),
                                    (18, 18, STAMP_C, 0.0)])
    left, lf = stamp_scene(stamps=[(14, 6, STAMP_A, 0.0),
                                   (18, 12, STAMP_B, 0.0),
                                   (22, 18, STAMP_C, 0.0)])
    matches = match_features(lf, rf, left, right, cfg3())
    assert len(matches) == 3
    for m in matches:
        assert m.disparity_int == 4
        assert m.left.y == m.right.y
        assert m.similarity == pytest.approx(1.0, abs=1e-12)
    # output sorted by (yl, xl)
    assert [(m.left.y, m.left.x) for m in matches] == [(6, 14), (12, 18),
                                                       (18, 22)]


def test_disparity_range_gates_candidates():
    right, rf = stamp_scene(stamps=[(10, 8, STAMP_A, 0.0)])
    left, lf = stamp_scene(stamps=[(18, 8, STAMP_A, 0.0)])  # d = 8
    assert match_features(lf, rf, left, right,
                          cfg3(disparity_min=0, disparity_max=7)) == []
    assert len(match_features(lf, rf, left, right,
                              cfg3(disparity_min=8, disparity_max=8))) == 1


def test_row_tolerance():
    right, rf = stamp_scene(stamps=[(10, 9, STAMP_A, 0.0)])
    left, lf = stamp_scene(stamps=[(14, 8, STAMP_A, 0.0)])
    assert match_features(lf, rf, left, right, cfg3()) == []
    got = match_features(lf, rf, left, right, cfg3(row_tolerance=1))
    assert len(got) == 1 and got[0].right.y == 9


def test_orientation_gate():
    right, rf = stamp_scene(stamps=[(10, 8, STAMP_A, np.pi / 2)])
    left, lf = stamp_scene(stamps=[(14, 8, STAMP_A, 0.0)])
    assert match_features(lf, rf, left, right, cfg3()) == []
    # exactly one orientation step apart is still admissible
    right, rf = stamp_scene(stamps=[(10, 8, STAMP_A, np.pi / 6)])
    assert len(match_features(lf, rf, left, right, cfg3())) == 1


def test_min_similarity_rejects_weak_pairs():
    right, rf = stamp_scene(stamps=[(10, 8, STAMP_C, 0.0)])
    left, lf = stamp_scene(stamps=[(14, 8, STAMP_D, 0.0)])  # |cos| = 2/3
    assert match_features(lf, rf, left, right, cfg3()) == []


def test_uniqueness_prefers_smaller_disparity_on_ties():
    right, rf = stamp_scene(stamps=[(16, 8, STAMP_A, 0.0)])
    left, lf = stamp_scene(stamps=[(20, 8, STAMP_A, 0.0),
                                   (26, 8, STAMP_A, 0.0)])
    matches = match_features(lf, rf, left, right, cfg3())
    assert len(matches) == 1
    assert matches[0].left.x == 20 and matches[0].disparity_int == 4


def test_ordering_repair_drops_lower_similarity_crosser():
    noisy_b = STAMP_B + 0.18 * STAMP_C  # still closest to B, but sim < 1
    right, rf = stamp_scene(stamps=[(10, 8, STAMP_A, 0.0),
                                    (16, 8, STAMP_B, 0.0)])
    left, lf = stamp_scene(stamps=[(20, 8, noisy_b, 0.0),
                                   (24, 8, STAMP_A, 0.0)])
    # L20->R16 and L24->R10 cross; the exact copy (sim 1.0) must win
    matches = match_features(lf, rf, left, right,
                             cfg3(continuity_max_jump=30))
    assert len(matches) == 1
    assert matches[0].left.x == 24 and matches[0].right.x == 10


def test_continuity_repair_drops_disparity_outlier():
    right, rf = stamp_scene(stamps=[(6, 8, STAMP_A, 0.0),
                                    (9, 8, STAMP_B, 0.0),
                                    (12, 8, STAMP_C, 0.0),
                                    (19, 8, STAMP_D, 0.0)])
    left, lf = stamp_scene(stamps=[(10, 8, STAMP_A, 0.0),
                                   (13, 8, STAMP_B, 0.0),
                                   (16, 8, STAMP_C, 0.0),
                                   (19, 8, STAMP_D, 0.0)])
    # cluster at disparity 4; the x=19 pair sits at disparity 0, more
    # than continuity_max_jump away from its neighbourhood median
    matches = match_features(lf, rf, left, right, cfg3())
    assert sorted(m.left.x for m in matches) == [10, 13, 16]
    assert all(m.disparity_int == 4 for m in matches)


def test_zero_maps_produce_no_matches():
    right, rf = stamp_scene(stamps=[])
    left = right
    lf = [Feature(x=10, y=8, strength=1.0, orientation=0.0)]
    rf = [Feature(x=6, y=8, strength=1.0, orientation=0.0)]
    assert match_features(lf, rf, left, right, cfg3()) == []


def test_map_shape_mismatch():
    a = GrayImage(np.zeros((24, 40)))
    b = GrayImage(np.zeros((24, 41)))
    with pytest.raises(DimensionMismatch):
        match_features([], [], a, b, cfg3())


def test_border_features_are_skipped():
    # a 5-px window around x=1 would leave the map, so the right-hand
    # feature cannot be scored and its partner stays unmatched
    right, rf = stamp_scene(stamps=[(1, 8, STAMP_A, 0.0)])
    left, lf = stamp_scene(stamps=[(5, 8, STAMP_A, 0.0)])
    assert match_features(lf, rf, left, right, MatchConfig(window=5)) == []


# ---------------------------------------------------------------- properties

def test_property_suite_uniqueness_and_ordering():
    rng = np.random.default_rng(29)
    orientations = [k * np.pi / 6 for k in range(6)]
    for _ in range(200):
        w, h = 40, 24
        map_l = GrayImage(rng.random((h, w)))
        map_r = GrayImage(rng.random((h, w)))
        def feats():
            out = []
            seen = set()
            for _ in range(12):
                x = int(rng.integers(3, w - 3))
                y = int(rng.integers(3, h - 3))
                if (x, y) in seen:
                    continue
                seen.add((x, y))
                out.append(Feature(x=x, y=y,
                                   strength=float(rng.random()),
                                   orientation=orientations[
                                       int(rng.integers(6))]))
            return out
        cfg = MatchConfig(window=3, min_similarity=0.5,
                          disparity_max=int(rng.integers(5, 30)))
        matches = match_features(feats(), feats(), map_l, map_r, cfg)
        lefts = [(m.left.x, m.left.y) for m in matches]
        rights = [(m.right.x, m.right.y) for m in matches]
        assert len(set(lefts)) == len(matches)    # left uniqueness
        assert len(set(rights)) == len(matches)   # right uniqueness
        by_row: dict[int, list[Match]] = {}
        for m in matches:
            assert m.left.y == m.right.y
            assert cfg.disparity_min <= m.disparity_int <= cfg.disparity_max
            assert cfg.min_similarity <= m.similarity <= 1.0
            assert m.disparity_int == m.left.x - m.right.x
            by_row.setdefault(m.left.y, []).append(m)
        for row in by_row.values():  # ordering along each scan line
            row.sort(key=lambda m: m.left.x)
            xr = [m.right.x for m in row]
            assert xr == sorted(xr)
        keys = [(m.left.y, m.left.x) for m in matches]
        assert keys == sorted(keys)


# ---------------------------------------------------------------- CSV

def test_match_csv_round_trip(tmp_path):
    right, rf = stamp_scene(stamps=[(10, 6, STAMP_A, 0.0),
                                    (14, 12, STAMP_B, 0.0)])
    left, lf = stamp_scene(stamps=[(14, 6, STAMP_A, 0.0),
                                   (18, 12, STAMP_B, 0.0)])
    matches = match_features(lf, rf, left, right, cfg3())
    path = tmp_path / "m.csv"
    write_matches_csv(matches, path)
    with open(path) as fh:
        assert fh.readline().strip() == ",".join(MATCH_CSV_HEADER)
    back = read_matches_csv(path)
    assert [(m.left.x, m.left.y, m.right.x, m.right.y, m.disparity_int)
            for m in back] == \
           [(m.left.x, m.left.y, m.right.x, m.right.y, m.disparity_int)
            for m in matches]
    assert [m.similarity for m in back] == [m.similarity for m in matches]
