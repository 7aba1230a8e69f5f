"""Evaluation protocols for the stereo pipeline.

Two experiment families, both built on exactly-known ground truth:

* shift sweep -- the right frame is a fixed image and the left frame is
  a Fourier sub-pixel translate of it by ``delta`` pixels, so every
  correct match must report a disparity of ``delta``.  Precision is the
  fraction of eligible left features whose final disparity lands within
  a tolerance ``tau`` of the truth; unmatched eligible features count
  against it.
* brightness sweep -- the frame is re-scaled as ``alpha * I + beta``
  and features are re-detected; the detector is built on phase rather
  than intensity, so feature sets should be unchanged.

Reports serialize to a stable JSON document and a flat CSV table, one
row per (window, gamma, tau).
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .features import Feature, detect_features, redetection_rate
from .image import GrayImage, ShiftSpec, apply_brightness, clip_unit, subpixel_shift
from .matching import Match, MatchConfig, match_features
from .phasecong import PcConfig, compute_phase_congruency
from .subpixel import STATUS_REFINED, PocConfig, refine_match

DEFAULT_TAUS = (0.5, 0.25, 0.1, 0.05)


@dataclass(frozen=True)
class SweepSpec:
    """Grid of shift-sweep conditions.

    ``margin`` is the border (in pixels) a left feature must keep from
    the frame edge to be eligible; it defaults to the largest
    refinement window so every cell scores the same feature set.
    ``slack`` widens the integer disparity search around each shift.
    ``timing_reps`` > 0 adds wall-clock statistics for the feature
    extraction stage (0 keeps reports byte-reproducible).
    """

    deltas: tuple[float, ...]
    windows: tuple[int, ...] = (9,)
    gammas: tuple[float, ...] = (0.1,)
    taus: tuple[float, ...] = DEFAULT_TAUS
    margin: int | None = None
    slack: int = 0
    timing_reps: int = 0
    pc_config: PcConfig = field(default_factory=PcConfig)
    min_similarity: float = 0.8

    def __post_init__(self) -> None:
        if not self.deltas:
            raise ConfigError("sweep needs at least one delta")
        if any(d < 0 for d in self.deltas):
            raise ConfigError("shift sweep deltas must be >= 0")
        if not self.windows or not self.gammas or not self.taus:
            raise ConfigError("windows, gammas and taus must be non-empty")
        if self.slack < 0:
            raise ConfigError("slack must be >= 0")
        if self.timing_reps < 0:
            raise ConfigError("timing_reps must be >= 0")
        if self.margin is not None and self.margin < 0:
            raise ConfigError("margin must be >= 0")

    @property
    def border_margin(self) -> int:
        return max(self.windows) if self.margin is None else self.margin


@dataclass(frozen=True)
class EvalCell:
    """Pooled scores for one (window, gamma) condition."""

    window: int
    gamma: float
    tau_rates: dict[str, float]
    rmsd: float
    rmsd_median: float
    n_features: int
    n_matched: int
    fallback_rate: float
    runtime_ms: dict[str, float] | None = None

    def to_dict(self) -> dict:
        out = {
            "window": self.window,
            "gamma": self.gamma,
            "tau_rates": self.tau_rates,
            "rmsd": self.rmsd,
            "rmsd_median": self.rmsd_median,
            "n_features": self.n_features,
            "n_matched": self.n_matched,
            "fallback_rate": self.fallback_rate,
            "runtime_ms": self.runtime_ms,
        }
        return out


@dataclass(frozen=True)
class EvalReport:
    """Shift-sweep results: a config echo plus one cell per condition."""

    config: dict
    cells: tuple[EvalCell, ...]

    def to_json(self) -> str:
        doc = {"config": self.config,
               "cells": [c.to_dict() for c in self.cells]}
        return json.dumps(doc, indent=2, sort_keys=True)

    def write_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["window", "gamma", "tau", "precision", "rmsd",
                             "rmsd_median", "n_features", "n_matched",
                             "fallback_rate"])
            for cell in self.cells:
                for tau, rate in sorted(cell.tau_rates.items(),
                                        key=lambda kv: -float(kv[0])):
                    writer.writerow([cell.window, cell.gamma, tau,
                                     repr(rate), repr(cell.rmsd),
                                     repr(cell.rmsd_median), cell.n_features,
                                     cell.n_matched,
                                     repr(cell.fallback_rate)])

    def cell(self, window: int, gamma: float) -> EvalCell:
        for c in self.cells:
            if c.window == window and math.isclose(c.gamma, gamma):
                return c
        raise KeyError(f"no cell for window={window}, gamma={gamma}")


def _eligible(features: tuple[Feature, ...], delta: float, margin: int,
              width: int, height: int) -> set[tuple[int, int]]:
    """Left features scoreable at this shift: inside the border margin
    and to the right of the wrapped strip the circular shift drags in."""
    lo = math.ceil(delta) + margin
    return {(f.x, f.y) for f in features
            if lo <= f.x <= width - 1 - margin
            and margin <= f.y <= height - 1 - margin}


@dataclass
class _CellTally:
    hits: dict[float, int]
    n_features: int = 0
    n_matched: int = 0
    n_fallback: int = 0
    sq_err: float = 0.0
    per_delta_rmsd: list[float] = field(default_factory=list)


def _delta_job(image: GrayImage, delta: float, spec: SweepSpec,
               right_pc, right_features: dict[float, tuple[Feature, ...]]):
    """Score one shift against every (gamma, window) condition.

    Returns {(window, gamma): (eligible_count, matched, fallbacks,
    sq_err_sum, rmsd, hits_per_tau)} for deterministic reduction by the
    caller regardless of execution order.
    """
    left = subpixel_shift(image, ShiftSpec(dx=delta))
    left_pc = compute_phase_congruency(left, spec.pc_config)
    margin = spec.border_margin
    out = {}
    for gamma in spec.gammas:
        left_features = detect_features(left_pc, gamma)
        eligible = _eligible(left_features, delta, margin,
                             image.width, image.height)
        cfg = MatchConfig(
            disparity_min=max(0, math.floor(delta) - spec.slack),
            disparity_max=math.ceil(delta) + spec.slack,
            min_similarity=spec.min_similarity)
        matches = [m for m in match_features(left_features,
                                             right_features[gamma],
                                             left_pc.moment_max,
                                             right_pc.moment_max, cfg)
                   if (m.left.x, m.left.y) in eligible]
        for window in spec.windows:
            poc = PocConfig(window=window)
            hits = {tau: 0 for tau in spec.taus}
            fallbacks = 0
            sq = 0.0
            for match in matches:
                refined = refine_match(match, left_pc.moment_max,
                                       right_pc.moment_max, poc)
                if refined.status != STATUS_REFINED:
                    fallbacks += 1
                err = abs(refined.disparity - delta)
                sq += err * err
                for tau in spec.taus:
                    if err <= tau:
                        hits[tau] += 1
            rmsd = math.sqrt(sq / len(matches)) if matches else 0.0
            out[(window, gamma)] = (len(eligible), len(matches), fallbacks,
                                    sq, rmsd, hits)
    return out


def run_shift_sweep(image: GrayImage, spec: SweepSpec,
                    threads: int = 1) -> EvalReport:
    """Translate ``image`` by each delta and score the full pipeline.

    The unshifted frame is the right image; its phase congruency and
    feature sets are computed once and shared by every delta.
    """
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    right_pc = compute_phase_congruency(image, spec.pc_config)
    right_features = {g: detect_features(right_pc, g) for g in spec.gammas}

    tallies = {(w, g): _CellTally(hits={t: 0 for t in spec.taus})
               for w in spec.windows for g in spec.gammas}

    def job(delta: float):
        return _delta_job(image, delta, spec, right_pc, right_features)

    if threads == 1:
        results = [job(d) for d in spec.deltas]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, spec.deltas))

    for per_cell in results:
        for key, (n_elig, n_match, n_fall, sq, rmsd, hits) in per_cell.items():
            tally = tallies[key]
            tally.n_features += n_elig
            tally.n_matched += n_match
            tally.n_fallback += n_fall
            tally.sq_err += sq
            tally.per_delta_rmsd.append(rmsd)
            for tau in spec.taus:
                tally.hits[tau] += hits[tau]

    runtime = _time_extraction(image, spec) if spec.timing_reps else None
    cells = []
    for window in spec.windows:
        for gamma in spec.gammas:
            tally = tallies[(window, gamma)]
            rates = {f"{tau:g}": (tally.hits[tau] / tally.n_features
                                  if tally.n_features else 0.0)
                     for tau in spec.taus}
            cells.append(EvalCell(
                window=window, gamma=gamma, tau_rates=rates,
                rmsd=(math.sqrt(tally.sq_err / tally.n_matched)
                      if tally.n_matched else 0.0),
                rmsd_median=(statistics.median(tally.per_delta_rmsd)
                             if tally.per_delta_rmsd else 0.0),
                n_features=tally.n_features, n_matched=tally.n_matched,
                fallback_rate=(tally.n_fallback / tally.n_matched
                               if tally.n_matched else 0.0),
                runtime_ms=runtime))
    config = {
        "deltas": list(spec.deltas),
        "windows": list(spec.windows),
        "gammas": list(spec.gammas),
        "taus": list(spec.taus),
        "margin": spec.border_margin,
        "slack": spec.slack,
        "timing_reps": spec.timing_reps,
        "min_similarity": spec.min_similarity,
        "image_size": [image.width, image.height],
        "threads": threads,
    }
    return EvalReport(config=config, cells=tuple(cells))


def _time_extraction(image: GrayImage, spec: SweepSpec) -> dict[str, float]:
    """Wall-clock stats (ms) for one extraction pass, repeated."""
    samples = []
    for _ in range(spec.timing_reps):
        start = time.perf_counter()
        pc = compute_phase_congruency(image, spec.pc_config)
        for gamma in spec.gammas:
            detect_features(pc, gamma)
        samples.append((time.perf_counter() - start) * 1e3)
    mean = statistics.fmean(samples)
    std = statistics.pstdev(samples) if len(samples) > 1 else 0.0
    return {"mean": mean, "std": std}


def run_brightness_sweep(image: GrayImage, betas: tuple[float, ...],
                         alpha: float = 1.0, gamma: float = 0.1,
                         clip: bool = False,
                         pc_config: PcConfig | None = None) -> dict:
    """Re-detect features after affine brightness changes.

    Returns a report dict with, per beta: the feature count, whether
    the detected (x, y) set is identical to the baseline, and the
    re-detection rate.  ``clip`` saturates the transformed frame into
    [0, 1] first (a real sensor would), which is the one case where
    invariance is allowed to break.
    """
    cfg = pc_config if pc_config is not None else PcConfig()
    base_pc = compute_phase_congruency(image, cfg)
    base = detect_features(base_pc, gamma)
    base_set = {(f.x, f.y) for f in base}
    entries = []
    for beta in betas:
        shifted = apply_brightness(image, alpha, beta)
        if clip:
            shifted = clip_unit(shifted)
        pc = compute_phase_congruency(shifted, cfg)
        found = detect_features(pc, gamma)
        entries.append({
            "beta": beta,
            "n_features": len(found),
            "identical_locations":
                {(f.x, f.y) for f in found} == base_set,
            "redetection_rate": redetection_rate(base, found),
        })
    return {"alpha": alpha, "gamma": gamma, "clip": clip,
            "n_baseline": len(base), "entries": entries}


def audit_mismatches(matches: tuple[Match, ...] | list[Match],
                     delta: float, window: int) -> tuple[Match, ...]:
    """Matches whose integer disparity is too far from the known shift
    for a ``window``-wide refinement to ever recover: the residual
    exceeds the half-window the correlation surface can represent."""
    limit = window // 2
    return tuple(m for m in matches
                 if abs(m.disparity_int - round(delta)) > limit)
