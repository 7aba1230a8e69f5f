"""Depth from disparity for a rectified, fronto-parallel stereo rig."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, NonPositiveDisparity, RangeError
from .subpixel import RefinedMatch


@dataclass(frozen=True)
class StereoRig:
    """Rectified rig geometry; focal length and principal point in pixels."""

    baseline_mm: float
    focal_px: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.baseline_mm <= 0:
            raise ConfigError("baseline_mm must be > 0")
        if self.focal_px <= 0:
            raise ConfigError("focal_px must be > 0")
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("rig image dimensions must be > 0")


@dataclass(frozen=True)
class Point3D:
    """Scene point in millimetres, camera-centred (z along the optical axis)."""

    x_mm: float
    y_mm: float
    z_mm: float


def focal_from_hfov(hfov_degrees: float, width_px: int) -> float:
    """Focal length in pixels from the horizontal field of view."""
    if not 0.0 < hfov_degrees < 180.0:
        raise RangeError("hfov_degrees must be in (0, 180)")
    if width_px <= 0:
        raise RangeError("width_px must be > 0")
    return (width_px / 2.0) / math.tan(math.radians(hfov_degrees) / 2.0)


def load_rig(path: str | Path) -> StereoRig:
    """Read a rig description from JSON.

    Accepts either ``focal_px`` directly or ``hfov_degrees`` (converted
    via :func:`focal_from_hfov`); cx/cy default to the image centre.
    """
    try:
        data = json.loads(Path(path).read_text())
        width = int(data["width"])
        height = int(data["height"])
        baseline = float(data["baseline_mm"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid rig file {path}: {exc}") from exc
    if "focal_px" in data:
        focal = float(data["focal_px"])
    elif "hfov_degrees" in data:
        focal = focal_from_hfov(float(data["hfov_degrees"]), width)
    else:
        raise ConfigError("rig file needs focal_px or hfov_degrees")
    cx = float(data.get("cx", (width - 1) / 2.0))
    cy = float(data.get("cy", (height - 1) / 2.0))
    return StereoRig(baseline_mm=baseline, focal_px=focal,
                     cx=cx, cy=cy, width=width, height=height)


def triangulate(xl: float, yl: float, disparity: float, rig: StereoRig) -> Point3D:
    """Back-project one left-image point at the given disparity.

    z = focal * baseline / disparity; x and y follow the pinhole model
    relative to the principal point.  Disparity must be positive.
    """
    if disparity <= 0.0:
        raise NonPositiveDisparity(f"disparity must be > 0, got {disparity}")
    z = rig.focal_px * rig.baseline_mm / disparity
    x = (xl - rig.cx) * z / rig.focal_px
    y = (yl - rig.cy) * z / rig.focal_px
    return Point3D(x_mm=x, y_mm=y, z_mm=z)


def depth_error_range(z_mm: float, rig: StereoRig,
                      disparity_error_px: float) -> tuple[float, float, float]:
    """Spread of the depth estimate for a +/- disparity error.

    The disparity implied by z is perturbed both ways and re-projected:

        z_low  = f*b / (d + err)        z_high = f*b / (d - err)

    Returns (z_low, z_high, z_high - z_low).  The error must leave the
    perturbed disparity positive.
    """
    if z_mm <= 0.0:
        raise RangeError("z_mm must be > 0")
    if disparity_error_px < 0.0:
        raise RangeError("disparity_error_px must be >= 0")
    fb = rig.focal_px * rig.baseline_mm
    d = fb / z_mm
    if d - disparity_error_px <= 0.0:
        raise RangeError(
            f"disparity error {disparity_error_px} px swallows the disparity "
            f"{d:.4f} px implied by z = {z_mm} mm")
    z_low = fb / (d + disparity_error_px)
    z_high = fb / (d - disparity_error_px)
    return z_low, z_high, z_high - z_low


POINTS_CSV_HEADER = ["x_mm", "y_mm", "z_mm", "xl", "yl"]


def write_points_csv(rows: list[tuple[Point3D, float, float]],
                     path: str | Path) -> None:
    """Write triangulated points as CSV rows (point, xl, yl)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POINTS_CSV_HEADER)
        for point, xl, yl in rows:
            writer.writerow([repr(point.x_mm), repr(point.y_mm),
                             repr(point.z_mm), xl, yl])


def triangulate_matches(matches: list[RefinedMatch],
                        rig: StereoRig) -> list[tuple[Point3D, float, float]]:
    """Triangulate every refined match with positive disparity."""
    rows = []
    for rm in matches:
        if rm.disparity <= 0.0:
            continue
        point = triangulate(rm.base.left.x, rm.base.left.y, rm.disparity, rig)
        rows.append((point, float(rm.base.left.x), float(rm.base.left.y)))
    return rows
