"""Sub-pixel stereo matching for low-resolution thermal image pairs.

Pipeline: phase congruency feature extraction -> constrained integer
matching on moment maps -> phase-only-correlation sub-pixel refinement
-> triangulation, plus the synthetic-shift evaluation harness behind
the ``subtherm`` command line tool.
"""

from .errors import (ConfigError, DegenerateSystem, DimensionError,
                     DimensionMismatch, FormatError, NonPositiveDisparity,
                     OutOfRange, RangeError, SpecError, SubthermError)
from .evaluate import (EvalCell, EvalReport, SweepSpec, audit_mismatches,
                       run_brightness_sweep, run_shift_sweep)
from .features import Feature, detect_features, redetection_rate
from .image import (GrayImage, ShiftSpec, apply_brightness, clip_unit,
                    export_scaled_pgm, load_pgm, save_pgm, subpixel_shift)
from .matching import Match, MatchConfig, lades_similarity, match_features
from .phasecong import (OrientedResponses, PcConfig, PhaseCongruencyResult,
                        compute_phase_congruency, log_gabor_filter_bank,
                        oriented_responses)
from .subpixel import (CorrelationSurface, PocConfig, RefinedMatch,
                       cross_power_spectrum, estimate_delta, poc_surface,
                       read_refined_csv, refine_match)
from .synthetic import thermal_like
from .triangulation import (Point3D, StereoRig, depth_error_range,
                            focal_from_hfov, load_rig, triangulate)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateSystem", "DimensionError", "DimensionMismatch",
    "FormatError", "NonPositiveDisparity", "OutOfRange", "RangeError",
    "SpecError", "SubthermError",
    "EvalCell", "EvalReport", "SweepSpec", "audit_mismatches",
    "run_brightness_sweep", "run_shift_sweep",
    "Feature", "detect_features", "redetection_rate",
    "GrayImage", "ShiftSpec", "apply_brightness", "clip_unit",
    "export_scaled_pgm", "load_pgm", "save_pgm", "subpixel_shift",
    "Match", "MatchConfig", "lades_similarity", "match_features",
    "OrientedResponses", "PcConfig", "PhaseCongruencyResult",
    "compute_phase_congruency", "log_gabor_filter_bank", "oriented_responses",
    "CorrelationSurface", "PocConfig", "RefinedMatch", "cross_power_spectrum",
    "estimate_delta", "poc_surface", "read_refined_csv", "refine_match",
    "thermal_like",
    "Point3D", "StereoRig", "depth_error_range", "focal_from_hfov",
    "load_rig", "triangulate",
    "__version__",
]
