"""Command-line front end.

Subcommands mirror the pipeline stages::

    subtherm extract     frame.pgm --out features.csv
    subtherm match       left.pgm right.pgm --out matches.csv
    subtherm shift       frame.pgm --dx 2.5 --out shifted.pgm
    subtherm eval        frame.pgm --deltas 0:30:0.125 --out-dir report/
    subtherm brightness  frame.pgm --betas 0.05,0.2,0.39 --out-dir report/
    subtherm triangulate matches.csv --rig rig.json --out points.csv

Exit status is 0 when all requested outputs were written, 1 otherwise
with a diagnostic on stderr.  ``--config`` points at a JSON file whose
optional ``pc``, ``match`` and ``poc`` sections override the built-in
defaults; individual flags override the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import SubthermError
from .evaluate import (DEFAULT_TAUS, SweepSpec, run_brightness_sweep,
                       run_shift_sweep)
from .features import detect_features, write_features_csv
from .image import GrayImage, ShiftSpec, load_pgm, save_pgm, subpixel_shift
from .matching import MatchConfig, match_features, write_matches_csv
from .phasecong import PcConfig, compute_phase_congruency
from .subpixel import (SOURCE_MOMENT, SOURCE_RAW, PocConfig, read_refined_csv,
                       refine_match, write_refined_csv)
from .triangulation import load_rig, triangulate_matches, write_points_csv


def _parse_floats(text: str) -> tuple[float, ...]:
    """Comma list ('1,2.5,3') or inclusive range ('0:30:0.125')."""
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("range step must be > 0")
        count = int(round((stop - start) / step))
        values = [start + i * step for i in range(count + 1)]
        return tuple(v for v in values if v <= stop + 1e-9)
    return tuple(float(p) for p in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in _parse_floats(text))


def _load_sections(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise SubthermError(f"config root must be a JSON object: {path}")
    return doc


def _pc_config(sections: dict) -> PcConfig:
    return PcConfig(**sections.get("pc", {}))


def _match_config(sections: dict, args: argparse.Namespace) -> MatchConfig:
    kwargs = dict(sections.get("match", {}))
    for flag, key in (("dmin", "disparity_min"), ("dmax", "disparity_max"),
                      ("min_similarity", "min_similarity")):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[key] = value
    return MatchConfig(**kwargs)


def _poc_config(sections: dict, args: argparse.Namespace) -> PocConfig:
    kwargs = dict(sections.get("poc", {}))
    if getattr(args, "window", None) is not None:
        kwargs["window"] = args.window
    if getattr(args, "source", None) is not None:
        kwargs["source"] = args.source
    return PocConfig(**kwargs)


def _threads(args: argparse.Namespace) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    return int(os.environ.get("SUBTHERM_THREADS", "1"))


def _cmd_extract(args: argparse.Namespace) -> int:
    sections = _load_sections(args.config)
    image = load_pgm(args.image)
    pc = compute_phase_congruency(image, _pc_config(sections))
    features = detect_features(pc, args.gamma, nms_radius=args.nms)
    write_features_csv(features, args.out)
    print(f"{len(features)} features -> {args.out}")
    return 0


def _cmd_match(args: argparse.Namespace) -> int:
    sections = _load_sections(args.config)
    pc_cfg = _pc_config(sections)
    left = load_pgm(args.left)
    right = load_pgm(args.right)
    left_pc = compute_phase_congruency(left, pc_cfg)
    right_pc = compute_phase_congruency(right, pc_cfg)
    left_features = detect_features(left_pc, args.gamma)
    right_features = detect_features(right_pc, args.gamma)
    matches = match_features(left_features, right_features,
                             left_pc.moment_max, right_pc.moment_max,
                             _match_config(sections, args))
    if args.no_refine:
        write_matches_csv(matches, args.out)
        print(f"{len(matches)} matches -> {args.out}")
        return 0
    poc = _poc_config(sections, args)
    if poc.source == SOURCE_RAW:
        surfaces = (left, right)
    else:
        surfaces = (left_pc.moment_max, right_pc.moment_max)
    refined = [refine_match(m, surfaces[0], surfaces[1], poc)
               for m in matches]
    write_refined_csv(refined, args.out)
    print(f"{len(refined)} refined matches -> {args.out}")
    if args.rig is not None:
        rig = load_rig(args.rig)
        points = triangulate_matches(refined, rig)
        write_points_csv(points, args.points)
        print(f"{len(points)} points -> {args.points}")
    return 0


def _cmd_shift(args: argparse.Namespace) -> int:
    image = load_pgm(args.image)
    shifted = subpixel_shift(image, ShiftSpec(dx=args.dx, dy=args.dy))
    save_pgm(shifted, args.out, bit_depth=args.bit_depth)
    print(f"shifted by ({args.dx}, {args.dy}) -> {args.out}")
    return 0


def _synthetic_or_file(args: argparse.Namespace) -> GrayImage:
    if args.image is not None:
        return load_pgm(args.image)
    from .synthetic import thermal_like
    width, height = args.synthetic
    return thermal_like(width=width, height=height)


def _cmd_eval(args: argparse.Namespace) -> int:
    sections = _load_sections(args.config)
    image = _synthetic_or_file(args)
    spec = SweepSpec(deltas=_parse_floats(args.deltas),
                     windows=_parse_ints(args.windows),
                     gammas=_parse_floats(args.gammas),
                     taus=_parse_floats(args.taus),
                     slack=args.slack,
                     timing_reps=args.timing_reps,
                     pc_config=_pc_config(sections))
    report = run_shift_sweep(image, spec, threads=_threads(args))
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "report.json")
    csv_path = os.path.join(args.out_dir, "report.csv")
    report.write_json(json_path)
    report.write_csv(csv_path)
    written = [json_path, csv_path]
    if not args.no_figures:
        from .figures import plot_precision_vs_window, plot_rmsd_vs_window
        for name, plot in (("precision_vs_window.png",
                            plot_precision_vs_window),
                           ("rmsd_vs_window.png", plot_rmsd_vs_window)):
            fig_path = os.path.join(args.out_dir, name)
            plot(report, fig_path)
            written.append(fig_path)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_brightness(args: argparse.Namespace) -> int:
    sections = _load_sections(args.config)
    image = _synthetic_or_file(args)
    report = run_brightness_sweep(image, _parse_floats(args.betas),
                                  alpha=args.alpha, gamma=args.gamma,
                                  clip=args.clip,
                                  pc_config=_pc_config(sections))
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "brightness.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written = [json_path]
    if not args.no_figures:
        from .figures import plot_brightness_sweep
        fig_path = os.path.join(args.out_dir, "brightness.png")
        plot_brightness_sweep(report, fig_path)
        written.append(fig_path)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_triangulate(args: argparse.Namespace) -> int:
    refined = read_refined_csv(args.matches)
    rig = load_rig(args.rig)
    points = triangulate_matches(refined, rig)
    write_points_csv(points, args.out)
    print(f"{len(points)} points -> {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subtherm",
        description="Sub-pixel stereo matching for low-resolution "
                    "thermal-like image pairs.")
    parser.add_argument("--config", help="JSON file with pc/match/poc "
                                         "sections", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="detect features in one frame")
    p.add_argument("image")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--nms", type=int, default=0,
                   help="non-maximum suppression radius (0 = off)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("match", help="match a rectified pair and refine")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--dmin", type=int, default=None)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--min-similarity", type=float, default=None,
                   dest="min_similarity")
    p.add_argument("--window", type=int, default=None,
                   help="refinement window side (odd)")
    p.add_argument("--source", choices=[SOURCE_MOMENT, SOURCE_RAW],
                   default=None, help="surface the refinement correlates")
    p.add_argument("--no-refine", action="store_true",
                   help="stop at integer disparities")
    p.add_argument("--rig", default=None,
                   help="rig JSON; also triangulate the matches")
    p.add_argument("--points", default="points.csv",
                   help="output CSV when --rig is given")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("shift", help="sub-pixel translate a frame")
    p.add_argument("image")
    p.add_argument("--dx", type=float, required=True)
    p.add_argument("--dy", type=float, default=0.0)
    p.add_argument("--bit-depth", type=int, default=16, choices=(8, 16))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_shift)

    for name, helptext in (("eval", "run the shift-sweep protocol"),
                           ("brightness", "run the brightness protocol")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("image", nargs="?", default=None,
                       help="input PGM (omit to use a synthetic frame)")
        p.add_argument("--synthetic", type=_parse_ints, default=(80, 60),
                       metavar="W,H", help="synthetic frame size")
        p.add_argument("--gamma", type=float, default=0.1)
        p.add_argument("--out-dir", required=True)
        p.add_argument("--no-figures", action="store_true")
        if name == "eval":
            p.add_argument("--deltas", default="0:30:0.125")
            p.add_argument("--windows", default="9")
            p.add_argument("--gammas", default="0.1")
            p.add_argument("--taus",
                           default=",".join(str(t) for t in DEFAULT_TAUS))
            p.add_argument("--slack", type=int, default=0)
            p.add_argument("--timing-reps", type=int, default=0)
            p.add_argument("--threads", type=int, default=None,
                           help="worker threads (or SUBTHERM_THREADS)")
            p.set_defaults(func=_cmd_eval)
        else:
            p.add_argument("--betas", default="0.05,0.2,0.39")
            p.add_argument("--alpha", type=float, default=1.0)
            p.add_argument("--clip", action="store_true")
            p.set_defaults(func=_cmd_brightness)

    p = sub.add_parser("triangulate", help="matches CSV + rig -> 3-D points")
    p.add_argument("matches")
    p.add_argument("--rig", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_triangulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SubthermError, OSError, ValueError, KeyError) as exc:
        print(f"subtherm: error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
