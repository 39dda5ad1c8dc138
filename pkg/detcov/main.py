#!/usr/bin/env python3.11

"""
This script is the ``detcov`` command line: it measures how well keypoints
cover an image, compares detectors and runs the detector combination framework.

Subcommands:

    detcov coverage FILE...     coverage of keypoint files
    detcov mutual FILE...       mutual coverage of several detectors on one image
    detcov hull FILE...         convex-hull area ratio next to coverage
    detcov evaluate             every detector of a manifest on every image
    detcov mcnemar N_SF N_FS    McNemar's test from outcome counts
    detcov framework            single or multiple detector mode per image pair
    detcov synth KIND           write a synthetic keypoint set as csv
    detcov bench                time coverage on synthetic sets

Reports go to stdout (or ``--out``) as an aligned table, ``--csv`` or
``--json``; logs go to stderr. The exit code is 0 on success, 1 when some
inputs failed and 2 on usage or parse errors.
"""

# First-party imports
import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

# Project imports
from . import __version__
from .command import EXIT_OK, EXIT_USAGE, RunOptions
from .errors import UsageError
from .evaluation import McNemarCounts
from .evaluation_commands import EvaluateCommand, McNemarCommand
from .framework_command import FrameworkCommand
from .keypoint_format import FORMATS
from .keypoints import ImageDims
from .knowledge_base import DetectorCategory
from .logging_manager import LoggingManager
from .metric_commands import CoverageCommand, HullCommand, MutualCommand
from .report_invoker import ReportInvoker
from .synth_command import BenchCommand, SynthCommand
from .synthetic import GENERATOR_KINDS, GeneratorSpec


def _dims(text: str) -> ImageDims:
    try:
        return ImageDims.parse(text)
    except ValueError as ve:
        raise argparse.ArgumentTypeError(str(ve)) from ve


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as ve:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from ve
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def _nonnegative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as ve:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from ve
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return value


def _choices(items: Optional[Sequence[str]]) -> Dict[str, str]:
    """
    Parse ``CATEGORY=DETECTOR`` overrides of the framework.
    """
    parsed: Dict[str, str] = {}
    for item in items or ():
        category, sep, detector = item.partition("=")
        if not sep or not category or not detector:
            raise UsageError(f"--choose expects CATEGORY=DETECTOR, got {item!r}")
        if category not in {c.value for c in DetectorCategory}:
            raise UsageError(f"--choose: unknown detector category {category!r}")
        parsed[category] = detector
    return parsed


def build_parser() -> argparse.ArgumentParser:
    """
    The argparse parser of every subcommand.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dims", type=_dims, help="Image dimensions as WIDTHxHEIGHT.")
    common.add_argument(
        "--format", dest="fmt", choices=sorted(FORMATS), default="csv",
        help="Keypoint file format (default: csv).",
    )
    common.add_argument(
        "--epsilon", type=_nonnegative_float, default=0.0,
        help="Merge keypoints closer than this distance (default: 0, exact duplicates only).",
    )
    common.add_argument("--out", type=Path, help="Write the output to this file.")
    output = common.add_mutually_exclusive_group()
    output.add_argument("--json", action="store_true", help="Write a JSON report.")
    output.add_argument("--csv", action="store_true", help="Write csv tables.")
    common.add_argument(
        "--full-precision", action="store_true",
        help="Write floats with full precision instead of 4 decimals.",
    )
    common.add_argument(
        "--no-timing", action="store_true", help="Leave wall-clock timings out of the report."
    )
    common.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1,
        help="Parallel workers for batch commands (default: number of cores).",
    )
    common.add_argument("--seed", type=_nonnegative_int, default=0, help="Random seed.")
    common.add_argument(
        "--progress", action="store_true", help="Show progress bars on stderr."
    )
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="More logging (-v info, -vv debug)."
    )

    parser = argparse.ArgumentParser(
        prog="detcov",
        description="Measure the spatial coverage of keypoint detectors and combine them.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    coverage = subparsers.add_parser(
        "coverage", parents=[common], help="Coverage of keypoint files."
    )
    coverage.add_argument("files", nargs="+", type=Path)
    coverage.add_argument("--hull", action="store_true", help="Add the convex-hull area ratio.")
    coverage.add_argument(
        "--means", action="store_true", help="Add arithmetic and geometric pairwise means."
    )

    mutual = subparsers.add_parser(
        "mutual", parents=[common], help="Mutual coverage of keypoint files of one image."
    )
    mutual.add_argument("files", nargs="+", type=Path)
    mutual.add_argument("--image-id", default="image", help="Image the files belong to.")

    hull = subparsers.add_parser(
        "hull", parents=[common], help="Convex-hull area ratio of keypoint files."
    )
    hull.add_argument("files", nargs="+", type=Path)

    evaluate = subparsers.add_parser(
        "evaluate", parents=[common], help="Evaluate every detector of a dataset manifest."
    )
    evaluate.add_argument("--manifest", type=Path, required=True)
    evaluate.add_argument(
        "--detectors", nargs="+", help="Detectors to evaluate (default: all in the manifest)."
    )
    evaluate.add_argument(
        "--level", type=float, default=0.95, help="Confidence level of the mean (default: 0.95)."
    )
    evaluate.add_argument(
        "--pairs", action="store_true",
        help="Add the mean mutual coverage of every detector pair.",
    )

    mcnemar = subparsers.add_parser(
        "mcnemar", parents=[common], help="McNemar's test from paired outcome counts."
    )
    mcnemar.add_argument("n_sf", type=_nonnegative_int, help="Left passed, right failed.")
    mcnemar.add_argument("n_fs", type=_nonnegative_int, help="Left failed, right passed.")
    mcnemar.add_argument("--ss", type=_nonnegative_int, default=0, help="Both passed.")
    mcnemar.add_argument("--ff", type=_nonnegative_int, default=0, help="Both failed.")

    framework = subparsers.add_parser(
        "framework", parents=[common], help="Run the detector combination framework."
    )
    framework.add_argument("--manifest", type=Path, required=True)
    framework.add_argument("--start", required=True, help="Detector tried first.")
    framework.add_argument("--kb", type=Path, help="Knowledge base JSON (default: built-in).")
    framework.add_argument(
        "--choose", action="append", metavar="CATEGORY=DETECTOR",
        help="Detector to use for a complementary category.",
    )

    synth = subparsers.add_parser(
        "synth", parents=[common], help="Write a synthetic keypoint set as csv."
    )
    synth.add_argument("kind", choices=GENERATOR_KINDS)
    synth.add_argument("--n", type=_nonnegative_int, default=100, help="Number of points.")
    synth.add_argument("--rows", type=int, default=1, help="Grid rows.")
    synth.add_argument("--cols", type=int, default=1, help="Grid columns.")
    synth.add_argument("--k", type=int, default=3, help="Number of clusters.")
    synth.add_argument("--sigma", type=float, default=20.0, help="Cluster spread in pixels.")
    synth.add_argument("--detector", help="Detector name of the generated set.")
    synth.add_argument("--image-id", default="synthetic", help="Image id of the generated set.")

    bench = subparsers.add_parser(
        "bench", parents=[common], help="Time coverage on uniform synthetic sets."
    )
    bench.add_argument(
        "--n", dest="sizes", type=int, nargs="+", default=[100, 1000, 10000],
        help="Set sizes to time.",
    )
    bench.add_argument("--reps", type=int, default=3, help="Repetitions per size.")
    return parser


def _run_options(args: argparse.Namespace) -> RunOptions:
    if args.workers < 1:
        raise UsageError(f"--workers must be >= 1, got {args.workers}")
    return RunOptions(
        dims=args.dims,
        fmt=args.fmt,
        epsilon=args.epsilon,
        workers=args.workers,
        seed=args.seed,
        full_precision=args.full_precision,
        timing=not args.no_timing,
        progress=args.progress,
    )


def _build_command(args: argparse.Namespace, options: RunOptions):
    if args.command == "coverage":
        if args.hull and options.dims is None:
            raise UsageError("coverage --hull needs --dims")
        return CoverageCommand(args.files, options, hull=args.hull, means=args.means)
    if args.command == "mutual":
        return MutualCommand(args.files, options, image_id=args.image_id)
    if args.command == "hull":
        if options.dims is None:
            raise UsageError("hull needs --dims")
        return HullCommand(args.files, options)
    if args.command == "evaluate":
        if not 0.0 < args.level < 1.0:
            raise UsageError(f"--level must lie in (0, 1), got {args.level}")
        return EvaluateCommand(
            args.manifest, options, args.detectors, args.level, pairs=args.pairs
        )
    if args.command == "mcnemar":
        return McNemarCommand(McNemarCounts(args.ss, args.n_sf, args.n_fs, args.ff), options)
    if args.command == "framework":
        return FrameworkCommand(
            args.manifest, args.start, options, args.kb, _choices(args.choose)
        )
    if args.command == "synth":
        if options.dims is None:
            raise UsageError("synth needs --dims")
        try:
            spec = GeneratorSpec(
                kind=args.kind,
                dims=options.dims,
                n=args.n,
                rows=args.rows,
                cols=args.cols,
                seed=options.seed,
                k=args.k,
                sigma=args.sigma,
                detector=args.detector,
                image_id=args.image_id,
            )
        except ValueError as ve:
            raise UsageError(str(ve)) from ve
        return SynthCommand(spec, args.out)
    return BenchCommand(args.sizes, options, args.reps)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse the command line, run one subcommand and write its report.

    Args:
        argv (Optional[List[str]]): Arguments without the program name;
            defaults to ``sys.argv[1:]``.

    Returns:
        int: The exit code (0 success, 1 partial failure, 2 usage or parse error).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        code = exit_request.code
        if code is None:
            return EXIT_OK
        return code if isinstance(code, int) else EXIT_USAGE
    LoggingManager.set_level(LoggingManager.level_for_verbosity(args.verbose))
    logger = LoggingManager(__name__).logger

    try:
        options = _run_options(args)
        command = _build_command(args, options)
    except UsageError as ue:
        print(f"detcov {args.command}: {ue}", file=sys.stderr)
        return EXIT_USAGE

    invoker = ReportInvoker(options.full_precision)
    exit_code = invoker.execute_command(command)
    if isinstance(command, SynthCommand):
        return exit_code

    fmt = "json" if args.json else "csv" if args.csv else "table"
    rendered = invoker.dump_file(args.out, fmt)
    if args.out is None:
        sys.stdout.write(rendered)
    logger.debug("%s finished with exit code %d", args.command, exit_code)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
