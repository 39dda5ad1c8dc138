#!/usr/bin/env python3.11

"""
Metric Commands

The ``coverage``, ``mutual`` and ``hull`` subcommands: measure keypoint files
given on the command line.

Every file is named after its stem (``sift_img01.csv`` becomes detector and
image ``sift_img01``). A file that cannot be read or parsed yields an ``ERROR``
row and exit code 2; a set with fewer than two distinct locations yields an
``ERROR`` row and exit code 1. The other files are still reported.
"""

# First-party imports
from pathlib import Path
from typing import List, Optional, Sequence

# Project imports
from .command import EXIT_PARTIAL, EXIT_USAGE, ReportCommand, RunOptions
from .coverage import canonicalize, convex_hull_ratio, coverage, mutual_coverage, pairwise_means
from .errors import InsufficientPoints, ParseError
from .evaluation import area_perimeter_threshold, evaluate_criterion
from .keypoint_format import get_format
from .keypoints import KeyPointSet


def _verdict(value: float, options: RunOptions) -> str:
    if options.dims is None:
        return "-"
    return "PASS" if evaluate_criterion(value, options.dims) else "FAIL"


class FileCommand(ReportCommand):
    """
    Base class of commands reading keypoint files.
    """

    def __init__(self, files: Sequence[Path], options: RunOptions, image_id: Optional[str] = None):
        super().__init__(options)
        self.files = [Path(f) for f in files]
        self.image_id = image_id

    def read(self, path: Path) -> Optional[KeyPointSet]:
        """
        Parse one file, recording an error and returning None on failure.
        """
        try:
            return get_format(self.options.fmt).load(
                path, detector=path.stem, image_id=self.image_id or path.stem
            )
        except ParseError as pe:
            self.fail(f"{path}: {pe}" if pe.source is None else str(pe), EXIT_USAGE)
        except OSError as ose:
            self.fail(f"{path}: cannot read file ({ose.strerror or ose})", EXIT_USAGE)
        return None

    @property
    def threshold(self) -> Optional[float]:
        return area_perimeter_threshold(self.options.dims) if self.options.dims else None


class CoverageCommand(FileCommand):
    """
    Coverage of each keypoint file, with the pass/fail verdict when dims are given.
    """

    name = "coverage"

    def __init__(
        self,
        files: Sequence[Path],
        options: RunOptions,
        hull: bool = False,
        means: bool = False,
    ) -> None:
        super().__init__(files, options)
        self.hull = hull
        self.means = means

    def execute(self):
        receiver = self.begin([str(f) for f in self.files], hull=self.hull, means=self.means)
        columns = ["file", "points", "distinct", "coverage", "threshold", "result"]
        if self.hull:
            columns.append("hull_ratio")
        if self.means:
            columns += ["arithmetic", "geometric"]
        if self.options.timing:
            columns.append("time_ms")
        receiver.add_table("coverage", columns)

        with self.stopwatch("total"):
            for path in self.files:
                with self.stopwatch() as elapsed:
                    row = self._measure(path)
                if self.options.timing:
                    row.append(elapsed["ms"])
                receiver.add_row("coverage", row)

    def _measure(self, path: Path) -> List[object]:
        extra = int(self.hull) + 2 * int(self.means)
        keypoints = self.read(path)
        if keypoints is None:
            return [str(path), None, None, None, self.threshold, "ERROR"] + [None] * extra
        distinct = len(canonicalize(keypoints, self.options.epsilon))
        try:
            value = coverage(keypoints, self.options.epsilon)
        except InsufficientPoints as ip:
            self.fail(f"{path}: {ip}", EXIT_PARTIAL)
            return [str(path), len(keypoints), distinct, None, self.threshold, "ERROR"] + [None] * extra
        row: List[object] = [
            str(path), len(keypoints), distinct, value, self.threshold, _verdict(value, self.options)
        ]
        if self.hull:
            assert self.options.dims, "hull ratio needs image dimensions"
            row.append(convex_hull_ratio(keypoints, self.options.dims))
        if self.means:
            means = pairwise_means(keypoints, self.options.epsilon)
            row += [means.arithmetic, means.geometric]
        return row


class MutualCommand(FileCommand):
    """
    Coverage of each file and mutual coverage of all files together.
    """

    name = "mutual"

    def __init__(self, files: Sequence[Path], options: RunOptions, image_id: str = "image"):
        super().__init__(files, options, image_id=image_id)

    def execute(self):
        receiver = self.begin([str(f) for f in self.files], image_id=self.image_id)
        receiver.add_table("mutual", ["detectors", "points", "coverage", "threshold", "result"])
        sets: List[KeyPointSet] = []
        with self.stopwatch("total"):
            for path in self.files:
                keypoints = self.read(path)
                if keypoints is None:
                    continue
                sets.append(keypoints)
                self._row(keypoints.detector, [keypoints])
            if len(sets) != len(self.files):
                self.fail("Mutual coverage skipped: not every file could be read", EXIT_USAGE)
                return
            self._row("+".join(s.detector for s in sets), sets)

    def _row(self, label: str, sets: List[KeyPointSet]) -> None:
        assert self.receiver, "No receiver set."
        points = sum(len(s) for s in sets)
        try:
            value = mutual_coverage(sets, self.options.epsilon)
        except InsufficientPoints as ip:
            self.fail(f"{label}: {ip}", EXIT_PARTIAL)
            self.receiver.add_row("mutual", [label, points, None, self.threshold, "ERROR"])
            return
        self.receiver.add_row(
            "mutual", [label, points, value, self.threshold, _verdict(value, self.options)]
        )


class HullCommand(FileCommand):
    """
    Convex-hull area ratio of each file next to its coverage.
    """

    name = "hull"

    def execute(self):
        receiver = self.begin([str(f) for f in self.files])
        receiver.add_table("hull", ["file", "points", "hull_ratio", "coverage"])
        assert self.options.dims, "hull ratio needs image dimensions"
        with self.stopwatch("total"):
            for path in self.files:
                keypoints = self.read(path)
                if keypoints is None:
                    receiver.add_row("hull", [str(path), None, None, None])
                    continue
                try:
                    ratio = convex_hull_ratio(keypoints, self.options.dims)
                except InsufficientPoints as ip:
                    self.fail(f"{path}: {ip}", EXIT_PARTIAL)
                    receiver.add_row("hull", [str(path), 0, None, None])
                    continue
                try:
                    value: Optional[float] = coverage(keypoints, self.options.epsilon)
                except InsufficientPoints:
                    value = None
                receiver.add_row("hull", [str(path), len(keypoints), ratio, value])
