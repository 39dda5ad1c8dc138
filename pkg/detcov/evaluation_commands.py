#!/usr/bin/env python3.11

"""
Evaluation Commands

The ``evaluate`` subcommand measures every detector of a dataset manifest on
every image, then summarizes and compares the detectors:

records
    One row per (image, detector): coverage, threshold, PASS/FAIL.
curves
    Coverage per image, one column per detector (plot-ready).
summary
    Per detector: images evaluated, passes, mean coverage and its confidence
    interval.
mcnemar
    Every detector pair: the four outcome counts and McNemar's Z, flagged
    ``unreliable`` below 30 discordant images.
matrix
    The signed Z of every pair laid out as an upper-triangular matrix;
    positive values mean the row detector did better.

With ``pairs`` enabled two more tables measure how well detectors complement
each other:

pair_values
    Mutual coverage of every detector pair on every image both cover.
pairs
    Per detector pair: images measured, mean mutual coverage and its
    confidence interval.

Entries are measured in parallel, but rows always follow manifest order.
The ``mcnemar`` subcommand computes the statistic from counts given directly.
"""

# First-party imports
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

# Third-party imports
from tqdm import tqdm

# Project imports
from .command import EXIT_PARTIAL, EXIT_USAGE, ReportCommand, RunOptions
from .coverage import coverage, mutual_coverage
from .dataset import DatasetEntry, load_manifest, scan_dataset
from .errors import DegenerateCounts, DetcovError, InsufficientData
from .evaluation import (
    EvaluationRecord,
    McNemarCounts,
    mcnemar,
    mcnemar_matrix,
    mean_ci,
    records_by_detector,
)
from .keypoint_format import get_format
from .keypoints import KeyPointSet

Outcome = Tuple[Union[EvaluationRecord, str], int, float, Optional[KeyPointSet]]
Summary = Tuple[Optional[float], Optional[float], Optional[float]]


def _reliability(discordant: int, reliable: Optional[bool]) -> str:
    if reliable is None or discordant == 0:
        return "degenerate"
    return "reliable" if reliable else "unreliable"


def _mean_with_ci(values: List[float], level: float) -> Summary:
    """
    Mean and confidence interval; a single value has a mean but no interval.
    """
    try:
        return mean_ci(values, level)
    except InsufficientData:
        return (values[0] if values else None), None, None


class EvaluateCommand(ReportCommand):
    """
    Coverage of every (image, detector) of a manifest, with detector statistics.
    """

    name = "evaluate"

    def __init__(
        self,
        manifest_path: Path,
        options: RunOptions,
        detectors: Optional[Sequence[str]] = None,
        level: float = 0.95,
        pairs: bool = False,
    ) -> None:
        super().__init__(options)
        self.manifest_path = Path(manifest_path)
        self.detectors = list(detectors) if detectors else None
        self.level = level
        self.pairs = pairs

    def _evaluate(self, entry: DatasetEntry) -> Outcome:
        with self.stopwatch() as elapsed:
            try:
                keypoints = get_format(entry.format).load(entry.path, entry.detector, entry.image_id)
                value = coverage(keypoints, self.options.epsilon)
                outcome: Union[EvaluationRecord, str] = EvaluationRecord.assess(
                    entry.image_id, entry.detector, value, entry.dims
                )
                points = len(keypoints)
            except (DetcovError, OSError) as err:
                outcome, points = f"{entry.detector}/{entry.image_id}: {err}", 0
                keypoints = None
        return outcome, points, elapsed["ms"], keypoints if self.pairs else None

    def execute(self):
        receiver = self.begin([str(self.manifest_path)], level=self.level, pairs=self.pairs)
        try:
            manifest = load_manifest(self.manifest_path)
        except DetcovError as err:
            self.fail(str(err), EXIT_USAGE)
            return
        declared = [d.name for d in manifest.detectors]
        selected = self.detectors or declared
        unknown = [d for d in selected if d not in declared]
        if unknown:
            self.fail(f"Detectors not in the manifest: {', '.join(unknown)}", EXIT_USAGE)
            return

        index = scan_dataset(None, manifest)
        for absence in index.absences:
            if absence.detector in selected:
                receiver.add_error(f"absent: {absence.detector}/{absence.image_id} ({absence.path})")
        entries = [
            entry
            for image_id in manifest.images
            for name in selected
            for entry in [index.entry(image_id, name)]
            if entry is not None
        ]

        with self.stopwatch("total"):
            with ThreadPoolExecutor(max_workers=max(1, self.options.workers)) as executor:
                outcomes = list(
                    tqdm(
                        executor.map(self._evaluate, entries),
                        total=len(entries),
                        desc="evaluate",
                        unit="file",
                        disable=not self.options.progress,
                    )
                )

        records = self._records_table(entries, outcomes)
        if not records:
            self.fail("No (image, detector) entry could be evaluated", EXIT_PARTIAL)
        grouped = records_by_detector(records, selected)
        self._curves_table(list(manifest.images), selected, records)
        self._summary_table(grouped)
        self._mcnemar_tables(selected, grouped)
        if self.pairs:
            loaded = {
                (keypoints.image_id, keypoints.detector): keypoints
                for _, _, _, keypoints in outcomes
                if keypoints is not None
            }
            self._pairs_tables(list(manifest.images), selected, loaded)

    def _records_table(
        self, entries: List[DatasetEntry], outcomes: List[Outcome]
    ) -> List[EvaluationRecord]:
        assert self.receiver, "No receiver set."
        columns = ["image_id", "detector", "points", "coverage", "threshold", "result"]
        if self.options.timing:
            columns.append("time_ms")
        self.receiver.add_table("records", columns)
        records: List[EvaluationRecord] = []
        for entry, (outcome, points, milliseconds, _) in zip(entries, outcomes):
            if isinstance(outcome, str):
                self.logger.error(outcome)
                self.receiver.add_error(outcome)
                row: List[object] = [entry.image_id, entry.detector, points, None, None, "ERROR"]
            else:
                records.append(outcome)
                row = [
                    outcome.image_id,
                    outcome.detector,
                    points,
                    outcome.coverage,
                    outcome.threshold,
                    "PASS" if outcome.passed else "FAIL",
                ]
            if self.options.timing:
                row.append(milliseconds)
            self.receiver.add_row("records", row)
        return records

    def _curves_table(
        self, images: List[str], detectors: List[str], records: List[EvaluationRecord]
    ) -> None:
        assert self.receiver, "No receiver set."
        values: Dict[Tuple[str, str], float] = {(r.image_id, r.detector): r.coverage for r in records}
        self.receiver.add_table("curves", ["image_id", *detectors])
        for image_id in images:
            self.receiver.add_row(
                "curves", [image_id, *(values.get((image_id, d)) for d in detectors)]
            )

    def _summary_table(self, grouped: Dict[str, List[EvaluationRecord]]) -> None:
        assert self.receiver, "No receiver set."
        self.receiver.add_table(
            "summary", ["detector", "images", "passed", "mean", "ci_low", "ci_high"]
        )
        for detector, records in grouped.items():
            mean, low, high = _mean_with_ci([r.coverage for r in records], self.level)
            self.receiver.add_row(
                "summary",
                [detector, len(records), sum(r.passed for r in records), mean, low, high],
            )

    def _mcnemar_tables(
        self, detectors: List[str], grouped: Dict[str, List[EvaluationRecord]]
    ) -> None:
        assert self.receiver, "No receiver set."
        self.receiver.add_table(
            "mcnemar",
            ["left", "right", "n_ss", "n_sf", "n_fs", "n_ff", "z", "signed_z", "reliability"],
        )
        self.receiver.add_table("matrix", ["detector", *detectors[1:]])
        if len(detectors) < 2:
            return
        matrix = mcnemar_matrix(grouped)
        for (left, right), (counts, result) in matrix.items():
            self.receiver.add_row(
                "mcnemar",
                [
                    left,
                    right,
                    counts.n_ss,
                    counts.n_sf,
                    counts.n_fs,
                    counts.n_ff,
                    result.z if result else None,
                    result.signed_z if result else None,
                    _reliability(counts.discordant, result.reliable if result else None),
                ],
            )
        for i, left in enumerate(detectors[:-1]):
            row: List[object] = [left]
            for j, right in enumerate(detectors[1:], start=1):
                result = matrix[(left, right)][1] if j > i else None
                row.append(result.signed_z if result else None)
            self.receiver.add_row("matrix", row)

    def _mutual(self, task: Tuple[KeyPointSet, KeyPointSet]) -> Union[float, str]:
        left, right = task
        try:
            return mutual_coverage([left, right], self.options.epsilon)
        except DetcovError as err:
            return f"{left.detector}+{right.detector}/{left.image_id}: {err}"

    def _pairs_tables(
        self,
        images: List[str],
        detectors: List[str],
        loaded: Dict[Tuple[str, str], KeyPointSet],
    ) -> None:
        assert self.receiver, "No receiver set."
        self.receiver.add_table("pair_values", ["image_id", "left", "right", "mutual_coverage"])
        self.receiver.add_table("pairs", ["left", "right", "images", "mean", "ci_low", "ci_high"])
        keys = [
            (image_id, left, right)
            for left, right in combinations(detectors, 2)
            for image_id in images
            if (image_id, left) in loaded and (image_id, right) in loaded
        ]
        tasks = [(loaded[(i, left)], loaded[(i, right)]) for i, left, right in keys]
        with self.stopwatch("pairs"):
            with ThreadPoolExecutor(max_workers=max(1, self.options.workers)) as executor:
                values = list(
                    tqdm(
                        executor.map(self._mutual, tasks),
                        total=len(tasks),
                        desc="pairs",
                        unit="pair",
                        disable=not self.options.progress,
                    )
                )

        per_pair: Dict[Tuple[str, str], List[float]] = {
            pair: [] for pair in combinations(detectors, 2)
        }
        for (image_id, left, right), value in zip(keys, values):
            if isinstance(value, str):
                self.logger.error(value)
                self.receiver.add_error(value)
                continue
            per_pair[(left, right)].append(value)
            self.receiver.add_row("pair_values", [image_id, left, right, value])
        for (left, right), pair_values in per_pair.items():
            mean, low, high = _mean_with_ci(pair_values, self.level)
            self.receiver.add_row("pairs", [left, right, len(pair_values), mean, low, high])


class McNemarCommand(ReportCommand):
    """
    McNemar's test from outcome counts given on the command line.
    """

    name = "mcnemar"

    def __init__(self, counts: McNemarCounts, options: RunOptions) -> None:
        super().__init__(options)
        self.counts = counts

    def execute(self):
        receiver = self.begin(
            [f"n_ss={self.counts.n_ss}", f"n_sf={self.counts.n_sf}",
             f"n_fs={self.counts.n_fs}", f"n_ff={self.counts.n_ff}"]
        )
        receiver.add_table("mcnemar", ["n_sf", "n_fs", "z", "signed_z", "reliability"])
        try:
            result = mcnemar(self.counts)
        except DegenerateCounts as dc:
            self.fail(str(dc), EXIT_USAGE)
            return
        receiver.add_row(
            "mcnemar",
            [
                self.counts.n_sf,
                self.counts.n_fs,
                result.z,
                result.signed_z,
                _reliability(self.counts.discordant, result.reliable),
            ],
        )
