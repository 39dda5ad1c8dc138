#!/usr/bin/env python3.11

"""
Synthetic Data Commands

``synth`` writes a generated keypoint set in the csv keypoint format, to a file
or to stdout. ``bench`` times coverage on uniform sets of growing size; with
``--no-timing`` only the deterministic columns are reported.
"""

# First-party imports
import sys
from pathlib import Path
from typing import List, Optional, Sequence

# Third-party imports
import numpy as np

# Project imports
from .command import Command, ReportCommand, RunOptions
from .coverage import coverage
from .errors import UsageError
from .keypoint_format import serialize_csv
from .keypoints import ImageDims
from .logging_manager import LoggingManager
from .synthetic import GeneratorSpec, gen_uniform

BENCH_DIMS = ImageDims(1440, 956)


class SynthCommand(Command):
    """
    Generate a synthetic keypoint set and write it as csv.
    """

    def __init__(self, spec: GeneratorSpec, output_filename: Optional[Path] = None) -> None:
        """
        Initialize the SynthCommand.

        Args:
            spec (GeneratorSpec): What to generate.
            output_filename (Optional[Path]): Destination file; None writes to stdout.
        """
        super().__init__()
        self.spec = spec
        self.output_filename = Path(output_filename) if output_filename else None
        self.logger = LoggingManager(__name__).logger

    def execute(self):
        keypoints = self.spec.generate()
        text = serialize_csv(keypoints)
        if self.output_filename is None:
            sys.stdout.write(text)
        else:
            self.output_filename.write_text(text, encoding="utf-8")
        self.logger.info(
            "Generated %d %s keypoints (seed %d)", len(keypoints), self.spec.kind, self.spec.seed
        )


class BenchCommand(ReportCommand):
    """
    Coverage timings on uniform keypoint sets.
    """

    name = "bench"

    def __init__(self, sizes: Sequence[int], options: RunOptions, repetitions: int = 3) -> None:
        super().__init__(options)
        if repetitions < 1:
            raise UsageError(f"--reps must be >= 1, got {repetitions}")
        too_small = [n for n in sizes if n < 2]
        if not sizes or too_small:
            raise UsageError(f"bench sizes must all be >= 2, got {list(sizes)}")
        self.sizes = list(sizes)
        self.repetitions = repetitions

    def execute(self):
        dims = self.options.dims or BENCH_DIMS
        receiver = self.begin(
            [f"n={n}" for n in self.sizes], repetitions=self.repetitions, bench_dims=str(dims)
        )
        columns = ["n", "repetitions", "coverage"]
        if self.options.timing:
            columns += ["median_ms", "min_ms", "max_ms"]
        receiver.add_table("bench", columns)
        for n in self.sizes:
            keypoints = gen_uniform(n, dims, self.options.seed)
            times: List[float] = []
            value = float("nan")
            for _ in range(self.repetitions):
                with self.stopwatch() as elapsed:
                    value = coverage(keypoints, self.options.epsilon)
                times.append(elapsed["ms"])
            self.logger.debug("n=%d coverage %.4f in %.2f ms", n, value, min(times))
            row: List[object] = [n, self.repetitions, value]
            if self.options.timing:
                row += [float(np.median(times)), min(times), max(times)]
            receiver.add_row("bench", row)

