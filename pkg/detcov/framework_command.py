#!/usr/bin/env python3.11

"""
Framework Command

The ``framework`` subcommand runs the detector combination framework on every
image group of a dataset manifest (its ``pairs``, or each image alone when no
pairs are declared).

Two tables are reported:

trace
    Every coverage value computed while deciding, one row per image and step.
decisions
    One row per group: operating mode, chosen detectors, whether the fallback
    was used and the worst final coverage relative to its threshold.
"""

# First-party imports
from pathlib import Path
from typing import Dict, Optional

# Project imports
from .command import EXIT_PARTIAL, EXIT_USAGE, ReportCommand, RunOptions
from .dataset import load_manifest, scan_dataset
from .detector_registry import DetectorRegistry
from .errors import DetcovError
from .framework import TRACE_COLUMNS, run_batch, trace_rows
from .knowledge_base import (
    DetectorCategory,
    KnowledgeBase,
    load_default_knowledge_base,
    load_knowledge_base,
)


class FrameworkCommand(ReportCommand):
    """
    Decide single or multiple detector mode for every group of a manifest.
    """

    name = "framework"

    def __init__(
        self,
        manifest_path: Path,
        start_detector: str,
        options: RunOptions,
        kb_path: Optional[Path] = None,
        choices: Optional[Dict[str, str]] = None,
    ) -> None:
        super().__init__(options)
        self.manifest_path = Path(manifest_path)
        self.start_detector = start_detector
        self.kb_path = Path(kb_path) if kb_path else None
        self.choices = dict(choices or {})

    def _knowledge_base(self) -> KnowledgeBase:
        if self.kb_path is None:
            return load_default_knowledge_base()
        try:
            data = self.kb_path.read_bytes()
        except OSError as ose:
            raise DetcovError(f"Cannot read knowledge base {self.kb_path}: {ose}") from ose
        return load_knowledge_base(data)

    def execute(self):
        receiver = self.begin(
            [str(self.manifest_path)],
            start=self.start_detector,
            kb=str(self.kb_path) if self.kb_path else "default",
            choices=self.choices,
        )
        receiver.add_table("trace", list(TRACE_COLUMNS))
        receiver.add_table(
            "decisions", ["pair_id", "mode", "detectors", "fallback", "worst_margin"]
        )
        try:
            manifest = load_manifest(self.manifest_path)
            kb = self._knowledge_base()
            kb.category_of(self.start_detector)
            choices = {
                DetectorCategory.from_name(category): detector
                for category, detector in self.choices.items()
            }
        except DetcovError as err:
            self.fail(str(err), EXIT_USAGE)
            return
        if self.start_detector not in [d.name for d in manifest.detectors]:
            self.fail(f"Start detector {self.start_detector!r} is not in the manifest", EXIT_USAGE)
            return

        index = scan_dataset(None, manifest)
        registry = DetectorRegistry.from_index(index)
        with self.stopwatch("total"):
            batch = run_batch(
                manifest.groups(),
                self.start_detector,
                registry,
                kb,
                manifest.images,
                workers=self.options.workers,
                choices=choices,
                epsilon=self.options.epsilon,
                progress=self.options.progress,
            )

        for row in trace_rows(batch.decisions):
            receiver.add_row("trace", [row[column] for column in TRACE_COLUMNS])
        for decision in batch.decisions:
            margin = min(v - t for v, t in zip(decision.final_values, decision.thresholds))
            receiver.add_row(
                "decisions",
                [
                    decision.pair_id,
                    int(decision.mode),
                    "+".join(decision.detectors),
                    int(decision.fallback),
                    margin,
                ],
            )
        for pair_id, message in batch.failures:
            self.fail(f"{pair_id}: {message}", EXIT_PARTIAL)
