#!/usr/bin/env python3.11

"""
Command

This module defines the command classes behind the detcov subcommands.

The `Command` class is an abstract base class for command objects, providing a
common interface for executing the different subcommands.

The `ReportCommand` class is a command whose results go into a run report. A
`ReportReceiver` is attached before execution; the command adds its tables,
timings and errors to it and records the exit code of the run
(0 success, 1 partial failure, 2 usage or parse error).

`RunOptions` carries the knobs shared by every subcommand.

Please refer to the specific command classes and their docstrings for details
on their usage.
"""

# First-party imports
import time
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, List, Optional

# Project imports
from .keypoints import ImageDims
from .logging_manager import LoggingManager
from .report_receiver import ReportReceiver

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class RunOptions:
    """
    Options shared by all subcommands.
    """

    dims: Optional[ImageDims] = None
    fmt: str = "csv"
    epsilon: float = 0.0
    workers: int = 1
    seed: int = 0
    full_precision: bool = False
    timing: bool = True
    progress: bool = False

    def echo(self) -> Dict[str, Any]:
        """
        The options as plain values, for the report's config section.
        """
        echoed = asdict(self)
        echoed["dims"] = str(self.dims) if self.dims else None
        echoed.pop("progress")
        return echoed


class Command(ABC):
    """
    An abstract base class for command objects.
    """

    exit_code = EXIT_OK

    @abstractmethod
    def execute(self):
        """
        Execute the command.
        """


class ReportCommand(Command):
    """
    A command that writes its results into a run report.
    """

    name = ""

    def __init__(self, options: RunOptions) -> None:
        """
        Initialize the ReportCommand.

        Args:
            options (RunOptions): Shared run options.
        """
        super().__init__()
        self.options = options
        self.receiver: Optional[ReportReceiver] = None
        self.exit_code = EXIT_OK
        self.logger = LoggingManager(__name__).logger

    def set_receiver(self, receiver: ReportReceiver):
        """
        Set the report receiver for the command.

        Args:
            receiver (ReportReceiver): The report receiver.
        """
        self.receiver = receiver

    def begin(self, inputs: List[str], **config: Any) -> ReportReceiver:
        """
        Start the report with the command's inputs and configuration echo.
        """
        assert self.receiver, "No receiver set."
        self.receiver.begin(self.name, inputs, {**self.options.echo(), **config})
        return self.receiver

    def fail(self, message: str, code: int) -> None:
        """
        Record an error and raise the exit code to at least ``code``.
        """
        assert self.receiver, "No receiver set."
        self.logger.error(message)
        self.receiver.add_error(message)
        self.exit_code = max(self.exit_code, code)

    @contextmanager
    def stopwatch(self, label: Optional[str] = None) -> Iterator[Dict[str, float]]:
        """
        Measure wall-clock milliseconds of a block.

        Yields a dict whose ``ms`` key is filled when the block exits. With a
        label, the time is also added to the report's timings.
        """
        elapsed: Dict[str, float] = {"ms": 0.0}
        started = time.perf_counter()
        try:
            yield elapsed
        finally:
            elapsed["ms"] = (time.perf_counter() - started) * 1000.0
            if label and self.receiver and self.options.timing:
                self.receiver.add_timing(label, elapsed["ms"])
