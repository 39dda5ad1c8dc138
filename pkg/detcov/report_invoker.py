#!/usr/bin/env python3.11

"""
Report Command Invoker (Command Design Pattern)

The `ReportInvoker` class is the invoker of the Command pattern used by the
detcov subcommands. It owns the `ReportReceiver`, hands it to every
`ReportCommand` before executing it, and writes the final report.

Example:
    ```python
    invoker = ReportInvoker()
    exit_code = invoker.execute_command(CoverageCommand([Path("a.csv")], options))
    print(invoker.dump_file(None, "table"), end="")
    ```
"""

# First-party imports
from pathlib import Path
from typing import Optional

# Project imports
from .command import Command, ReportCommand
from .report_receiver import ReportReceiver


class ReportInvoker:
    """
    A class that invokes detcov commands.
    """

    def __init__(self, full_precision: bool = False):
        """
        Initializes a ReportInvoker with a ReportReceiver.
        """
        self.report_receiver = ReportReceiver(full_precision)

    def execute_command(self, command: Command) -> int:
        """
        Executes a given command.

        Args:
            command (Command): The command to execute.

        Returns:
            int: The command's exit code.
        """
        if isinstance(command, ReportCommand):
            command.set_receiver(self.report_receiver)
        command.execute()
        return command.exit_code

    def dump_file(self, output_filename: Optional[Path] = None, fmt: str = "table") -> str:
        """
        Renders the report, writing it to a file when a name is given.

        Args:
            output_filename (Optional[Path]): Destination file, or None.
            fmt (str): ``table``, ``csv`` or ``json``.

        Returns:
            str: The rendered report.
        """
        return self.report_receiver.dump_file(output_filename, fmt)
