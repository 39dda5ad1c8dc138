#!/usr/bin/env python3.11

"""
ReportReceiver

The ReportReceiver class receives the results of a command (named tables,
timings and errors) and writes the final run report in one of three forms:

table
    Human-readable text rendered from the ``report.template`` Mako template.
csv
    Machine-readable tables; a single table is written as plain csv, several
    tables are separated by ``# <name>`` lines.
json
    A versioned document (``schema_version``) holding every table.

Floats are written with 4 decimals unless full precision is requested, in
which case the shortest round-trip representation is used. Undefined values
(NaN) are written as ``nan``, or ``null`` in JSON.

Note:
    This module relies on the external library Mako, which needs to be
    installed to render the human-readable report.
"""

# First-party imports
import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

# Third-party imports
from mako.template import Template

# Project imports
from . import __version__
from .logging_manager import LoggingManager

REPORT_SCHEMA_VERSION = 1
REPORT_FORMATS = ("table", "csv", "json")
TEMPLATE_RESOURCE = "report.template"


@dataclass
class ReportTable:
    """
    A named table of a run report.
    """

    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)


@dataclass
class RunReport:
    """
    Everything a command produced.
    """

    command: str = ""
    inputs: List[str] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, ReportTable] = field(default_factory=dict)
    timings_ms: Dict[str, float] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    version: str = __version__


class ReportReceiver:
    """
    Class for receiving command results and dumping the run report.
    """

    def __init__(self, full_precision: bool = False) -> None:
        """
        Initializes a new ReportReceiver.

        Attributes:
            report (RunReport): The report being assembled.
            full_precision (bool): Write floats without rounding.
            logger (Logger): The logger for this class.
        """
        self.report = RunReport()
        self.full_precision = full_precision
        self.logger = LoggingManager(__name__).logger

    def begin(self, command: str, inputs: Sequence[str], config: Dict[str, Any]) -> None:
        """
        Record which command runs, on what, and with which configuration.
        """
        self.report.command = command
        self.report.inputs = [str(i) for i in inputs]
        self.report.config = dict(config)
        if "full_precision" in config:
            self.full_precision = bool(config["full_precision"])

    def add_table(self, name: str, columns: Sequence[str]) -> ReportTable:
        """
        Create an empty table; an existing table of that name is replaced.
        """
        table = ReportTable(name, list(columns))
        self.report.tables[name] = table
        return table

    def add_row(self, name: str, row: Sequence[Any]) -> None:
        """
        Append a row to a table.
        """
        table = self.report.tables[name]
        assert len(row) == len(table.columns), (
            f"Row of {len(row)} values for the {len(table.columns)} columns of {name}"
        )
        table.rows.append(list(row))

    def add_timing(self, label: str, milliseconds: float) -> None:
        self.report.timings_ms[label] = milliseconds

    def add_error(self, message: str) -> None:
        self.report.errors.append(message)

    def format_value(self, value: Any) -> str:
        """
        Text form of a cell value.
        """
        if value is None:
            return "-"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            if math.isnan(value):
                return "nan"
            return repr(value) if self.full_precision else f"{value:.4f}"
        return str(value)

    def _json_value(self, value: Any) -> Any:
        if isinstance(value, float):
            if not math.isfinite(value):
                return None
            return value if self.full_precision else round(value, 4)
        return value

    def format_table(self, table: ReportTable) -> List[str]:
        """
        Align a table into text lines, numbers right-aligned.
        """
        cells = [[self.format_value(v) for v in row] for row in table.rows]
        widths = [
            max([len(column)] + [len(row[i]) for row in cells])
            for i, column in enumerate(table.columns)
        ]
        numeric = [
            bool(table.rows) and all(
                isinstance(row[i], (int, float)) and not isinstance(row[i], bool)
                for row in table.rows
            )
            for i in range(len(table.columns))
        ]

        def line(values: Sequence[str]) -> str:
            return "  ".join(
                v.rjust(w) if is_number else v.ljust(w)
                for v, w, is_number in zip(values, widths, numeric)
            ).rstrip()

        lines = [line(table.columns), line(["-" * w for w in widths])]
        lines.extend(line(row) for row in cells)
        if not table.rows:
            lines.append("(empty)")
        return lines

    def render_table(self) -> str:
        template = Template(
            text=files("detcov").joinpath(TEMPLATE_RESOURCE).read_text(encoding="utf-8")
        )
        return template.render(
            report=self.report,
            format_table=self.format_table,
            fmt=self.format_value,
        )

    def render_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        several = len(self.report.tables) > 1
        for position, table in enumerate(self.report.tables.values()):
            if several:
                if position:
                    buffer.write("\n")
                buffer.write(f"# {table.name}\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([self.format_value(v) for v in row])
        return buffer.getvalue()

    def render_json(self) -> str:
        document = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "tool": "detcov",
            "version": self.report.version,
            "command": self.report.command,
            "inputs": self.report.inputs,
            "config": self.report.config,
            "tables": {
                name: {
                    "columns": table.columns,
                    "rows": [[self._json_value(v) for v in row] for row in table.rows],
                }
                for name, table in self.report.tables.items()
            },
            "timings_ms": {k: self._json_value(v) for k, v in self.report.timings_ms.items()},
            "errors": self.report.errors,
        }
        return json.dumps(document, indent=2) + "\n"

    def render(self, fmt: str = "table") -> str:
        """
        The report as text in one of `REPORT_FORMATS`.
        """
        if fmt == "json":
            return self.render_json()
        if fmt == "csv":
            return self.render_csv()
        if fmt == "table":
            return self.render_table()
        raise ValueError(f"Unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")

    def dump_file(self, output_filename: Optional[Path], fmt: str = "table") -> str:
        """
        Write the report to a file, or return it for stdout when no file is given.

        Args:
            output_filename (Optional[Path]): Destination, or None.
            fmt (str): One of `REPORT_FORMATS`.

        Returns:
            str: The rendered report.
        """
        rendered = self.render(fmt)
        if output_filename is not None:
            Path(output_filename).write_text(rendered, encoding="utf-8")
            self.logger.info("Report written to %s", output_filename)
        return rendered
