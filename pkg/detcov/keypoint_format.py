#!/usr/bin/env python3.11

"""
Keypoint File Formats

This module provides strategies for reading the keypoint files written by
external feature detectors, and for writing the csv format.

Two formats are understood:

csv
    UTF-8 text, LF or CRLF line endings, an optional ``x,y[,scale]`` header and
    one keypoint per line: ``x,y[,scale][,extra...]``. Extra columns are kept as
    opaque attributes.

ellipse
    The region format written by the affine-region detector binaries: a first
    line holding a real (ignored), a second line with the region count M, then
    exactly M lines ``x y a b c`` of whitespace-separated reals. ``a b c`` and
    any further columns are kept as opaque attributes.

Numbers use a dot decimal separator regardless of locale. Parsers keep file
order and never drop data lines: every data line either becomes a keypoint or
raises `ParseError` naming its line number.
"""

# First-party imports
import re
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional, Tuple

# Project imports
from .errors import EmptyFile, ParseError
from .keypoints import KeyPoint, KeyPointSet, Point2D
from .logging_manager import LoggingManager

_REAL = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")
_COUNT = re.compile(r"^\+?\d+$")


def _parse_real(text: str, what: str, line: int, source: Optional[str]) -> float:
    if not _REAL.match(text):
        raise ParseError(f"{what} is not a decimal number: {text!r}", line, source)
    return float(text)


def _decode(data: bytes, source: Optional[str]) -> List[Tuple[int, str]]:
    """
    Decode and split into (line number, stripped text) for non-blank lines.
    """
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as ude:
        raise ParseError(f"Not valid UTF-8: {ude}", None, source) from ude
    if not text.strip():
        raise EmptyFile("File is empty", None, source)
    return [
        (number, line.strip())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]


class KeyPointFormat(ABC):
    """
    Abstract base class for keypoint file formats.

    Subclasses must implement the `parse` method.
    """

    name = ""

    def __init__(self) -> None:
        self.logger = LoggingManager(__name__).logger

    @abstractmethod
    def parse(
        self,
        data: bytes,
        detector: str = "",
        image_id: str = "",
        source: Optional[str] = None,
    ) -> KeyPointSet:
        """
        Parse file content into a keypoint set, in file order.

        Args:
            data (bytes): Raw file content.
            detector (str): Detector name to attach.
            image_id (str): Image identifier to attach.
            source (Optional[str]): Label used in error messages.

        Returns:
            KeyPointSet: The parsed keypoints, not canonicalized.

        Raises:
            EmptyFile: If the content is empty.
            ParseError: If any line is malformed.
        """

    def load(self, path: Path, detector: str, image_id: str) -> KeyPointSet:
        """
        Read and parse a keypoint file.
        """
        path = Path(path)
        self.logger.debug("Parsing %s as %s", path, self.name)
        return self.parse(path.read_bytes(), detector, image_id, source=str(path))


class CsvFormat(KeyPointFormat):
    """
    Comma-separated ``x,y[,scale][,extra...]`` rows with an optional header.
    """

    name = "csv"

    def parse(
        self,
        data: bytes,
        detector: str = "",
        image_id: str = "",
        source: Optional[str] = None,
    ) -> KeyPointSet:
        lines = _decode(data, source)
        has_scale = True
        first_fields = [f.strip().lower() for f in lines[0][1].split(",")]
        if first_fields[:2] == ["x", "y"]:
            has_scale = len(first_fields) < 3 or first_fields[2] == "scale"
            lines = lines[1:]

        points: List[KeyPoint] = []
        for number, line in lines:
            fields = [f.strip() for f in line.split(",")]
            if len(fields) < 2:
                raise ParseError(f"Expected at least x,y but got {line!r}", number, source)
            x = _parse_real(fields[0], "x", number, source)
            y = _parse_real(fields[1], "y", number, source)
            scale = None
            extras = fields[2:]
            if has_scale and extras:
                if extras[0]:
                    scale = _parse_real(extras[0], "scale", number, source)
                extras = extras[1:]
            try:
                points.append(KeyPoint(Point2D(x, y), scale, tuple(extras)))
            except ValueError as ve:
                raise ParseError(str(ve), number, source) from ve
        return KeyPointSet(detector, image_id, tuple(points))

    def serialize(self, keypoint_set: KeyPointSet) -> str:
        """
        Write a keypoint set as csv text.

        Coordinates are written with the shortest representation that reads
        back to the same double. The scale column is written whenever any point
        has a scale or extra fields, so extras never read back as a scale.
        """
        with_scale = any(p.scale is not None or p.attributes for p in keypoint_set.points)
        rows = ["x,y,scale" if with_scale else "x,y"]
        for point in keypoint_set.points:
            fields = [repr(point.x), repr(point.y)]
            if with_scale:
                fields.append("" if point.scale is None else repr(point.scale))
            fields.extend(point.attributes)
            rows.append(",".join(fields))
        return "\n".join(rows) + "\n"


class EllipseFormat(KeyPointFormat):
    """
    Scale-factor line, count line, then ``x y a b c`` rows.
    """

    name = "ellipse"

    def parse(
        self,
        data: bytes,
        detector: str = "",
        image_id: str = "",
        source: Optional[str] = None,
    ) -> KeyPointSet:
        lines = _decode(data, source)
        number, line = lines[0]
        _parse_real(line, "Scale factor", number, source)
        if len(lines) < 2:
            raise ParseError("Missing region count line", number + 1, source)
        number, line = lines[1]
        if not _COUNT.match(line):
            raise ParseError(f"Region count is not an integer: {line!r}", number, source)
        expected = int(line)
        rows = lines[2:]
        if len(rows) < expected:
            last = rows[-1][0] if rows else number
            raise ParseError(
                f"Header announces {expected} regions but only {len(rows)} follow",
                last + 1,
                source,
            )
        if len(rows) > expected:
            raise ParseError(
                f"Unexpected line after the {expected} announced regions",
                rows[expected][0],
                source,
            )

        points: List[KeyPoint] = []
        for number, line in rows:
            fields = line.split()
            if len(fields) < 5:
                raise ParseError(f"Expected 'x y a b c' but got {line!r}", number, source)
            values = [_parse_real(f, "Region value", number, source) for f in fields[:5]]
            try:
                location = Point2D(values[0], values[1])
            except ValueError as ve:
                raise ParseError(str(ve), number, source) from ve
            points.append(KeyPoint(location, None, tuple(fields[2:])))
        return KeyPointSet(detector, image_id, tuple(points))


FORMATS: Dict[str, KeyPointFormat] = {
    CsvFormat.name: CsvFormat(),
    EllipseFormat.name: EllipseFormat(),
}


def get_format(name: str) -> KeyPointFormat:
    """
    Look up a format strategy by name (``csv`` or ``ellipse``).

    Raises:
        ValueError: If the name is unknown.
    """
    try:
        return FORMATS[name]
    except KeyError as ke:
        raise ValueError(
            f"Unknown keypoint format {name!r}; expected one of {sorted(FORMATS)}"
        ) from ke


def parse_keypoints(
    data: bytes, fmt: str, detector: str = "", image_id: str = ""
) -> KeyPointSet:
    """
    Parse keypoint file content in the named format.
    """
    return get_format(fmt).parse(data, detector, image_id)


def serialize_csv(keypoint_set: KeyPointSet) -> str:
    """
    Write a keypoint set in the csv keypoint format.
    """
    csv_format = FORMATS[CsvFormat.name]
    assert isinstance(csv_format, CsvFormat), "csv strategy is misregistered"
    return csv_format.serialize(keypoint_set)
