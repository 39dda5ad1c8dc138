#!/usr/bin/env python3.11

"""
Exceptions raised by detcov.

All errors derive from `DetcovError`, itself a `ValueError`, so callers that
only care about bad input can catch `ValueError`.
"""

# First-party imports
from typing import Optional


class DetcovError(ValueError):
    """
    Base class of every error raised on purpose by detcov.
    """


class InsufficientPoints(DetcovError):
    """
    Fewer than two distinct keypoint locations; coverage is undefined.
    """


class UnresolvableLocations(InsufficientPoints):
    """
    Distinct locations lie so close that the reciprocal of their distance
    overflows, so coverage cannot be computed.
    """


class ImageMismatch(DetcovError):
    """
    Keypoint sets passed together do not belong to the same image.
    """


class DatasetMismatch(DetcovError):
    """
    Two evaluation runs do not cover the same images.
    """


class DegenerateCounts(DetcovError):
    """
    No discordant outcomes, so the McNemar statistic is undefined.
    """


class InsufficientData(DetcovError):
    """
    Too few samples for the requested summary.
    """


class DegenerateInput(DetcovError):
    """
    Input series is constant or malformed for a correlation.
    """


class ParseError(DetcovError):
    """
    A keypoint file contains a malformed line.

    Args:
        message (str): Description of the problem.
        line (int, optional): 1-based line number of the offending line.
        source (str, optional): File name or other label of the input.
    """

    def __init__(
        self, message: str, line: Optional[int] = None, source: Optional[str] = None
    ) -> None:
        self.line = line
        self.source = source
        location = ""
        if source:
            location += f"{source}:"
        if line is not None:
            location += f"{line}:"
        super().__init__(f"{location} {message}" if location else message)


class EmptyFile(ParseError):
    """
    The keypoint file has no content at all (as opposed to zero points).
    """


class ManifestError(DetcovError):
    """
    The dataset manifest is malformed.
    """


class KbError(DetcovError):
    """
    The knowledge base is malformed or inconsistent.
    """


class NoCandidates(DetcovError):
    """
    The knowledge base offers no available complementary detector.
    """


class DetectorUnavailable(DetcovError):
    """
    A detector is not registered, or has no keypoints for a requested image.
    """


class UsageError(DetcovError):
    """
    Invalid command-line usage.
    """
