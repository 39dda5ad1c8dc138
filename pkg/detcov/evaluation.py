#!/usr/bin/env python3.11

"""
Detector Statistics

Pass/fail assessment of coverage values and the statistics used to compare
detectors over an image collection.

A detector succeeds on an image when its coverage reaches the image's
area-to-perimeter ratio. Two detectors evaluated on the same images are compared
case by case with McNemar's test; only the images where exactly one of them
succeeds carry information. The reported Z uses the continuity correction and
is clamped at zero. Its sign tells which detector did better: positive means
the left-hand detector succeeded more often.

Z values of about 3 correspond to a confidence of about 0.995; the statistic is
only considered reliable once at least 30 discordant images are available.
No p-values are computed.
"""

# First-party imports
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

# Third-party imports
import numpy as np
from scipy import stats

# Project imports
from .errors import (
    DatasetMismatch,
    DegenerateCounts,
    DegenerateInput,
    InsufficientData,
)
from .keypoints import ImageDims

RELIABLE_DISCORDANT = 30


def area_perimeter_threshold(dims: ImageDims) -> float:
    """
    Coverage an image must reach to count as adequately covered.

    Args:
        dims (ImageDims): Image size.

    Returns:
        float: (width * height) / (2 * (width + height)), in pixels.
    """
    return dims.area / dims.perimeter


def evaluate_criterion(coverage_value: float, dims: ImageDims) -> bool:
    """
    Whether a coverage value passes the area-to-perimeter criterion.

    Equality passes.
    """
    return coverage_value >= area_perimeter_threshold(dims)


@dataclass(frozen=True)
class EvaluationRecord:
    """
    Outcome of one detector on one image.
    """

    image_id: str
    detector: str
    coverage: float
    threshold: float
    passed: bool

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError(f"Threshold must be positive, got {self.threshold}")
        if self.passed != (self.coverage >= self.threshold):
            raise ValueError(
                f"{self.detector}/{self.image_id}: passed={self.passed} contradicts "
                f"coverage {self.coverage} vs threshold {self.threshold}"
            )

    @classmethod
    def assess(
        cls, image_id: str, detector: str, coverage_value: float, dims: ImageDims
    ) -> "EvaluationRecord":
        """
        Build the record of a coverage value against the image's threshold.
        """
        threshold = area_perimeter_threshold(dims)
        return cls(image_id, detector, coverage_value, threshold, coverage_value >= threshold)


@dataclass(frozen=True)
class McNemarCounts:
    """
    Paired success/failure counts, left-hand detector first.
    """

    n_ss: int
    n_sf: int
    n_fs: int
    n_ff: int

    def __post_init__(self) -> None:
        for name in ("n_ss", "n_sf", "n_fs", "n_ff"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {value}")

    @property
    def total(self) -> int:
        return self.n_ss + self.n_sf + self.n_fs + self.n_ff

    @property
    def discordant(self) -> int:
        return self.n_sf + self.n_fs


@dataclass(frozen=True)
class McNemarResult:
    """
    McNemar Z, its signed form, and whether enough discordant cases were seen.
    """

    z: float
    signed_z: float
    reliable: bool


def build_mcnemar_counts(
    left: Sequence[EvaluationRecord], right: Sequence[EvaluationRecord]
) -> McNemarCounts:
    """
    Pair two detectors' records by image and count the four outcomes.

    Raises:
        DatasetMismatch: If the records do not cover the same images, or an
            image appears twice for one detector.
    """
    left_by_image = _index_by_image(left, "left")
    right_by_image = _index_by_image(right, "right")
    if left_by_image.keys() != right_by_image.keys():
        only_left = sorted(left_by_image.keys() - right_by_image.keys())
        only_right = sorted(right_by_image.keys() - left_by_image.keys())
        raise DatasetMismatch(
            f"Records cover different images (left only: {only_left[:5]}, "
            f"right only: {only_right[:5]})"
        )
    cells = {(True, True): 0, (True, False): 0, (False, True): 0, (False, False): 0}
    for image_id, record in left_by_image.items():
        cells[(record.passed, right_by_image[image_id].passed)] += 1
    return McNemarCounts(
        n_ss=cells[(True, True)],
        n_sf=cells[(True, False)],
        n_fs=cells[(False, True)],
        n_ff=cells[(False, False)],
    )


def _index_by_image(
    records: Sequence[EvaluationRecord], side: str
) -> Dict[str, EvaluationRecord]:
    indexed: Dict[str, EvaluationRecord] = {}
    for record in records:
        if record.image_id in indexed:
            raise DatasetMismatch(f"Image {record.image_id!r} appears twice on the {side}")
        indexed[record.image_id] = record
    return indexed


def mcnemar(counts: McNemarCounts) -> McNemarResult:
    """
    McNemar's test with continuity correction.

    Z = (|n_sf - n_fs| - 1) / sqrt(n_sf + n_fs), clamped at 0.

    Raises:
        DegenerateCounts: If there are no discordant images.
    """
    discordant = counts.discordant
    if discordant == 0:
        raise DegenerateCounts("McNemar's test needs at least one discordant image")
    difference = counts.n_sf - counts.n_fs
    z = max(0.0, (abs(difference) - 1) / math.sqrt(discordant))
    signed_z = math.copysign(z, difference) if z > 0 else 0.0
    return McNemarResult(z=z, signed_z=signed_z, reliable=discordant >= RELIABLE_DISCORDANT)


def mcnemar_matrix(
    records_by_detector: Mapping[str, Sequence[EvaluationRecord]],
) -> Dict[Tuple[str, str], Tuple[McNemarCounts, Optional[McNemarResult]]]:
    """
    Compare every pair of detectors, upper triangle in the given order.

    Each pair is compared on the images both detectors have records for.
    Pairs without discordant images map to ``(counts, None)``.
    """
    detectors = list(records_by_detector)
    matrix: Dict[Tuple[str, str], Tuple[McNemarCounts, Optional[McNemarResult]]] = {}
    for i, left in enumerate(detectors):
        for right in detectors[i + 1 :]:
            left_records = records_by_detector[left]
            right_records = records_by_detector[right]
            common = {r.image_id for r in left_records} & {r.image_id for r in right_records}
            counts = build_mcnemar_counts(
                [r for r in left_records if r.image_id in common],
                [r for r in right_records if r.image_id in common],
            )
            result = mcnemar(counts) if counts.discordant else None
            matrix[(left, right)] = (counts, result)
    return matrix


def mean_ci(values: Sequence[float], level: float = 0.95) -> Tuple[float, float, float]:
    """
    Mean with a normal-approximation confidence interval.

    At the default level the half-width is 1.96 * s / sqrt(n), with s the
    sample standard deviation.

    Returns:
        Tuple[float, float, float]: (mean, low, high).

    Raises:
        InsufficientData: If fewer than two values are given.
    """
    if not 0 < level < 1:
        raise ValueError(f"Confidence level must lie in (0, 1), got {level}")
    data = np.asarray(values, dtype=np.float64)
    if data.size < 2:
        raise InsufficientData(f"A confidence interval needs 2 or more values, got {data.size}")
    mean = float(data.mean())
    quantile = float(stats.norm.ppf(0.5 + level / 2))
    half_width = quantile * float(data.std(ddof=1)) / math.sqrt(data.size)
    return mean, mean - half_width, mean + half_width


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Sample Pearson correlation coefficient.

    Raises:
        DegenerateInput: If lengths differ, fewer than two pairs are given,
            or either series is constant.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInput(f"Series must be 1-D and of equal length: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DegenerateInput("Correlation needs at least two pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        raise DegenerateInput("Correlation is undefined for a constant series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def records_by_detector(
    records: Sequence[EvaluationRecord], detectors: Sequence[str]
) -> Dict[str, List[EvaluationRecord]]:
    """
    Group records per detector, in the given detector order.
    """
    grouped: Dict[str, List[EvaluationRecord]] = {name: [] for name in detectors}
    for record in records:
        grouped.setdefault(record.detector, []).append(record)
    return grouped
