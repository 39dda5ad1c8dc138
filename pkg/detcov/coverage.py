#!/usr/bin/env python3.11

"""
Coverage Metrics

Measures of how widely a detector's keypoints are spread over an image.

Coverage is the harmonic mean, over every keypoint taken as reference, of the
harmonic mean distance from that keypoint to all others. It has the dimension
of a length (pixels) and penalizes clustered keypoints strongly while staying
robust to a few far-away outliers. Mutual coverage is the coverage of the union
of several detectors' keypoints on the same image, and measures how well the
detectors complement one another.

The convex-hull area ratio is kept as a baseline: it only looks at the outer
boundary of the keypoints and ignores their density inside it.

Keypoints at exactly the same location (multi-scale detections) add nothing to
the spatial distribution, so every measure first collapses them with
`canonicalize`.

Example:
    ```python
    points = KeyPointSet.from_xy("demo", "img", [(0, 0), (1, 0), (2, 0)])
    coverage(points)  # 1.2
    ```
"""

# First-party imports
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

# Third-party imports
import numpy as np

# Project imports
from .errors import ImageMismatch, InsufficientPoints, UnresolvableLocations
from .keypoints import ImageDims, KeyPoint, KeyPointSet
from .logging_manager import LoggingManager

# Rows of the distance matrix materialized at once; bounds memory to
# BLOCK_ROWS * N doubles.
BLOCK_ROWS = 256

logger = LoggingManager(__name__).logger


@dataclass(frozen=True)
class PairwiseMeans:
    """
    Arithmetic, geometric and harmonic means of all unordered pair distances.
    """

    arithmetic: float
    geometric: float
    harmonic: float


def canonicalize(keypoint_set: KeyPointSet, epsilon: float = 0.0) -> KeyPointSet:
    """
    Keep one keypoint per distinct location; the first occurrence wins.

    Args:
        keypoint_set (KeyPointSet): Keypoints in detection order.
        epsilon (float): Merge radius in pixels. With the default 0 only exact
            coordinate equality merges; otherwise a point within ``epsilon`` of
            an already kept point is dropped.

    Returns:
        KeyPointSet: The surviving keypoints, in their original order.
    """
    if epsilon < 0 or not math.isfinite(epsilon):
        raise ValueError(f"Merge radius must be a finite value >= 0, got {epsilon}")
    kept: List[KeyPoint] = []
    if epsilon == 0:
        seen = set()
        for point in keypoint_set.points:
            key = (point.x, point.y)
            if key in seen:
                continue
            seen.add(key)
            kept.append(point)
    else:
        kept_xy = np.empty((len(keypoint_set), 2), dtype=np.float64)
        for point in keypoint_set.points:
            count = len(kept)
            if count:
                gaps = np.hypot(kept_xy[:count, 0] - point.x, kept_xy[:count, 1] - point.y)
                if gaps.min() <= epsilon:
                    continue
            kept_xy[count] = (point.x, point.y)
            kept.append(point)
    dropped = len(keypoint_set) - len(kept)
    if dropped:
        logger.debug(
            "%s/%s: merged %d duplicate keypoint(s)",
            keypoint_set.detector,
            keypoint_set.image_id,
            dropped,
        )
    return keypoint_set.with_points(kept)


def _sorted_locations(keypoint_set: KeyPointSet, epsilon: float) -> np.ndarray:
    """
    Canonical locations in lexicographic order, so sums do not depend on input order.

    With a merge radius the points are sorted before merging; the greedy merge
    then keeps the same survivors for any input order.
    """
    if epsilon > 0:
        keypoint_set = keypoint_set.with_points(
            sorted(keypoint_set.points, key=lambda p: (p.x, p.y))
        )
    xy = canonicalize(keypoint_set, epsilon).locations()
    if len(xy) < 2:
        raise InsufficientPoints(
            f"{keypoint_set.detector}/{keypoint_set.image_id}: coverage needs at "
            f"least 2 distinct keypoint locations, got {len(xy)}"
        )
    return xy[np.lexsort((xy[:, 1], xy[:, 0]))]


def _reciprocal_row_sums(xy: np.ndarray) -> np.ndarray:
    """
    For every point i, the sum over j != i of 1 / d_ij.
    """
    n = len(xy)
    x, y = xy[:, 0], xy[:, 1]
    sums = np.empty(n, dtype=np.float64)
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        dist = np.hypot(x[start:stop, None] - x[None, :], y[start:stop, None] - y[None, :])
        rows = np.arange(stop - start)
        dist[rows, start + rows] = np.inf
        with np.errstate(over="ignore"):
            sums[start:stop] = np.reciprocal(dist).sum(axis=1)
    if not np.all(np.isfinite(sums)):
        raise UnresolvableLocations(
            "Keypoint locations are too close together for their reciprocal distance "
            "to be represented"
        )
    return sums


def harmonic_distances(keypoint_set: KeyPointSet, epsilon: float = 0.0) -> np.ndarray:
    """
    Harmonic mean distance D_i from each keypoint to all others.

    The values follow the lexicographic (x, y) order of the canonical keypoints.

    Raises:
        InsufficientPoints: If fewer than two distinct locations remain.
    """
    xy = _sorted_locations(keypoint_set, epsilon)
    return (len(xy) - 1) / _reciprocal_row_sums(xy)


def coverage(keypoint_set: KeyPointSet, epsilon: float = 0.0) -> float:
    """
    Coverage of a keypoint set, in pixels.

    Runs in O(N^2) time and O(N) memory; the N x N distance matrix is never
    held in full.

    Args:
        keypoint_set (KeyPointSet): Keypoints of one detector on one image.
        epsilon (float): Duplicate merge radius, see `canonicalize`.

    Returns:
        float: N / sum_i(1 / D_i).

    Raises:
        InsufficientPoints: If fewer than two distinct locations remain.
    """
    distances = harmonic_distances(keypoint_set, epsilon)
    return float(len(distances) / np.sum(np.reciprocal(distances)))


def mutual_coverage(keypoint_sets: Sequence[KeyPointSet], epsilon: float = 0.0) -> float:
    """
    Coverage of the union of several detectors' keypoints on one image.

    Args:
        keypoint_sets (Sequence[KeyPointSet]): One or more sets of the same image.
        epsilon (float): Duplicate merge radius, see `canonicalize`.

    Returns:
        float: The coverage of the combined keypoints.

    Raises:
        ImageMismatch: If the sets belong to different images.
        InsufficientPoints: If the union has fewer than two distinct locations.
    """
    if not keypoint_sets:
        raise InsufficientPoints("Mutual coverage needs at least one keypoint set")
    image_ids = {s.image_id for s in keypoint_sets}
    if len(image_ids) != 1:
        raise ImageMismatch(
            f"Mutual coverage mixes images: {', '.join(sorted(image_ids))}"
        )
    union = KeyPointSet(
        "+".join(s.detector for s in keypoint_sets),
        keypoint_sets[0].image_id,
        tuple(p for s in keypoint_sets for p in s.points),
    )
    return coverage(union, epsilon)


def pairwise_means(keypoint_set: KeyPointSet, epsilon: float = 0.0) -> PairwiseMeans:
    """
    The three classical means of all unordered pair distances.

    The harmonic mean equals `coverage`; it never exceeds the geometric mean,
    which never exceeds the arithmetic mean.

    Raises:
        InsufficientPoints: If fewer than two distinct locations remain.
    """
    xy = _sorted_locations(keypoint_set, epsilon)
    n = len(xy)
    x, y = xy[:, 0], xy[:, 1]
    total = log_total = reciprocal_total = 0.0
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        dist = np.hypot(
            x[start:stop, None] - x[None, start:], y[start:stop, None] - y[None, start:]
        )
        upper = dist[np.triu(np.ones(dist.shape, dtype=bool), k=1)]
        total += float(upper.sum())
        log_total += float(np.log(upper).sum())
        with np.errstate(over="ignore"):
            reciprocal_total += float(np.reciprocal(upper).sum())
    if not math.isfinite(reciprocal_total):
        raise UnresolvableLocations(
            "Keypoint locations are too close together for their reciprocal distance "
            "to be represented"
        )
    pairs = n * (n - 1) / 2
    return PairwiseMeans(
        arithmetic=total / pairs,
        geometric=math.exp(log_total / pairs),
        harmonic=pairs / reciprocal_total,
    )


def _cross(o: Tuple[float, float], a: Tuple[float, float], b: Tuple[float, float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """
    Convex hull by the monotone chain construction.

    Points on a hull edge are not vertices.

    Args:
        points (Sequence[Tuple[float, float]]): Input locations.

    Returns:
        List[Tuple[float, float]]: Hull vertices, counter-clockwise, starting at
        the lowest-x (then lowest-y) point.
    """
    ordered = sorted(set(points))
    if len(ordered) <= 2:
        return ordered
    lower: List[Tuple[float, float]] = []
    for point in ordered:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], point) <= 0:
            lower.pop()
        lower.append(point)
    upper: List[Tuple[float, float]] = []
    for point in reversed(ordered):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], point) <= 0:
            upper.pop()
        upper.append(point)
    return lower[:-1] + upper[:-1]


def polygon_area(vertices: Sequence[Tuple[float, float]]) -> float:
    """
    Shoelace area of a simple polygon.
    """
    if len(vertices) < 3:
        return 0.0
    twice_area = 0.0
    for (x1, y1), (x2, y2) in zip(vertices, list(vertices[1:]) + [vertices[0]]):
        twice_area += x1 * y2 - x2 * y1
    return abs(twice_area) / 2.0


def convex_hull_ratio(keypoint_set: KeyPointSet, dims: ImageDims) -> float:
    """
    Ratio of the keypoints' convex hull area to the image area.

    Degenerate hulls (fewer than three points, or all collinear) give 0.

    Raises:
        InsufficientPoints: If the set is empty.
    """
    if not keypoint_set.points:
        raise InsufficientPoints(
            f"{keypoint_set.detector}/{keypoint_set.image_id}: hull of an empty set"
        )
    hull = convex_hull([(p.x, p.y) for p in keypoint_set.points])
    ratio = polygon_area(hull) / dims.area
    if ratio > 1.0:
        logger.warning(
            "%s/%s: keypoints extend beyond the %s image; hull ratio clipped to 1",
            keypoint_set.detector,
            keypoint_set.image_id,
            dims,
        )
        ratio = 1.0
    return ratio


if __name__ == "__main__":
    demo = KeyPointSet.from_xy("demo", "img", [(25, 25), (75, 25), (25, 75), (75, 75)])
    print(f"coverage = {coverage(demo):.4f}")
    print(f"hull ratio = {convex_hull_ratio(demo, ImageDims(100, 100)):.4f}")
