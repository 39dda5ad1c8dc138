#!/usr/bin/env python3.11

"""
Detector Combination Framework

Decides, for a group of images (usually an image pair), whether one detector
covers every image well enough or whether a complementary detector has to be
added.

1. The start detector's coverage is computed on every image. If every value
   reaches the image's area-to-perimeter ratio, the framework stays in single
   detector mode (mode 0) and no mutual coverage is ever computed.
2. Otherwise the complementary categories of the start detector's category are
   tried in knowledge-base order. From each category the first registered
   detector with keypoints on every image is chosen, and the mutual coverage
   of the start detector and that detector is computed on every image. The
   first combination where every image passes is accepted (mode 1).
3. If no combination passes, the tried combination whose worst image has the
   highest mutual coverage is used anyway (mode 1, fallback). Ties go to the
   combination tried first.

Every coverage value computed along the way is kept in the decision's trace:
step 0 holds the start detector, step k the k-th combination tried.

At most two detectors are combined. Searching for a third detector when the
best pair still falls short, and updating the knowledge base from observed
results, are not implemented; the knowledge base is static for a run.
"""

# First-party imports
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

# Third-party imports
from tqdm import tqdm

# Project imports
from .coverage import mutual_coverage
from .dataset import ImagePair
from .detector_registry import DetectorRegistry
from .errors import DetcovError, DetectorUnavailable, InsufficientPoints, NoCandidates
from .evaluation import area_perimeter_threshold
from .keypoints import ImageDims
from .knowledge_base import DetectorCategory, KnowledgeBase
from .logging_manager import LoggingManager

TRACE_COLUMNS = (
    "pair_id",
    "image_id",
    "step",
    "detectors",
    "value",
    "threshold",
    "mode",
    "fallback",
)

logger = LoggingManager(__name__).logger


class OperatingMode(IntEnum):
    """
    Single detector (0) or multiple detectors (1).
    """

    SINGLE = 0
    MULTI = 1


@dataclass(frozen=True)
class TraceStep:
    """
    One coverage value computed while deciding.

    ``value`` is NaN when the keypoints had fewer than two distinct locations.
    """

    step: int
    image_id: str
    detectors: Tuple[str, ...]
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return not math.isnan(self.value) and self.value >= self.threshold


@dataclass(frozen=True)
class FrameworkDecision:
    """
    Outcome of the framework on one image group.
    """

    pair_id: str
    image_ids: Tuple[str, ...]
    mode: OperatingMode
    detectors: Tuple[str, ...]
    trace: Tuple[TraceStep, ...]
    thresholds: Tuple[float, ...]
    final_values: Tuple[float, ...]
    fallback: bool = False

    def __post_init__(self) -> None:
        meets = all(
            not math.isnan(v) and v >= t for v, t in zip(self.final_values, self.thresholds)
        )
        if self.mode is OperatingMode.SINGLE:
            assert len(self.detectors) == 1 and meets, "single mode needs one passing detector"
        elif not self.fallback:
            assert meets, "an accepted combination must pass on every image"


@dataclass(frozen=True)
class BatchResult:
    """
    Decisions of a batch, plus the groups that could not be decided.
    """

    decisions: Tuple[FrameworkDecision, ...]
    failures: Tuple[Tuple[str, str], ...]


def _worst(values: Sequence[float]) -> float:
    return min(-math.inf if math.isnan(v) else v for v in values)


def _measure(
    registry: DetectorRegistry,
    detectors: Tuple[str, ...],
    image_ids: Tuple[str, ...],
    epsilon: float,
) -> List[float]:
    values = []
    for image_id in image_ids:
        sets = [registry.keypoints(name, image_id) for name in detectors]
        try:
            values.append(mutual_coverage(sets, epsilon))
        except InsufficientPoints as ip:
            logger.info("%s on %s: %s", "+".join(detectors), image_id, ip)
            values.append(math.nan)
    return values


def _pick_detector(
    category: DetectorCategory,
    start_detector: str,
    registry: DetectorRegistry,
    kb: KnowledgeBase,
    image_ids: Tuple[str, ...],
    choices: Optional[Mapping[DetectorCategory, str]],
) -> Optional[str]:
    """
    The detector used for a category: the override if usable, else the first
    registered detector of the category with keypoints on every image.
    """

    members = set(kb.detectors_in(category))

    def usable(name: str) -> bool:
        return (
            name != start_detector
            and name in members
            and all(registry.is_available(name, image_id) for image_id in image_ids)
        )

    if choices and category in choices:
        chosen = choices[category]
        if usable(chosen):
            return chosen
        logger.warning(
            "Requested %s detector %s is unusable here; using registry order",
            category.value,
            chosen,
        )
    for name in registry.names():
        if usable(name):
            return name
    return None


def decide(
    images: Sequence[str],
    start_detector: str,
    registry: DetectorRegistry,
    kb: KnowledgeBase,
    dims: Mapping[str, ImageDims],
    pair_id: Optional[str] = None,
    choices: Optional[Mapping[DetectorCategory, str]] = None,
    epsilon: float = 0.0,
) -> FrameworkDecision:
    """
    Run the framework on one group of images.

    Args:
        images (Sequence[str]): One or more image ids processed together.
        start_detector (str): Detector tried first.
        registry (DetectorRegistry): Keypoint providers, in tie-break order.
        kb (KnowledgeBase): Categories and complementarity preferences.
        dims (Mapping[str, ImageDims]): Dimensions of every image.
        pair_id (Optional[str]): Label of the group; defaults to the joined ids.
        choices (Optional[Mapping[DetectorCategory, str]]): Detector to use for
            a category instead of the first one in registry order.
        epsilon (float): Duplicate merge radius passed to coverage.

    Returns:
        FrameworkDecision: The chosen mode, detectors and full trace.

    Raises:
        DetectorUnavailable: If the start detector lacks keypoints for an image.
        KbError: If the start detector is not in the knowledge base.
        NoCandidates: If no complementary detector is available at all.
    """
    image_ids = tuple(images)
    if not image_ids:
        raise ValueError("decide needs at least one image")
    label = pair_id or "+".join(image_ids)
    missing_dims = [i for i in image_ids if i not in dims]
    if missing_dims:
        raise DetectorUnavailable(f"{label}: no dimensions for images {missing_dims}")
    missing = [i for i in image_ids if not registry.is_available(start_detector, i)]
    if missing:
        raise DetectorUnavailable(f"{label}: start detector {start_detector!r} lacks images {missing}")
    thresholds = tuple(area_perimeter_threshold(dims[i]) for i in image_ids)

    trace: List[TraceStep] = []

    def record(step: int, detectors: Tuple[str, ...], values: Sequence[float]) -> None:
        for image_id, value, threshold in zip(image_ids, values, thresholds):
            trace.append(TraceStep(step, image_id, detectors, value, threshold))

    def meets(values: Sequence[float]) -> bool:
        return all(not math.isnan(v) and v >= t for v, t in zip(values, thresholds))

    start = (start_detector,)
    start_values = _measure(registry, start, image_ids, epsilon)
    record(0, start, start_values)
    if meets(start_values):
        logger.debug("%s: single detector mode with %s", label, start_detector)
        return FrameworkDecision(
            label, image_ids, OperatingMode.SINGLE, start, tuple(trace), thresholds,
            tuple(start_values),
        )

    category = kb.category_of(start_detector)
    tried: List[Tuple[Tuple[str, ...], List[float]]] = []
    for complement in kb.complements(category):
        partner = _pick_detector(complement, start_detector, registry, kb, image_ids, choices)
        if partner is None:
            logger.debug("%s: no available %s detector", label, complement.value)
            continue
        combination = (start_detector, partner)
        values = _measure(registry, combination, image_ids, epsilon)
        tried.append((combination, values))
        record(len(tried), combination, values)
        if meets(values):
            logger.debug("%s: multi detector mode with %s", label, "+".join(combination))
            return FrameworkDecision(
                label, image_ids, OperatingMode.MULTI, combination, tuple(trace), thresholds,
                tuple(values),
            )

    if not tried:
        raise NoCandidates(
            f"{label}: no available detector complements {start_detector!r} ({category.value})"
        )
    best_combination, best_values = tried[0]
    for combination, values in tried[1:]:
        if _worst(values) > _worst(best_values):
            best_combination, best_values = combination, values
    logger.info(
        "%s: no combination reaches the threshold; falling back to %s",
        label,
        "+".join(best_combination),
    )
    return FrameworkDecision(
        label, image_ids, OperatingMode.MULTI, best_combination, tuple(trace), thresholds,
        tuple(best_values), fallback=True,
    )


def run_batch(
    pairs: Sequence[ImagePair],
    start_detector: str,
    registry: DetectorRegistry,
    kb: KnowledgeBase,
    dims: Mapping[str, ImageDims],
    workers: int = 1,
    choices: Optional[Mapping[DetectorCategory, str]] = None,
    epsilon: float = 0.0,
    progress: bool = False,
) -> BatchResult:
    """
    Run the framework on every image group; failures do not stop the batch.

    Decisions keep the order of ``pairs`` whatever the number of workers.
    """

    def one(pair: ImagePair) -> Tuple[Optional[FrameworkDecision], Optional[str]]:
        try:
            return (
                decide(pair.image_ids, start_detector, registry, kb, dims, pair.pair_id,
                       choices, epsilon),
                None,
            )
        except (DetcovError, OSError) as err:
            logger.error("%s: %s", pair.pair_id, err)
            return None, str(err)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        outcomes = list(
            tqdm(
                executor.map(one, pairs),
                total=len(pairs),
                desc="framework",
                unit="pair",
                disable=not progress,
            )
        )

    decisions: List[FrameworkDecision] = []
    failures: List[Tuple[str, str]] = []
    for pair, (decision, error) in zip(pairs, outcomes):
        if decision is not None:
            decisions.append(decision)
        else:
            failures.append((pair.pair_id, error or "unknown error"))
    return BatchResult(tuple(decisions), tuple(failures))


def trace_rows(decisions: Sequence[FrameworkDecision]) -> List[Dict[str, object]]:
    """
    Flatten decisions into trace rows with the `TRACE_COLUMNS` keys.
    """
    rows: List[Dict[str, object]] = []
    for decision in decisions:
        for step in decision.trace:
            rows.append(
                {
                    "pair_id": decision.pair_id,
                    "image_id": step.image_id,
                    "step": step.step,
                    "detectors": "+".join(step.detectors),
                    "value": step.value,
                    "threshold": step.threshold,
                    "mode": int(decision.mode),
                    "fallback": int(decision.fallback),
                }
            )
    return rows
