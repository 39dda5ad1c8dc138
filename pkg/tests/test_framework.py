"""
Tests of the detector combination framework on scripted scenarios.

Images are 100x100 pixels, so every image needs a coverage of at least 25.
"""

# First-party imports
import math

# Third-party imports
import pytest

# Project imports
from detcov.dataset import ImagePair
from detcov.detector_registry import DetectorRegistry, KeyPointProvider, StaticProvider
from detcov.errors import DetectorUnavailable, NoCandidates
from detcov.framework import TRACE_COLUMNS, OperatingMode, decide, run_batch, trace_rows
from detcov.keypoints import ImageDims, KeyPointSet
from detcov.knowledge_base import DetectorCategory, KnowledgeBase

IMAGES = ("img1", "img2")
DIMS = {image_id: ImageDims(100, 100) for image_id in ("img1", "img2", "img3")}

SQUARE = [(25, 25), (75, 25), (25, 75), (75, 75)]
WEAK = [(10, 10), (30, 10)]
CLUSTER = [(12, 12), (28, 12)]
CORNERS = [(0, 0), (99, 0), (0, 99), (99, 99)]
NEAR = [(10, 30), (30, 30)]
# WEAK + NEAR is a square of side 20: every point sees 20, 20 and 20*sqrt(2).
NEAR_UNION = 3.0 / (2.0 / 20.0 + 1.0 / (20.0 * math.sqrt(2.0)))


class RefusingProvider(KeyPointProvider):
    """
    Claims keypoints for every image but must never be asked for them.
    """

    def available(self, image_id: str) -> bool:
        return True

    def load(self, image_id: str) -> KeyPointSet:
        raise AssertionError(f"keypoints of {image_id} should not have been loaded")


def _provider(detector, per_image):
    return StaticProvider(
        {image_id: KeyPointSet.from_xy(detector, image_id, xy) for image_id, xy in per_image.items()}
    )


def _registry(**detectors):
    registry = DetectorRegistry()
    for name, per_image in detectors.items():
        if isinstance(per_image, KeyPointProvider):
            registry.add_detector(name, per_image)
        else:
            registry.add_detector(name, _provider(name, per_image))
    return registry


def _same(xy, images=IMAGES):
    return {image_id: xy for image_id in images}


def test_single_detector_mode_never_touches_other_detectors(small_kb):
    registry = _registry(A=_same(SQUARE), E=RefusingProvider(), M=RefusingProvider())
    decision = decide(IMAGES, "A", registry, small_kb, DIMS, pair_id="p1")
    assert decision.mode is OperatingMode.SINGLE
    assert decision.detectors == ("A",)
    assert not decision.fallback
    assert [(s.step, s.image_id, s.detectors) for s in decision.trace] == [
        (0, "img1", ("A",)),
        (0, "img2", ("A",)),
    ]
    assert decision.thresholds == (25.0, 25.0)
    assert decision.final_values[0] == pytest.approx(55.41, abs=0.005)


def test_second_complementary_category_succeeds(small_kb):
    registry = _registry(A=_same(WEAK), E=_same(CLUSTER), M=_same(CORNERS))
    decision = decide(IMAGES, "A", registry, small_kb, DIMS, pair_id="p2")
    assert decision.mode is OperatingMode.MULTI
    assert decision.detectors == ("A", "M")
    assert not decision.fallback
    assert [(s.step, s.image_id, s.detectors) for s in decision.trace] == [
        (0, "img1", ("A",)),
        (0, "img2", ("A",)),
        (1, "img1", ("A", "E")),
        (1, "img2", ("A", "E")),
        (2, "img1", ("A", "M")),
        (2, "img2", ("A", "M")),
    ]
    assert [s.passed for s in decision.trace] == [False, False, False, False, True, True]
    assert decision.trace[0].value == pytest.approx(20.0)
    assert all(v >= 25.0 for v in decision.final_values)


def test_fallback_picks_the_best_worst_image(small_kb):
    registry = _registry(
        A=_same(WEAK),
        E={"img1": CORNERS, "img2": CLUSTER},
        M=_same(NEAR),
    )
    decision = decide(IMAGES, "A", registry, small_kb, DIMS, pair_id="p3")
    assert decision.mode is OperatingMode.MULTI
    assert decision.fallback
    assert decision.detectors == ("A", "M")
    assert decision.final_values == pytest.approx((NEAR_UNION, NEAR_UNION))
    assert NEAR_UNION < 25.0
    assert [s.step for s in decision.trace] == [0, 0, 1, 1, 2, 2]
    assert decision.trace[2].passed and not decision.trace[3].passed


def test_fallback_ties_go_to_the_first_combination(small_kb):
    registry = _registry(A=_same(WEAK), E=_same(NEAR), M=_same(NEAR))
    decision = decide(IMAGES, "A", registry, small_kb, DIMS)
    assert decision.fallback
    assert decision.detectors == ("A", "E")
    assert decision.pair_id == "img1+img2"


def test_too_few_start_keypoints_count_as_failure(small_kb):
    registry = _registry(A={"img1": [(50, 50)]}, E=_same(CORNERS, ("img1",)))
    decision = decide(("img1",), "A", registry, small_kb, DIMS)
    assert math.isnan(decision.trace[0].value)
    assert not decision.trace[0].passed
    assert decision.detectors == ("A", "E") and not decision.fallback


def test_detector_choice_overrides_registry_order():
    kb = KnowledgeBase(
        categories={
            "A": DetectorCategory.SPIRAL,
            "MSER": DetectorCategory.SEGMENTATION,
            "IBR": DetectorCategory.SEGMENTATION,
        },
        preferences={DetectorCategory.SPIRAL: (DetectorCategory.SEGMENTATION,)},
    )
    registry = _registry(A=_same(WEAK), MSER=_same(NEAR), IBR=_same(CORNERS))
    assert decide(IMAGES, "A", registry, kb, DIMS).detectors == ("A", "MSER")
    chosen = decide(IMAGES, "A", registry, kb, DIMS, choices={DetectorCategory.SEGMENTATION: "IBR"})
    assert chosen.detectors == ("A", "IBR") and not chosen.fallback


def test_partially_available_detectors_are_skipped(small_kb):
    registry = _registry(A=_same(WEAK), E={"img1": CORNERS}, M=_same(CORNERS))
    decision = decide(IMAGES, "A", registry, small_kb, DIMS)
    assert decision.detectors == ("A", "M")
    assert {s.step for s in decision.trace} == {0, 1}


def test_no_complementary_detector(small_kb):
    with pytest.raises(NoCandidates):
        decide(IMAGES, "A", _registry(A=_same(WEAK)), small_kb, DIMS)


def test_start_detector_must_cover_every_image(small_kb):
    with pytest.raises(DetectorUnavailable):
        decide(IMAGES, "A", _registry(A={"img1": SQUARE}), small_kb, DIMS)


def test_batch_keeps_pair_order_and_collects_failures(small_kb):
    all_images = ("img1", "img2", "img3")
    registry = _registry(
        A={"img1": SQUARE, "img2": WEAK},
        M=_same(CORNERS, all_images),
    )
    pairs = [
        ImagePair("good", ("img1",)),
        ImagePair("missing", ("img3",)),
        ImagePair("combined", ("img2",)),
    ]
    batch = run_batch(pairs, "A", registry, small_kb, DIMS, workers=3)
    assert [d.pair_id for d in batch.decisions] == ["good", "combined"]
    assert [d.mode for d in batch.decisions] == [OperatingMode.SINGLE, OperatingMode.MULTI]
    assert [pair_id for pair_id, _ in batch.failures] == ["missing"]

    rows = trace_rows(batch.decisions)
    assert all(tuple(row) == TRACE_COLUMNS for row in rows)
    assert [(row["pair_id"], row["step"], row["detectors"], row["mode"]) for row in rows] == [
        ("good", 0, "A", 0),
        ("combined", 0, "A", 1),
        ("combined", 1, "A+M", 1),
    ]
