"""
Tests of the detector registry and its keypoint providers.
"""

# Third-party imports
import pytest

# Project imports
from detcov.dataset import load_manifest, scan_dataset
from detcov.detector_registry import DetectorRegistry, KeyPointProvider, StaticProvider
from detcov.errors import DetectorUnavailable
from detcov.keypoints import KeyPointSet


class CountingProvider(KeyPointProvider):
    def __init__(self, points: KeyPointSet) -> None:
        self.points = points
        self.loads = 0

    def available(self, image_id: str) -> bool:
        return image_id == self.points.image_id

    def load(self, image_id: str) -> KeyPointSet:
        self.loads += 1
        return self.points


def test_registration_order_and_duplicates():
    registry = DetectorRegistry()
    registry.add_detector("B", StaticProvider({}))
    registry.add_detector("A", StaticProvider({}))
    assert registry.names() == ["B", "A"]
    with pytest.raises(ValueError):
        registry.add_detector("A", StaticProvider({}))
    assert registry.get_provider("C") is None


def test_keypoints_are_loaded_once():
    points = KeyPointSet.from_xy("A", "img", [(0, 0), (1, 1)])
    provider = CountingProvider(points)
    registry = DetectorRegistry()
    registry.add_detector("A", provider)
    assert registry.keypoints("A", "img") is points
    assert registry.keypoints("A", "img") is points
    assert provider.loads == 1


def test_unavailable_keypoints():
    registry = DetectorRegistry()
    registry.add_detector("A", StaticProvider({"img": KeyPointSet.from_xy("A", "img", [(0, 0)])}))
    assert registry.is_available("A", "img")
    assert not registry.is_available("A", "other")
    assert not registry.is_available("Z", "img")
    with pytest.raises(DetectorUnavailable):
        registry.keypoints("A", "other")
    with pytest.raises(DetectorUnavailable):
        registry.keypoints("Z", "img")


def test_registry_from_dataset(make_dataset):
    path = make_dataset(
        {"SIFT": {"img1": [(0, 0), (3, 4)]}, "MSER": {"img1": [(1, 1), (5, 5)], "img2": [(2, 2), (4, 4)]}},
        images=["img1", "img2"],
    )
    registry = DetectorRegistry.from_index(scan_dataset(None, load_manifest(path)))
    assert registry.names() == ["SIFT", "MSER"]
    assert not registry.is_available("SIFT", "img2")
    loaded = registry.keypoints("MSER", "img2")
    assert [(p.x, p.y) for p in loaded.points] == [(2.0, 2.0), (4.0, 4.0)]
