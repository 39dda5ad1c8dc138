"""
Shared fixtures of the detcov test suite.
"""

# First-party imports
import json
from pathlib import Path
from typing import Callable, Dict, Iterable, Sequence, Tuple

# Third-party imports
import pytest

# Project imports
from detcov.keypoints import ImageDims
from detcov.knowledge_base import DetectorCategory, KnowledgeBase


@pytest.fixture
def dims_100() -> ImageDims:
    return ImageDims(100, 100)


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[..., Path]:
    """
    Write (x, y) pairs as a csv keypoint file under tmp_path.
    """

    def write(name: str, coordinates: Iterable[Tuple[float, float]], header: bool = True) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["x,y"] if header else []
        lines += [f"{x},{y}" for x, y in coordinates]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def make_dataset(tmp_path: Path) -> Callable[..., Path]:
    """
    Write a csv dataset and its manifest; returns the manifest path.

    ``keypoints`` maps detector -> image -> coordinates; an image missing for a
    detector produces no file.
    """

    def make(
        keypoints: Dict[str, Dict[str, Sequence[Tuple[float, float]]]],
        images: Sequence[str],
        dims: Tuple[int, int] = (100, 100),
        pairs: Sequence[Sequence[str]] = (),
    ) -> Path:
        root = tmp_path / "dataset"
        for detector, per_image in keypoints.items():
            directory = root / "keypoints" / detector.lower()
            directory.mkdir(parents=True, exist_ok=True)
            for image_id, coordinates in per_image.items():
                rows = ["x,y"] + [f"{x},{y}" for x, y in coordinates]
                (directory / f"{image_id}.csv").write_text("\n".join(rows) + "\n")
        manifest = {
            "schema": 1,
            "root": "keypoints",
            "dims": {"width": dims[0], "height": dims[1]},
            "images": [{"id": image_id} for image_id in images],
            "detectors": [
                {"name": detector, "directory": detector.lower(), "format": "csv"}
                for detector in keypoints
            ],
            "pairs": [list(pair) for pair in pairs],
        }
        root.mkdir(parents=True, exist_ok=True)
        path = root / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2))
        return path

    return make


@pytest.fixture
def small_kb() -> KnowledgeBase:
    """
    Start detector A (spiral) complemented by E (entropy-based), then M (segmentation).
    """
    return KnowledgeBase(
        categories={
            "A": DetectorCategory.SPIRAL,
            "E": DetectorCategory.ENTROPY,
            "M": DetectorCategory.SEGMENTATION,
        },
        preferences={
            DetectorCategory.SPIRAL: (DetectorCategory.ENTROPY, DetectorCategory.SEGMENTATION),
        },
    )

