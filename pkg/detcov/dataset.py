#!/usr/bin/env python3.11

"""
Dataset Manifest and Index

A dataset is described by a JSON manifest. It names the images with their
pixel dimensions (needed for the area-to-perimeter criterion), the detectors
whose keypoint files are available and, optionally, the image pairs to process
together.

Manifest schema (version 1):

    {
        "schema": 1,
        "root": "keypoints",                      # optional, relative to the manifest
        "dims": {"width": 1080, "height": 717},   # optional default for all images
        "images": [
            {"id": "pair01_a"},                   # uses the default dims
            {"id": "odd", "width": 640, "height": 480}
        ],
        "detectors": [
            {"name": "IBR", "directory": "ibr", "format": "ellipse"},
            {"name": "SFOP", "directory": "sfop", "format": "csv",
             "pattern": "{image}.sfop.csv"}
        ],
        "pairs": [
            {"id": "pair01", "images": ["pair01_a", "pair01_b"]},
            ["pair02_a", "pair02_b"]
        ]
    }

Keypoint files live at ``<root>/<directory>/<pattern>`` where ``pattern``
defaults to ``{image}.csv`` for csv and ``{image}.txt`` for ellipse files.
Missing files are reported as absences, never as errors. Image pixel data is
never opened.
"""

# First-party imports
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

# Project imports
from .errors import DetectorUnavailable, ManifestError
from .keypoint_format import FORMATS, get_format
from .keypoints import ImageDims, KeyPointSet
from .logging_manager import LoggingManager

MANIFEST_SCHEMA = 1
DEFAULT_PATTERNS = {"csv": "{image}.csv", "ellipse": "{image}.txt"}

logger = LoggingManager(__name__).logger


@dataclass(frozen=True)
class DetectorSource:
    """
    Where one detector's keypoint files are found.
    """

    name: str
    directory: str
    format: str
    pattern: str


@dataclass(frozen=True)
class ImagePair:
    """
    A group of images processed together (usually two).
    """

    pair_id: str
    image_ids: Tuple[str, ...]


@dataclass(frozen=True)
class Manifest:
    """
    Validated content of a dataset manifest.
    """

    root: Path
    images: Dict[str, ImageDims]
    detectors: Tuple[DetectorSource, ...]
    pairs: Tuple[ImagePair, ...] = ()

    def groups(self) -> Tuple[ImagePair, ...]:
        """
        The declared pairs, or one single-image group per image.
        """
        if self.pairs:
            return self.pairs
        return tuple(ImagePair(image_id, (image_id,)) for image_id in self.images)


@dataclass(frozen=True)
class DatasetEntry:
    """
    One available keypoint file.
    """

    image_id: str
    detector: str
    path: Path
    format: str
    dims: ImageDims


@dataclass(frozen=True)
class Absence:
    """
    A keypoint file declared by the manifest but not found on disk.
    """

    image_id: str
    detector: str
    path: Path


@dataclass(frozen=True)
class DatasetIndex:
    """
    All (image, detector) keypoint files of a dataset.
    """

    root: Path
    entries: Tuple[DatasetEntry, ...]
    absences: Tuple[Absence, ...] = ()
    detectors: Tuple[str, ...] = ()
    images: Dict[str, ImageDims] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lookup: Dict[Tuple[str, str], DatasetEntry] = {}
        for entry in self.entries:
            key = (entry.image_id, entry.detector)
            assert key not in lookup, f"Duplicate index entry {key}"
            lookup[key] = entry
        object.__setattr__(self, "_lookup", lookup)

    def entry(self, image_id: str, detector: str) -> Optional[DatasetEntry]:
        """
        The entry of one detector on one image, or None if absent.
        """
        return self._lookup.get((image_id, detector))  # type: ignore[attr-defined]

    def load(self, image_id: str, detector: str) -> KeyPointSet:
        """
        Parse the keypoint file of one detector on one image.

        Raises:
            DetectorUnavailable: If the file is absent from the index.
        """
        found = self.entry(image_id, detector)
        if found is None:
            raise DetectorUnavailable(f"No keypoints of {detector!r} for image {image_id!r}")
        return get_format(found.format).load(found.path, detector, image_id)


def _reject_duplicate_keys(pairs: Sequence[Tuple[str, Any]]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for key, value in pairs:
        if key in result:
            raise ManifestError(f"Duplicate key {key!r}")
        result[key] = value
    return result


def _dims_from(raw: Mapping[str, Any], where: str) -> ImageDims:
    try:
        width, height = raw["width"], raw["height"]
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (width, height)):
            raise ValueError("width and height must be integers")
        return ImageDims(width, height)
    except (KeyError, TypeError, ValueError) as err:
        raise ManifestError(f"{where}: invalid dims ({err})") from err


def parse_manifest(data: bytes, base_dir: Path = Path(".")) -> Manifest:
    """
    Validate manifest content.

    Args:
        data (bytes): JSON document.
        base_dir (Path): Directory relative roots are resolved against.

    Raises:
        ManifestError: On any malformed or missing field.
    """
    try:
        raw = json.loads(data.decode("utf-8"), object_pairs_hook=_reject_duplicate_keys)
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise ManifestError(f"Manifest is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ManifestError("Manifest must be a JSON object")
    schema = raw.get("schema", MANIFEST_SCHEMA)
    if schema != MANIFEST_SCHEMA:
        raise ManifestError(f"Unsupported manifest schema {schema!r}")

    default_dims = _dims_from(raw["dims"], "dims") if "dims" in raw else None

    raw_images = raw.get("images")
    if not isinstance(raw_images, list) or not raw_images:
        raise ManifestError("Manifest needs a non-empty 'images' list")
    images: Dict[str, ImageDims] = {}
    for position, item in enumerate(raw_images):
        if isinstance(item, str):
            item = {"id": item}
        if not isinstance(item, dict) or not isinstance(item.get("id"), str):
            raise ManifestError(f"images[{position}] needs a string 'id'")
        image_id = item["id"]
        if image_id in images:
            raise ManifestError(f"Image {image_id!r} is listed twice")
        if "width" in item or "height" in item:
            images[image_id] = _dims_from(item, f"images[{position}]")
        elif default_dims is not None:
            images[image_id] = default_dims
        else:
            raise ManifestError(f"Image {image_id!r} has no dims and no global 'dims' is given")

    raw_detectors = raw.get("detectors")
    if not isinstance(raw_detectors, list) or not raw_detectors:
        raise ManifestError("Manifest needs a non-empty 'detectors' list")
    detectors: List[DetectorSource] = []
    for position, item in enumerate(raw_detectors):
        if not isinstance(item, dict) or not isinstance(item.get("name"), str):
            raise ManifestError(f"detectors[{position}] needs a string 'name'")
        fmt = item.get("format", "csv")
        if fmt not in FORMATS:
            raise ManifestError(f"detectors[{position}]: unknown format {fmt!r}")
        if any(d.name == item["name"] for d in detectors):
            raise ManifestError(f"Detector {item['name']!r} is listed twice")
        detectors.append(
            DetectorSource(
                name=item["name"],
                directory=str(item.get("directory", item["name"])),
                format=fmt,
                pattern=str(item.get("pattern", DEFAULT_PATTERNS[fmt])),
            )
        )

    pairs: List[ImagePair] = []
    for position, item in enumerate(raw.get("pairs", [])):
        if isinstance(item, list):
            item = {"id": f"pair{position + 1:02d}", "images": item}
        if not isinstance(item, dict) or not isinstance(item.get("images"), list):
            raise ManifestError(f"pairs[{position}] needs an 'images' list")
        members = tuple(item["images"])
        unknown = [m for m in members if m not in images]
        if not members or unknown:
            raise ManifestError(f"pairs[{position}] references unknown images {unknown}")
        pairs.append(ImagePair(str(item.get("id", f"pair{position + 1:02d}")), members))

    root = Path(raw.get("root", "."))
    if not root.is_absolute():
        root = base_dir / root
    return Manifest(root=root, images=images, detectors=tuple(detectors), pairs=tuple(pairs))


def load_manifest(path: Path) -> Manifest:
    """
    Read and validate a manifest file; relative roots resolve against its directory.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as ose:
        raise ManifestError(f"Cannot read manifest {path}: {ose}") from ose
    return parse_manifest(data, path.parent)


def scan_dataset(root: Optional[Path], manifest: Manifest) -> DatasetIndex:
    """
    Locate every (image, detector) keypoint file declared by the manifest.

    Args:
        root (Optional[Path]): Dataset root; None uses the manifest's root.
        manifest (Manifest): Validated manifest.

    Returns:
        DatasetIndex: Present files as entries, missing ones as absences.
    """
    base = Path(root) if root is not None else manifest.root
    entries: List[DatasetEntry] = []
    absences: List[Absence] = []
    for image_id, dims in manifest.images.items():
        for source in manifest.detectors:
            path = base / source.directory / source.pattern.format(image=image_id)
            if path.is_file():
                entries.append(DatasetEntry(image_id, source.name, path, source.format, dims))
            else:
                logger.info("Missing keypoints of %s for %s: %s", source.name, image_id, path)
                absences.append(Absence(image_id, source.name, path))
    if absences:
        logger.warning("%d declared keypoint file(s) are missing", len(absences))
    return DatasetIndex(
        root=base,
        entries=tuple(entries),
        absences=tuple(absences),
        detectors=tuple(d.name for d in manifest.detectors),
        images=dict(manifest.images),
    )
