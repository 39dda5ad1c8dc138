#!/usr/bin/env python3.11

"""
Detector Knowledge Base

Which detector belongs to which category, and which categories complement
each other. The combination framework consults it when a single detector does
not cover an image well enough.

The knowledge base is a JSON document:

    {
        "schema": 1,
        "categories": ["laplacian-based", ...],
        "detectors": {"segmentation-based": ["MSER", "IBR"], ...},
        "preferences": {"segmentation-based": ["spiral", "entropy-based", ...], ...},
        "triplets": {"all": [["entropy-based", "spiral", "segmentation-based"], ...]}
    }

``preferences`` lists, per category, the complementary categories to try, best
first. ``triplets`` holds ranked category triplets; they are informative only.
The default file shipped with the package (``kb_default.json``) groups eleven
well-known detectors into seven categories.
"""

# First-party imports
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib.resources import files
from typing import Any, Dict, List, Sequence, Tuple

# Project imports
from .errors import KbError
from .logging_manager import LoggingManager

KB_SCHEMA = 1
DEFAULT_KB_RESOURCE = "kb_default.json"

logger = LoggingManager(__name__).logger


class DetectorCategory(Enum):
    """
    Detector families grouped by how their keypoints combine with others.
    """

    LAPLACIAN = "laplacian-based"
    HESSIAN_MATRIX = "hessian-matrix-based"
    HYBRID = "hybrid"
    CORNER = "corner"
    SPIRAL = "spiral"
    ENTROPY = "entropy-based"
    SEGMENTATION = "segmentation-based"

    @classmethod
    def from_name(cls, name: Any) -> "DetectorCategory":
        """
        Look up a category by its knowledge-base name.

        Raises:
            KbError: If the name is not one of the seven categories.
        """
        try:
            return cls(name)
        except ValueError as ve:
            raise KbError(f"Unknown detector category {name!r}") from ve


@dataclass(frozen=True)
class KnowledgeBase:
    """
    Detector taxonomy plus ordered complementarity preferences.
    """

    categories: Dict[str, DetectorCategory]
    preferences: Dict[DetectorCategory, Tuple[DetectorCategory, ...]]
    triplets: Dict[str, Tuple[Tuple[DetectorCategory, ...], ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for category, preferred in self.preferences.items():
            if category in preferred:
                raise KbError(f"Category {category.value!r} lists itself as complementary")
            if len(set(preferred)) != len(preferred):
                raise KbError(f"Preferences of {category.value!r} contain duplicates")

    def category_of(self, detector: str) -> DetectorCategory:
        """
        Category of a detector.

        Raises:
            KbError: If the detector is not in the knowledge base.
        """
        try:
            return self.categories[detector]
        except KeyError as ke:
            raise KbError(f"Detector {detector!r} is not in the knowledge base") from ke

    def complements(self, category: DetectorCategory) -> Tuple[DetectorCategory, ...]:
        """
        Complementary categories to try with ``category``, best first.
        """
        return self.preferences.get(category, ())

    def detectors_in(self, category: DetectorCategory) -> List[str]:
        """
        Detectors of a category, in knowledge-base order.
        """
        return [name for name, cat in self.categories.items() if cat is category]

    def used_categories(self) -> List[DetectorCategory]:
        """
        Categories with at least one detector.
        """
        return [c for c in DetectorCategory if c in self.categories.values()]


def _reject_duplicate_keys(pairs: Sequence[Tuple[str, Any]]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for key, value in pairs:
        if key in result:
            raise KbError(f"Duplicate key {key!r} in knowledge base")
        result[key] = value
    return result


def _category_list(raw: Any, where: str) -> Tuple[DetectorCategory, ...]:
    if not isinstance(raw, list):
        raise KbError(f"{where} must be a list of category names")
    return tuple(DetectorCategory.from_name(name) for name in raw)


def load_knowledge_base(data: bytes) -> KnowledgeBase:
    """
    Parse and validate a knowledge base document.

    Args:
        data (bytes): JSON content.

    Returns:
        KnowledgeBase: The validated knowledge base.

    Raises:
        KbError: On unknown categories, self-referential or duplicate
            preferences, or a detector listed more than once.
    """
    try:
        raw = json.loads(data.decode("utf-8"), object_pairs_hook=_reject_duplicate_keys)
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise KbError(f"Knowledge base is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise KbError("Knowledge base must be a JSON object")
    if raw.get("schema", KB_SCHEMA) != KB_SCHEMA:
        raise KbError(f"Unsupported knowledge base schema {raw.get('schema')!r}")

    declared = _category_list(raw.get("categories", [c.value for c in DetectorCategory]), "categories")
    if len(set(declared)) != len(declared):
        raise KbError("categories contains duplicates")

    raw_detectors = raw.get("detectors")
    if not isinstance(raw_detectors, dict):
        raise KbError("detectors must map category names to detector lists")
    categories: Dict[str, DetectorCategory] = {}
    for category_name, names in raw_detectors.items():
        category = DetectorCategory.from_name(category_name)
        if category not in declared:
            raise KbError(f"detectors uses undeclared category {category_name!r}")
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise KbError(f"detectors[{category_name!r}] must be a list of names")
        for name in names:
            if name in categories:
                raise KbError(
                    f"Detector {name!r} is listed under both {categories[name].value!r} "
                    f"and {category.value!r}"
                )
            categories[name] = category

    raw_preferences = raw.get("preferences", {})
    if not isinstance(raw_preferences, dict):
        raise KbError("preferences must map category names to category lists")
    preferences: Dict[DetectorCategory, Tuple[DetectorCategory, ...]] = {}
    for category_name, preferred_names in raw_preferences.items():
        category = DetectorCategory.from_name(category_name)
        preferred = _category_list(preferred_names, f"preferences[{category_name!r}]")
        undeclared = [c.value for c in (category, *preferred) if c not in declared]
        if undeclared:
            raise KbError(f"preferences uses undeclared categories {undeclared}")
        preferences[category] = preferred

    triplets: Dict[str, Tuple[Tuple[DetectorCategory, ...], ...]] = {}
    raw_triplets = raw.get("triplets", {})
    if not isinstance(raw_triplets, dict):
        raise KbError("triplets must map list names to ranked triplets")
    for list_name, ranked in raw_triplets.items():
        if not isinstance(ranked, list):
            raise KbError(f"triplets[{list_name!r}] must be a list")
        parsed = tuple(_category_list(t, f"triplets[{list_name!r}]") for t in ranked)
        for triplet in parsed:
            if len(triplet) != 3 or len(set(triplet)) != 3:
                raise KbError(f"triplets[{list_name!r}] needs three distinct categories")
        triplets[list_name] = parsed

    knowledge_base = KnowledgeBase(categories, preferences, triplets)
    logger.debug(
        "Knowledge base: %d detectors in %d categories",
        len(categories),
        len(knowledge_base.used_categories()),
    )
    return knowledge_base


def load_default_knowledge_base() -> KnowledgeBase:
    """
    The knowledge base shipped with the package.
    """
    return load_knowledge_base(files("detcov").joinpath(DEFAULT_KB_RESOURCE).read_bytes())
