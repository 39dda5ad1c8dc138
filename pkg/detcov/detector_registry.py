#!/usr/bin/env python3.11

"""
Detector Registry

Detectors are external programs; detcov only sees their keypoints. A
`KeyPointProvider` answers two questions for one detector: does it have
keypoints for an image, and what are they. The `DetectorRegistry` keeps
providers under detector names, in registration order. That order is the
deterministic tie-break the combination framework uses when a category holds
several detectors.

Loaded sets are cached, so repeated queries for the same image return the very
same `KeyPointSet`. The cache is guarded by a lock; a registry can be shared by
worker threads.

Example:
    ```python
    registry = DetectorRegistry.from_index(index)
    registry.keypoints("IBR", "pair07_a")
    ```
"""

# First-party imports
import threading
from abc import ABC, abstractmethod
from typing import Dict, List, Mapping, Optional, Tuple

# Project imports
from .dataset import DatasetIndex
from .errors import DetectorUnavailable
from .keypoints import KeyPointSet
from .logging_manager import LoggingManager


class KeyPointProvider(ABC):
    """
    Abstract source of one detector's keypoints.
    """

    @abstractmethod
    def available(self, image_id: str) -> bool:
        """
        Whether keypoints exist for the image.
        """

    @abstractmethod
    def load(self, image_id: str) -> KeyPointSet:
        """
        The keypoints of the image.
        """


class StaticProvider(KeyPointProvider):
    """
    Provider over keypoint sets already in memory.
    """

    def __init__(self, sets: Mapping[str, KeyPointSet]) -> None:
        self.sets = dict(sets)

    def available(self, image_id: str) -> bool:
        return image_id in self.sets

    def load(self, image_id: str) -> KeyPointSet:
        try:
            return self.sets[image_id]
        except KeyError as ke:
            raise DetectorUnavailable(f"No keypoints for image {image_id!r}") from ke


class DatasetProvider(KeyPointProvider):
    """
    Provider reading one detector's files from a dataset index.
    """

    def __init__(self, index: DatasetIndex, detector: str) -> None:
        self.index = index
        self.detector = detector

    def available(self, image_id: str) -> bool:
        return self.index.entry(image_id, self.detector) is not None

    def load(self, image_id: str) -> KeyPointSet:
        return self.index.load(image_id, self.detector)


class DetectorRegistry:
    """
    Ordered mapping of detector names to keypoint providers.
    """

    def __init__(self) -> None:
        """
        Initialize an empty registry.

        Attributes:
            providers (dict): Providers by detector name, in registration order.
        """
        self.providers: Dict[str, KeyPointProvider] = {}
        self.logger = LoggingManager(__name__).logger
        self._cache: Dict[Tuple[str, str], KeyPointSet] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_index(cls, index: DatasetIndex) -> "DetectorRegistry":
        """
        Register every detector of a dataset index, in manifest order.
        """
        registry = cls()
        for detector in index.detectors:
            registry.add_detector(detector, DatasetProvider(index, detector))
        return registry

    def add_detector(self, name: str, provider: KeyPointProvider) -> None:
        """
        Register a provider under a detector name.

        Raises:
            ValueError: If a detector with the same name is already registered.
        """
        if name in self.providers:
            raise ValueError(f"A detector named '{name}' is already registered.")
        self.providers[name] = provider
        self.logger.debug("Registered detector %s", name)

    def get_provider(self, name: str) -> Optional[KeyPointProvider]:
        """
        The provider of a detector, or None if it is not registered.
        """
        return self.providers.get(name)

    def names(self) -> List[str]:
        return list(self.providers)

    def is_available(self, name: str, image_id: str) -> bool:
        """
        Whether a registered detector has keypoints for an image.
        """
        provider = self.get_provider(name)
        return provider is not None and provider.available(image_id)

    def keypoints(self, name: str, image_id: str) -> KeyPointSet:
        """
        Keypoints of a detector on an image, loaded once and then cached.

        Raises:
            DetectorUnavailable: If the detector is unknown or has nothing for the image.
        """
        key = (name, image_id)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        if not self.is_available(name, image_id):
            raise DetectorUnavailable(f"Detector {name!r} has no keypoints for image {image_id!r}")
        loaded = self.get_provider(name).load(image_id)
        with self._lock:
            return self._cache.setdefault(key, loaded)
