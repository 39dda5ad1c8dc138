#!/usr/bin/env python3.11

"""
Keypoint Data Types

Immutable value types shared by every part of detcov: image locations,
keypoints with optional scale and opaque per-detector attributes, named
keypoint sets (one detector on one image) and image dimensions.

Example:
    ```python
    points = KeyPointSet.from_xy("SFOP", "img01", [(0, 0), (3, 4)])
    dims = ImageDims.parse("1080x717")
    ```
"""

# First-party imports
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Tuple

# Third-party imports
import numpy as np

_DIMS_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


@dataclass(frozen=True)
class Point2D:
    """
    A real-valued pixel location.
    """

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Non-finite coordinate ({self.x}, {self.y})")


@dataclass(frozen=True)
class KeyPoint:
    """
    A detected interest point.

    Args:
        location (Point2D): Where the detector fired.
        scale (Optional[float]): Characteristic scale in pixels, if reported.
        attributes (Tuple[str, ...]): Opaque per-detector payload (ellipse
            parameters, extra csv columns). Carried, never interpreted.
    """

    location: Point2D
    scale: Optional[float] = None
    attributes: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.scale is not None and not (
            math.isfinite(self.scale) and self.scale > 0
        ):
            raise ValueError(f"Scale must be positive, got {self.scale}")

    @property
    def x(self) -> float:
        return self.location.x

    @property
    def y(self) -> float:
        return self.location.y


@dataclass(frozen=True)
class KeyPointSet:
    """
    The keypoints of one detector on one image, in detection order.
    """

    detector: str
    image_id: str
    points: Tuple[KeyPoint, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not isinstance(self.points, tuple):
            object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_xy(
        cls,
        detector: str,
        image_id: str,
        coordinates: Iterable[Sequence[float]],
    ) -> "KeyPointSet":
        """
        Build a set from bare (x, y) pairs.

        Args:
            detector (str): Detector name.
            image_id (str): Image identifier.
            coordinates (Iterable[Sequence[float]]): (x, y) pairs.

        Returns:
            KeyPointSet: The keypoints, without scale or attributes.
        """
        return cls(
            detector,
            image_id,
            tuple(KeyPoint(Point2D(float(x), float(y))) for x, y in coordinates),
        )

    def locations(self) -> np.ndarray:
        """
        Return the point locations as an (N, 2) float64 array.
        """
        if not self.points:
            return np.empty((0, 2), dtype=np.float64)
        return np.array([(p.x, p.y) for p in self.points], dtype=np.float64)

    def with_points(self, points: Iterable[KeyPoint]) -> "KeyPointSet":
        """
        Return a copy of this set holding other points.
        """
        return replace(self, points=tuple(points))


@dataclass(frozen=True)
class ImageDims:
    """
    Pixel extent of an image.
    """

    width: int
    height: int

    def __post_init__(self) -> None:
        if isinstance(self.width, bool) or isinstance(self.height, bool):
            raise ValueError("Image dimensions must be integers")
        if int(self.width) != self.width or int(self.height) != self.height:
            raise ValueError(f"Image dimensions must be integers: {self}")
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"Image dimensions must be positive, got {self.width}x{self.height}"
            )

    @classmethod
    def parse(cls, text: str) -> "ImageDims":
        """
        Parse a ``WxH`` string such as ``1080x717``.

        Raises:
            ValueError: If the text is not of that form or not positive.
        """
        match = _DIMS_PATTERN.match(text)
        if match is None:
            raise ValueError(f"Expected dimensions as WIDTHxHEIGHT, got {text!r}")
        return cls(int(match.group(1)), int(match.group(2)))

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def perimeter(self) -> int:
        return 2 * (self.width + self.height)

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"
