#!/usr/bin/env python3.11

"""
Synthetic Keypoint Generators

Deterministic stand-ins for real detectors, used by the tests, the ``synth``
and ``bench`` commands and the framework demos.

Randomness comes from numpy's PCG64 bit generator wrapped in
`numpy.random.Generator`; for a fixed seed the stream, and therefore every
generated coordinate, is identical across runs and platforms.

Every point lies inside ``[0, width) x [0, height)``. Clustered samples that fall
outside are clipped to the image, not resampled.

Example:
    ```python
    dims = ImageDims(1440, 956)
    spread = gen_uniform(200, dims, seed=7)
    lumpy = gen_clustered(200, dims, k=3, sigma=20.0, seed=7)
    ```
"""

# First-party imports
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

# Third-party imports
import numpy as np

# Project imports
from .keypoints import ImageDims, KeyPointSet

GENERATOR_KINDS = ("uniform", "clustered", "grid")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _upper_bounds(dims: ImageDims) -> np.ndarray:
    """
    Largest coordinates strictly inside the image.
    """
    return np.nextafter(np.array([dims.width, dims.height], dtype=np.float64), 0.0)


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Full description of a synthetic keypoint set.
    """

    kind: str
    dims: ImageDims
    n: int = 0
    rows: int = 1
    cols: int = 1
    seed: int = 0
    k: int = 1
    sigma: float = 1.0
    centers: Optional[Tuple[Tuple[float, float], ...]] = None
    detector: Optional[str] = None
    image_id: str = "synthetic"

    def __post_init__(self) -> None:
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"Unknown generator {self.kind!r}; expected one of {GENERATOR_KINDS}")
        if self.n < 0:
            raise ValueError(f"Point count must be >= 0, got {self.n}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"Grid needs rows, cols >= 1, got {self.rows}x{self.cols}")
        if self.k < 1:
            raise ValueError(f"Cluster count must be >= 1, got {self.k}")
        if not self.sigma > 0:
            raise ValueError(f"Cluster sigma must be > 0, got {self.sigma}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")

    def generate(self) -> KeyPointSet:
        """
        Produce the keypoint set this spec describes.
        """
        detector = self.detector or f"synthetic-{self.kind}"
        if self.kind == "uniform":
            return gen_uniform(self.n, self.dims, self.seed, detector, self.image_id)
        if self.kind == "clustered":
            return gen_clustered(
                self.n,
                self.dims,
                self.k,
                self.sigma,
                self.seed,
                centers=self.centers,
                detector=detector,
                image_id=self.image_id,
            )
        return gen_grid(self.rows, self.cols, self.dims, detector, self.image_id)


def gen_uniform(
    n: int,
    dims: ImageDims,
    seed: int,
    detector: str = "synthetic-uniform",
    image_id: str = "synthetic",
) -> KeyPointSet:
    """
    ``n`` independent uniform points over the image.
    """
    if n < 0:
        raise ValueError(f"Point count must be >= 0, got {n}")
    xy = _rng(seed).random((n, 2)) * np.array([dims.width, dims.height], dtype=np.float64)
    xy = np.minimum(xy, _upper_bounds(dims))
    return KeyPointSet.from_xy(detector, image_id, xy.tolist())


def gen_clustered(
    n: int,
    dims: ImageDims,
    k: int,
    sigma: float,
    seed: int,
    centers: Optional[Sequence[Tuple[float, float]]] = None,
    detector: str = "synthetic-clustered",
    image_id: str = "synthetic",
) -> KeyPointSet:
    """
    ``n`` points around ``k`` cluster centers with Gaussian spread ``sigma``.

    Points are assigned to clusters round-robin. Centers are drawn uniformly
    unless given explicitly.
    """
    if n < 0 or k < 1 or not sigma > 0:
        raise ValueError(f"Invalid clustered spec n={n}, k={k}, sigma={sigma}")
    rng = _rng(seed)
    size = np.array([dims.width, dims.height], dtype=np.float64)
    if centers is None:
        cluster_centers = rng.random((k, 2)) * size
    else:
        cluster_centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
        if len(cluster_centers) != k:
            raise ValueError(f"Expected {k} cluster centers, got {len(cluster_centers)}")
    offsets = rng.normal(0.0, sigma, (n, 2))
    xy = cluster_centers[np.arange(n) % k] + offsets
    xy = np.clip(xy, 0.0, _upper_bounds(dims))
    return KeyPointSet.from_xy(detector, image_id, xy.tolist())


def gen_grid(
    rows: int,
    cols: int,
    dims: ImageDims,
    detector: str = "synthetic-grid",
    image_id: str = "synthetic",
) -> KeyPointSet:
    """
    One point at the center of every cell of a rows x cols grid, row by row.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"Grid needs rows, cols >= 1, got {rows}x{cols}")
    cell_w = dims.width / cols
    cell_h = dims.height / rows
    return KeyPointSet.from_xy(
        detector,
        image_id,
        [((c + 0.5) * cell_w, (r + 0.5) * cell_h) for r in range(rows) for c in range(cols)],
    )


if __name__ == "__main__":
    from .coverage import coverage

    demo_dims = ImageDims(1440, 956)
    print(f"uniform   {coverage(gen_uniform(200, demo_dims, seed=1)):.2f}")
    print(f"clustered {coverage(gen_clustered(200, demo_dims, 3, 20.0, seed=1)):.2f}")
