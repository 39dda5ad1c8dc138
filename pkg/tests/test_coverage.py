"""
Tests of the coverage metrics against brute-force oracles and their geometric properties.
"""

# First-party imports
import math
import time

# Third-party imports
import numpy as np
import pytest
from scipy.spatial.distance import pdist

# Project imports
from detcov.coverage import (
    canonicalize,
    convex_hull,
    convex_hull_ratio,
    coverage,
    harmonic_distances,
    mutual_coverage,
    pairwise_means,
    polygon_area,
)
from detcov.errors import ImageMismatch, InsufficientPoints, UnresolvableLocations
from detcov.keypoints import ImageDims, KeyPoint, KeyPointSet, Point2D
from detcov.synthetic import gen_clustered, gen_uniform

SQUARE = [(25.0, 25.0), (75.0, 25.0), (25.0, 75.0), (75.0, 75.0)]


def _set(coordinates, detector="D", image_id="img"):
    return KeyPointSet.from_xy(detector, image_id, coordinates)


def _brute_force(xy: np.ndarray) -> float:
    n = len(xy)
    return n * (n - 1) / (2.0 * np.sum(1.0 / pdist(xy)))


def test_two_points_coverage_is_their_distance():
    assert coverage(_set([(0, 0), (3, 4)])) == pytest.approx(5.0, rel=1e-12)


def test_collinear_triplet():
    assert coverage(_set([(0, 0), (1, 0), (2, 0)])) == pytest.approx(1.2, abs=1e-12)


def test_grid_square_value():
    expected = 3.0 / (2.0 / 50.0 + 1.0 / (50.0 * math.sqrt(2.0)))
    assert coverage(_set(SQUARE)) == pytest.approx(expected, rel=1e-12)
    assert coverage(_set(SQUARE)) == pytest.approx(55.41, abs=0.005)


def test_matches_brute_force_on_random_sets():
    rng = np.random.default_rng(20240501)
    for _ in range(200):
        n = int(rng.integers(2, 501))
        xy = rng.random((n, 2)) * np.array([1440.0, 956.0])
        value = coverage(_set(xy.tolist()))
        assert value == pytest.approx(_brute_force(xy), rel=1e-9)


def test_rigid_motion_invariance():
    rng = np.random.default_rng(3)
    xy = rng.random((150, 2)) * 500.0
    angle = 0.7
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = xy @ rotation.T + np.array([123.0, -45.5])
    assert coverage(_set(moved.tolist())) == pytest.approx(coverage(_set(xy.tolist())), rel=1e-6)


@pytest.mark.parametrize("factor", [0.5, 2.0, 10.0])
def test_scaling(factor):
    rng = np.random.default_rng(11)
    xy = rng.random((120, 2)) * 300.0
    scaled = coverage(_set((xy * factor).tolist()))
    assert scaled == pytest.approx(factor * coverage(_set(xy.tolist())), rel=1e-9)


def test_point_order_does_not_matter():
    rng = np.random.default_rng(5)
    xy = rng.random((300, 2)) * 800.0
    shuffled = xy[rng.permutation(len(xy))]
    assert coverage(_set(shuffled.tolist())) == coverage(_set(xy.tolist()))


def test_exact_duplicates_are_ignored():
    assert coverage(_set([(0, 0), (0, 0), (3, 4), (3, 4)])) == pytest.approx(5.0, rel=1e-12)


def test_fewer_than_two_distinct_locations():
    with pytest.raises(InsufficientPoints):
        coverage(_set([]))
    with pytest.raises(InsufficientPoints):
        coverage(_set([(1, 1)]))
    with pytest.raises(InsufficientPoints):
        coverage(_set([(1, 1), (1, 1), (1, 1)]))


def test_canonicalize_keeps_first_occurrence_and_order():
    original = _set([(5, 5), (1, 1), (5, 5), (2, 2), (1, 1)])
    assert [(p.x, p.y) for p in canonicalize(original).points] == [(5, 5), (1, 1), (2, 2)]


def test_canonicalize_collapses_multi_scale_detections():
    original = KeyPointSet(
        "D",
        "img",
        (
            KeyPoint(Point2D(0, 0), 2.0),
            KeyPoint(Point2D(0, 0), 5.0),
            KeyPoint(Point2D(3, 4)),
        ),
    )
    kept = canonicalize(original).points
    assert [(p.x, p.y, p.scale) for p in kept] == [(0, 0, 2.0), (3, 4, None)]


def test_epsilon_merges_nearby_points():
    points = _set([(0, 0), (0.5, 0), (3, 4)])
    assert len(canonicalize(points, epsilon=1.0)) == 2
    assert coverage(points, epsilon=1.0) == pytest.approx(5.0, rel=1e-12)
    with pytest.raises(ValueError):
        canonicalize(points, epsilon=-1.0)


def test_epsilon_merge_does_not_depend_on_input_order():
    a = _set([(0.0, 0.0)], detector="A")
    b = _set([(0.4, 0.0), (0.8, 0.0), (5.0, 0.0)], detector="B")
    forward = mutual_coverage([a, b], epsilon=0.5)
    assert forward == mutual_coverage([b, a], epsilon=0.5)
    shuffled = _set([(5.0, 0.0), (0.8, 0.0), (0.0, 0.0), (0.4, 0.0)])
    assert coverage(shuffled, epsilon=0.5) == forward


def test_locations_too_close_to_resolve():
    tiny = _set([(0.0, 0.0), (1e-320, 0.0)])
    with pytest.raises(UnresolvableLocations):
        coverage(tiny)
    with pytest.raises(InsufficientPoints):
        pairwise_means(tiny)


def test_harmonic_distances_of_symmetric_square():
    distances = harmonic_distances(_set(SQUARE))
    assert distances.shape == (4,)
    assert np.allclose(distances, distances[0])


def test_pairwise_means_chain_and_harmonic_equals_coverage():
    rng = np.random.default_rng(17)
    for n in (2, 3, 40, 300):
        points = _set((rng.random((n, 2)) * 640.0).tolist())
        means = pairwise_means(points)
        assert means.harmonic <= means.geometric * (1 + 1e-12)
        assert means.geometric <= means.arithmetic * (1 + 1e-12)
        assert means.harmonic == pytest.approx(coverage(points), rel=1e-9)
        assert means.arithmetic == pytest.approx(float(np.mean(pdist(points.locations()))))


def test_mutual_coverage_is_symmetric():
    a = gen_uniform(60, ImageDims(640, 480), seed=1, detector="A", image_id="img")
    b = gen_clustered(60, ImageDims(640, 480), 2, 15.0, seed=2, detector="B", image_id="img")
    assert mutual_coverage([a, b]) == mutual_coverage([b, a])


def test_mutual_coverage_of_a_set_with_itself():
    a = gen_uniform(80, ImageDims(640, 480), seed=9, detector="A", image_id="img")
    assert mutual_coverage([a, a]) == coverage(a)


def test_mutual_coverage_collinear_union():
    a = _set([(0, 0), (2, 0)], detector="A")
    b = _set([(1, 0)], detector="B")
    assert mutual_coverage([a, b]) == pytest.approx(1.2, abs=1e-12)


def test_mutual_coverage_rejects_mixed_images():
    with pytest.raises(ImageMismatch):
        mutual_coverage([_set(SQUARE, image_id="one"), _set(SQUARE, image_id="two")])


def test_clustering_is_penalized():
    dims = ImageDims(1440, 956)
    wins = sum(
        coverage(gen_uniform(200, dims, seed)) > coverage(gen_clustered(200, dims, 3, 20.0, seed))
        for seed in range(100)
    )
    assert wins >= 95


def test_convex_hull_is_counter_clockwise_without_edge_points():
    points = [(0, 0), (1, 0), (2, 0), (2, 2), (0, 2), (1, 1)]
    assert convex_hull(points) == [(0, 0), (2, 0), (2, 2), (0, 2)]
    assert polygon_area(convex_hull(points)) == 4.0


def test_degenerate_hulls_have_no_area(dims_100):
    assert convex_hull_ratio(_set([(1, 1), (5, 5)]), dims_100) == 0.0
    assert convex_hull_ratio(_set([(1, 1), (2, 2), (3, 3)]), dims_100) == 0.0
    with pytest.raises(InsufficientPoints):
        convex_hull_ratio(_set([]), dims_100)


def test_hull_ratio_ignores_interior_points_while_coverage_does_not(dims_100):
    corners = _set(SQUARE)
    with_interior = _set(SQUARE + [(30.0, 30.0)])
    assert convex_hull_ratio(corners, dims_100) == 0.25
    assert convex_hull_ratio(with_interior, dims_100) == convex_hull_ratio(corners, dims_100)
    assert coverage(with_interior) < coverage(corners)


def test_hull_ratio_of_triangle_and_image_corners(dims_100):
    assert convex_hull_ratio(_set([(0, 0), (100, 0), (0, 100)]), dims_100) == 0.5
    dims = ImageDims(640, 480)
    corners = _set([(0, 0), (640, 0), (0, 480), (640, 480)])
    assert convex_hull_ratio(corners, dims) == 1.0


def test_hull_ratio_is_clipped_to_one():
    outside = _set([(-10, -10), (200, -10), (200, 200), (-10, 200)])
    assert convex_hull_ratio(outside, ImageDims(100, 100)) == 1.0


def test_ten_thousand_points_within_budget():
    points = gen_uniform(10_000, ImageDims(1440, 956), seed=42)
    started = time.perf_counter()
    value = coverage(points)
    assert time.perf_counter() - started < 5.0
    assert value > 0
