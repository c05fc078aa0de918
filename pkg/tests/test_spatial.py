import numpy as np
import pytest

from pymfd import errors
from pymfd import snapshot
from pymfd import spatial


def _gas(positions):
    positions = np.asarray(positions, dtype=np.float64)
    count = len(positions)
    return snapshot.ParticleSet(snapshot.Kind.GAS, positions, np.zeros((count, 3)), np.ones(count))


def _brute_force(points, query, box_size, exclude=None):
    distances = spatial.periodic_distance(points, query, box_size)
    ids = np.arange(len(points))
    if exclude is not None:
        keep = ids != exclude
        ids, distances = ids[keep], distances[keep]
    order = np.lexsort((ids, distances))
    return ids[order], distances[order]


def test_minimum_image_distance_wraps_across_faces():
    assert spatial.periodic_distance((0.0, 0.0, 0.0), (24.9, 0.0, 0.0), 25.0) == pytest.approx(0.1)


def test_empty_index_is_valid():
    index = spatial.build_index(np.zeros((0, 3)), 10.0)
    assert index.point_count == 0
    with pytest.raises(errors.InsufficientPoints):
        spatial.knn(index, (1.0, 1.0, 1.0), 1)


def test_point_outside_box_raises_OutOfBox():
    with pytest.raises(errors.OutOfBox):
        spatial.build_index([[1.0, 1.0, 1.0], [1.0, 10.0, 1.0]], 10.0)


def test_ties_are_ordered_by_id():
    index = spatial.build_index([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [9.0, 0.0, 0.0]], 10.0)
    assert spatial.knn(index, 0, 2, exclude_self=True) == [(1, 1.0), (2, 1.0)]


def test_k_equal_to_remaining_points_returns_all():
    index = spatial.build_index([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [9.0, 0.0, 0.0]], 10.0)
    assert sorted(i for i, _ in spatial.knn(index, 2, 2, exclude_self=True)) == [0, 1]


def test_k_larger_than_available_raises_InsufficientPoints():
    index = spatial.build_index([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [9.0, 0.0, 0.0]], 10.0)
    with pytest.raises(errors.InsufficientPoints):
        spatial.knn(index, 0, 3, exclude_self=True)


def test_knn_matches_brute_force():
    rng = np.random.default_rng(21)
    points = rng.uniform(0.0, 10.0, size=(500, 3))
    index = spatial.build_index(points, 10.0)

    for query_id in range(0, 500, 25):
        ids, distances = _brute_force(points, points[query_id], 10.0, exclude=query_id)
        found = spatial.knn(index, query_id, 12, exclude_self=True)
        assert [i for i, _ in found] == ids[:12].tolist()
        assert [d for _, d in found] == distances[:12].tolist()

    position = np.array([9.99, 0.01, 5.0])
    ids, _ = _brute_force(points, position, 10.0)
    assert [i for i, _ in spatial.knn(index, position, 7)] == ids[:7].tolist()


def test_evenly_spaced_ring_has_half_box_radii():
    positions = [[float(i), 0.0, 0.0] for i in range(33)]
    radii = spatial.smoothing_radii(_gas(positions), 33.0, k=32)
    np.testing.assert_array_equal(radii.radii, np.full(33, 16.0))


def test_stars_have_zero_radii():
    stars = snapshot.ParticleSet(snapshot.Kind.STAR, np.full((5, 3), 2.0), np.zeros((5, 3)), np.ones(5))
    radii = spatial.smoothing_radii(stars, 10.0)
    np.testing.assert_array_equal(radii.radii, np.zeros(5))


def test_radii_match_brute_force_kth_distance():
    rng = np.random.default_rng(8)
    points = rng.uniform(0.0, 25.0, size=(2000, 3))
    radii = spatial.smoothing_radii(_gas(points), 25.0, k=32)

    expected = []
    for start in range(0, 2000, 200):
        rows = np.arange(start, start + 200)
        distances = spatial.periodic_distance(points[rows, None, :], points[None, :, :], 25.0)
        distances[np.arange(200), rows] = np.inf
        expected.append(np.sort(distances, axis=1)[:, 31])
    np.testing.assert_array_equal(radii.radii, np.concatenate(expected))


def test_radii_are_translation_invariant():
    rng = np.random.default_rng(9)
    points = rng.uniform(0.0, 10.0, size=(400, 3))
    shifted = np.mod(points + np.array([3.3, -7.1, 9.45]), 10.0)
    shifted[shifted >= 10.0] = 0.0

    original = spatial.smoothing_radii(_gas(points), 10.0, k=16)
    moved = spatial.smoothing_radii(_gas(shifted), 10.0, k=16)
    np.testing.assert_allclose(moved.radii, original.radii, rtol=1e-12)


def test_radii_follow_point_permutations():
    rng = np.random.default_rng(10)
    points = rng.uniform(0.0, 10.0, size=(300, 3))
    permutation = rng.permutation(300)

    original = spatial.smoothing_radii(_gas(points), 10.0, k=8)
    permuted = spatial.smoothing_radii(_gas(points[permutation]), 10.0, k=8)
    np.testing.assert_array_equal(permuted.radii, original.radii[permutation])


def test_too_few_particles_raise_InsufficientPoints():
    with pytest.raises(errors.InsufficientPoints):
        spatial.smoothing_radii(_gas(np.full((32, 3), 1.0)), 10.0, k=32)


def test_empty_species_has_no_radii():
    assert spatial.smoothing_radii(_gas(np.zeros((0, 3))), 10.0).radii.shape == (0,)
