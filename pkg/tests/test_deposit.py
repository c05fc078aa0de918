import itertools
import math

import numpy as np
import pytest

from pymfd import deposit
from pymfd import errors
from pymfd import fields
from pymfd import grids
from pymfd import kernels
from pymfd import snapshot
from pymfd import spatial

MGAS = fields.field_spec("Mgas")
TEMPERATURE = fields.field_spec("T")


def _gas_snapshot(positions, masses, radii, box_size, velocities=None, **properties):
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    count = len(positions)
    velocities = np.zeros((count, 3)) if velocities is None else velocities
    gas = snapshot.ParticleSet(snapshot.Kind.GAS, positions, velocities, masses, properties)
    snap = snapshot.Snapshot(snapshot.SnapshotHeader(box_size, 0.0, 1), [gas])
    return snap, [spatial.SmoothingRadii(snapshot.Kind.GAS, np.asarray(radii, dtype=np.float64), 32)]


def _random_gas(seed, count, box_size, max_radius):
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.01, box_size - 0.01, size=(count, 3))
    masses = rng.uniform(1.0, 3.0, size=count)
    radii = rng.uniform(0.2, max_radius, size=count)
    temperature = rng.uniform(1.0e4, 1.0e6, size=count)
    return positions, masses, radii, temperature


def _brute_force_mass_grid(positions, masses, radii, box_size, n):
    """Loop over every particle and every voxel its sphere can touch, wrapping indices periodically."""
    cell = box_size / n
    expected = np.zeros((n, n, n))
    for position, mass, radius in zip(positions, masses, radii):
        low = np.floor((position - radius) / cell).astype(int)
        high = np.floor((position + radius) / cell).astype(int)
        for index in itertools.product(*(range(a, b + 1) for a, b in zip(low, high))):
            kernel = kernels.Kernel3D(tuple(position), radius)
            fraction = kernels.sphere_voxel_overlap(kernel, np.asarray(index) * cell, cell)
            expected[tuple(np.mod(index, n))] += mass * fraction
    return expected / (1000.0 * cell) ** 3


def test_single_particle_mass_is_conserved():
    for position, radius in (((12.3, 4.5, 7.7), 3.7), ((0.2, 24.9, 12.5), 1.1), ((5.0, 5.0, 5.0), 0.0)):
        snap, radii = _gas_snapshot([position], [5.0], [radius], 25.0)
        grid = deposit.deposit3d(snap, radii, MGAS, 16)
        assert grid.total() == pytest.approx(5.0, rel=1e-12)


def test_kernel_larger_than_box_is_conserved():
    snap, radii = _gas_snapshot([(1.0, 2.0, 3.0)], [2.0], [14.0], 10.0)
    assert deposit.deposit3d(snap, radii, MGAS, 8).total() == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("offset", [1e-3, 1e-4, 1e-6])
def test_large_kernel_next_to_a_face_is_conserved(offset):
    for axis in range(3):
        position = np.array([10.106, 20.977, 30.5])
        position[axis] = np.floor(position[axis]) + offset
        snap, radii = _gas_snapshot([position], [3.0], [14.0315], 64.0)
        grid = deposit.deposit3d(snap, radii, MGAS, 64)
        assert grid.total() == pytest.approx(3.0, rel=1e-12)
        assert grid.values.min() > -1e-9 * grid.values.max()


@pytest.mark.parametrize("n, seed", [(32, 0), (32, 1), (32, 2), (64, 3), (64, 4), (128, 5)])
def test_synthetic_gas_mass_is_conserved(n, seed):
    snap = snapshot.gen_synthetic(seed, 25.0, 2000, 0, 0, 8)
    gas = snap.get(snapshot.Kind.GAS)
    radii = spatial.smoothing_radii(gas, 25.0, k=8)
    grid = deposit.deposit3d(snap, [radii], MGAS, n)
    assert grid.total() == pytest.approx(gas.masses.sum(), rel=1e-9)


def test_co_located_particles_give_mass_ratio():
    positions = [(12.3, 4.5, 7.7), (12.3, 4.5, 7.7)]
    snap, radii = _gas_snapshot(positions, [5.0, 5.0], [2.0, 2.0], 25.0, mg_mass=[1.0, 2.0], fe_mass=[4.0, 4.0])
    grid = deposit.deposit3d(snap, radii, fields.field_spec("MgFe"), 16)
    touched = grid.values[grid.values != 0.0]
    assert touched.size > 0
    np.testing.assert_allclose(touched, 0.375, rtol=1e-6)

    projected = deposit.deposit2d(snap, radii, fields.field_spec("MgFe"), deposit.SlicePlan("z", 5.0, 5.0), 32)
    touched = projected.values[projected.values != 0.0]
    assert touched.size > 0
    np.testing.assert_allclose(touched, 0.375, rtol=1e-6)


def test_separate_particles_keep_their_own_mass_ratio():
    positions = [(5.0, 5.0, 5.0), (15.0, 15.0, 15.0)]
    snap, radii = _gas_snapshot(positions, [5.0, 5.0], [2.0, 2.0], 25.0, mg_mass=[1.0, 2.0], fe_mass=[4.0, 4.0])
    values = deposit.deposit3d(snap, radii, fields.field_spec("MgFe"), 25).values
    np.testing.assert_allclose(values[3:7, 3:7, 3:7][values[3:7, 3:7, 3:7] != 0.0], 0.25, rtol=1e-6)
    np.testing.assert_allclose(values[13:17, 13:17, 13:17][values[13:17, 13:17, 13:17] != 0.0], 0.5, rtol=1e-6)


def _four_species_snapshot():
    rng = np.random.default_rng(8)
    box_size = 10.0

    def particles(kind, count):
        return snapshot.ParticleSet(
            kind, rng.uniform(0.0, box_size, size=(count, 3)), np.zeros((count, 3)), rng.uniform(1.0, 2.0, count)
        )

    species = [particles(kind, count) for kind, count in zip(snapshot.Kind, (30, 30, 6, 2))]
    snap = snapshot.Snapshot(snapshot.SnapshotHeader(box_size, 0.0, 4), species)
    radii = [
        spatial.SmoothingRadii(snapshot.Kind.GAS, rng.uniform(0.5, 2.0, 30), 32),
        spatial.SmoothingRadii(snapshot.Kind.DARK_MATTER, rng.uniform(0.5, 2.0, 30), 32),
    ]
    return snap, radii


def test_total_matter_sums_every_species():
    snap, radii = _four_species_snapshot()
    total = deposit.deposit3d(snap, radii, fields.field_spec("Mtot"), 10)
    assert total.total() == pytest.approx(sum(s.masses.sum() for s in snap.species), rel=1e-12)

    parts = sum(deposit.deposit3d(snap, radii, fields.field_spec(p), 10).values for p in ("Mgas", "Mcdm", "Mstar"))
    holes = snap.get(snapshot.Kind.BLACK_HOLE)
    for position, mass in zip(holes.positions, holes.masses):
        parts[tuple(np.floor(position).astype(int))] += mass / total.cell_measure
    np.testing.assert_allclose(total.values, parts, rtol=1e-5, atol=1e-6 * parts.max())


def test_opposite_velocities_do_not_cancel_in_gas_speed():
    velocities = np.array([[3.0, 4.0, 0.0], [-3.0, -4.0, 0.0]])
    snap, radii = _gas_snapshot([(5.0, 5.0, 5.0)] * 2, [1.0, 1.0], [1.0, 1.0], 10.0, velocities=velocities)
    values = deposit.deposit3d(snap, radii, fields.field_spec("Vgas"), 8).values
    touched = values[values != 0.0]
    assert touched.size > 0
    np.testing.assert_allclose(touched, 5.0, rtol=1e-6)


def test_co_located_particles_give_mass_weighted_temperature():
    snap, radii = _gas_snapshot(
        [(12.3, 4.5, 7.7), (12.3, 4.5, 7.7)], [1.0, 3.0], [2.0, 2.0], 25.0, temperature=[10.0, 20.0]
    )
    grid = deposit.deposit3d(snap, radii, TEMPERATURE, 16)
    touched = grid.values[grid.values != 0.0]
    assert touched.size > 0
    np.testing.assert_allclose(touched, 17.5, rtol=1e-6)
    assert grid.empty_cells == 16**3 - touched.size


def test_deposition_matches_brute_force():
    positions, masses, radii, _ = _random_gas(1, 60, 10.0, 3.0)
    snap, kernel_radii = _gas_snapshot(positions, masses, radii, 10.0)
    grid = deposit.deposit3d(snap, kernel_radii, MGAS, 8, chunk_size=7)

    expected = _brute_force_mass_grid(positions, masses, radii, 10.0, 8)
    np.testing.assert_allclose(grid.values, expected, rtol=1e-6, atol=1e-6 * expected.max())


def test_synthetic_snapshot_matches_brute_force():
    snap = snapshot.gen_synthetic(3, 10.0, 150, 0, 0, 3)
    gas = snap.get(snapshot.Kind.GAS)
    radii = spatial.smoothing_radii(gas, 10.0, k=8)
    grid = deposit.deposit3d(snap, [radii], MGAS, 6)

    expected = _brute_force_mass_grid(gas.positions, gas.masses, radii.radii, 10.0, 6)
    np.testing.assert_allclose(grid.values, expected, rtol=1e-6, atol=1e-6 * expected.max())
    assert grid.total() == pytest.approx(gas.masses.sum(), rel=1e-6)


def test_result_does_not_depend_on_thread_count():
    positions, masses, radii, temperature = _random_gas(2, 500, 25.0, 4.0)
    snap, kernel_radii = _gas_snapshot(positions, masses, radii, 25.0, temperature=temperature)
    serial = deposit.deposit3d(snap, kernel_radii, TEMPERATURE, 16, threads=1, chunk_size=64)
    parallel = deposit.deposit3d(snap, kernel_radii, TEMPERATURE, 16, threads=4, chunk_size=64)
    np.testing.assert_array_equal(serial.values, parallel.values)


def test_mass_weighted_values_stay_within_particle_range():
    positions, masses, radii, temperature = _random_gas(3, 300, 25.0, 4.0)
    snap, kernel_radii = _gas_snapshot(positions, masses, radii, 25.0, temperature=temperature)
    values = deposit.deposit3d(snap, kernel_radii, TEMPERATURE, 16).values
    touched = values[values != 0.0]
    assert touched.min() >= temperature.min() * (1 - 1e-6)
    assert touched.max() <= temperature.max() * (1 + 1e-6)


def test_quarter_turn_rotates_the_grid():
    positions, masses, radii, _ = _random_gas(4, 200, 25.0, 4.0)
    rotated = np.stack([positions[:, 1], 25.0 - positions[:, 0], positions[:, 2]], axis=1)

    snap, kernel_radii = _gas_snapshot(positions, masses, radii, 25.0)
    original = deposit.deposit3d(snap, kernel_radii, MGAS, 16).values
    snap, kernel_radii = _gas_snapshot(rotated, masses, radii, 25.0)
    turned = deposit.deposit3d(snap, kernel_radii, MGAS, 16).values

    expected = original.transpose(1, 0, 2)[:, ::-1, :]
    np.testing.assert_allclose(turned, expected, rtol=1e-5, atol=1e-5 * original.max())


def test_whole_voxel_translation_rolls_the_grid():
    positions, masses, radii, _ = _random_gas(5, 200, 25.0, 4.0)
    cell = 25.0 / 16
    shifted = np.mod(positions + np.array([3 * cell, 0.0, 5 * cell]), 25.0)

    snap, kernel_radii = _gas_snapshot(positions, masses, radii, 25.0)
    original = deposit.deposit3d(snap, kernel_radii, MGAS, 16).values
    snap, kernel_radii = _gas_snapshot(shifted, masses, radii, 25.0)
    moved = deposit.deposit3d(snap, kernel_radii, MGAS, 16).values

    expected = np.roll(original, (3, 5), axis=(0, 2))
    np.testing.assert_allclose(moved, expected, rtol=1e-5, atol=1e-5 * original.max())


def test_mirroring_flips_the_grid():
    positions, masses, radii, _ = _random_gas(6, 200, 25.0, 4.0)
    mirrored = positions.copy()
    mirrored[:, 0] = 25.0 - mirrored[:, 0]

    snap, kernel_radii = _gas_snapshot(positions, masses, radii, 25.0)
    original = deposit.deposit3d(snap, kernel_radii, MGAS, 16).values
    snap, kernel_radii = _gas_snapshot(mirrored, masses, radii, 25.0)
    flipped = deposit.deposit3d(snap, kernel_radii, MGAS, 16).values

    np.testing.assert_allclose(flipped, original[::-1], rtol=1e-5, atol=1e-5 * original.max())


def test_missing_gas_radii_raise_MissingRadii():
    snap, _ = _gas_snapshot([(1.0, 1.0, 1.0)], [1.0], [1.0], 10.0)
    with pytest.raises(errors.MissingRadii):
        deposit.deposit3d(snap, [], MGAS, 8)


def test_stars_deposit_without_radii():
    stars = snapshot.ParticleSet(snapshot.Kind.STAR, [[1.0, 2.0, 3.0], [9.9, 0.0, 5.0]], np.zeros((2, 3)), [2.0, 3.0])
    snap = snapshot.Snapshot(snapshot.SnapshotHeader(10.0, 0.0, 1), [stars])
    grid = deposit.deposit3d(snap, [], fields.field_spec("Mstar"), 10)
    assert grid.values[1, 2, 3] * grid.cell_measure == pytest.approx(2.0, rel=1e-6)
    assert grid.values[9, 0, 5] * grid.cell_measure == pytest.approx(3.0, rel=1e-6)
    assert np.count_nonzero(grid.values) == 2


def test_unusual_grid_size_logs_warning(caplog):
    snap, radii = _gas_snapshot([(1.0, 1.0, 1.0)], [1.0], [0.5], 10.0)
    deposit.deposit3d(snap, radii, MGAS, 8)
    assert any("grid size 8" in record.getMessage() for record in caplog.records)


def test_opposite_velocities_cancel_in_bulk_velocity():
    velocities = np.array([[3.0, 4.0, 0.0], [-3.0, -4.0, 0.0]])
    snap, radii = _gas_snapshot([(5.0, 5.0, 5.0)] * 2, [1.0, 1.0], [1.0, 1.0], 10.0, velocities=velocities)
    grid = deposit.bulk_velocity3d(snap, radii, 8)
    np.testing.assert_allclose(grid.values, 0.0, atol=1e-9)


def test_single_particle_bulk_velocity_is_its_speed():
    snap, radii = _gas_snapshot([(5.0, 5.0, 5.0)], [2.0], [1.0], 10.0, velocities=np.array([[3.0, 4.0, 0.0]]))
    values = deposit.bulk_velocity3d(snap, radii, 8).values
    np.testing.assert_allclose(values[values != 0.0], 5.0, rtol=1e-6)


def test_default_slices_for_a_25_mpc_box():
    plans = deposit.slice_plan_default(25.0)
    assert len(plans) == 15
    assert {plan.thickness for plan in plans} == {5.0}
    assert {plan.offset for plan in plans} == {0.0, 5.0, 10.0, 15.0, 20.0}
    assert [plan.axis for plan in plans[::5]] == ["z", "y", "x"]


def test_default_slices_for_a_10_mpc_box():
    plans = deposit.slice_plan_default(10.0)
    assert len(plans) == 15
    assert {plan.thickness for plan in plans} == {2.0}


def test_default_slices_along_one_axis_are_disjoint():
    plans = [plan for plan in deposit.slice_plan_default(25.0) if plan.axis == "y"]
    intervals = sorted((plan.offset, plan.offset + plan.thickness) for plan in plans)
    assert all(a[1] <= b[0] for a, b in zip(intervals, intervals[1:]))


def test_single_particle_map_conserves_mass():
    snap, radii = _gas_snapshot([(3.0, 4.0, 1.0)], [7.0], [2.5], 10.0)
    projected = deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("z", 0.0, 2.0), 32)
    assert projected.dimensionality == 2
    assert projected.total() == pytest.approx(7.0, rel=1e-6)


def test_map_wraps_kernels_across_box_faces():
    snap, radii = _gas_snapshot([(0.1, 9.95, 5.0)], [1.0], [1.5], 10.0)
    projected = deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("z", 4.0, 2.0), 20)
    assert projected.total() == pytest.approx(1.0, rel=1e-6)
    assert projected.values[0, 0] > 0 and projected.values[-1, -1] > 0


def test_particle_on_slab_upper_edge_is_excluded():
    snap, radii = _gas_snapshot([(5.0, 5.0, 7.0)], [1.0], [3.0], 10.0)
    projected = deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("z", 5.0, 2.0), 16)
    assert not projected.values.any()


def test_slab_membership_wraps_periodically():
    snap, radii = _gas_snapshot([(5.0, 5.0, 1.0)], [1.0], [0.5], 10.0)
    projected = deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("z", 8.0, 4.0), 16)
    assert projected.total() == pytest.approx(1.0, rel=1e-6)


def test_tracer_map_matches_exact_disk_areas():
    box_size, n, radius, mass = 10.0, 20, 2.2, 3.0
    centre = (4.13, 5.37)
    snap, radii = _gas_snapshot([(centre[0], centre[1], 1.0)], [mass], [radius], box_size)
    projected = deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("z", 0.0, 2.0), n, n_tracers=1_000_000)

    pixel = box_size / n
    expected = np.zeros((n, n))
    for row, column in itertools.product(range(n), repeat=2):
        area = kernels.circle_rect_area(centre, radius, (row * pixel, column * pixel), pixel)
        expected[row, column] = mass * area / (math.pi * radius**2)
    expected /= (1000.0 * pixel) ** 2
    assert np.abs(projected.values - expected).max() <= 0.02 * expected.max()


def test_projected_sphere_mode_conserves_mass():
    snap, radii = _gas_snapshot([(3.0, 4.0, 1.0)], [7.0], [2.5], 10.0)
    plan = deposit.SlicePlan("z", 0.0, 2.0)
    projected = deposit.deposit2d(snap, radii, MGAS, plan, 32, kernels.Kernel2DMode.PROJECTED_SPHERE)
    assert projected.total() == pytest.approx(7.0, rel=1e-6)


def test_map_rows_follow_first_in_plane_axis():
    snap, radii = _gas_snapshot([(1.0, 2.0, 7.0)], [1.0], [0.0], 10.0)
    projected = deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("y", 0.0, 5.0), 10)
    assert projected.values[1, 7] > 0
    assert np.count_nonzero(projected.values) == 1


def test_bad_slice_raises_ValueError():
    snap, radii = _gas_snapshot([(1.0, 1.0, 1.0)], [1.0], [0.5], 10.0)
    with pytest.raises(ValueError):
        deposit.deposit2d(snap, radii, MGAS, deposit.SlicePlan("z", 0.0, 11.0), 16)


def _mass_grid(seed=0, n=8, box_size=10.0):
    positions, masses, radii, temperature = _random_gas(seed, 200, box_size, 2.0)
    snap, kernel_radii = _gas_snapshot(positions, masses, radii, box_size, temperature=temperature)
    return snap, kernel_radii


def test_full_depth_projection_conserves_mass():
    snap, radii = _mass_grid()
    grid = deposit.deposit3d(snap, radii, MGAS, 8)
    projected = deposit.extract_map(grid, "z", 0, 8)
    assert projected.total() == pytest.approx(grid.total(), rel=1e-6)


def test_single_voxel_projection_is_that_plane():
    snap, radii = _mass_grid()
    grid = deposit.deposit3d(snap, radii, MGAS, 8)
    projected = deposit.extract_map(grid, "x", 3, 1)
    np.testing.assert_allclose(projected.values, grid.values[3] * 1000.0 * grid.cell_size, rtol=1e-6)


def test_uniform_mass_projection_is_plain_mean():
    rng = np.random.default_rng(1)
    temperature = grids.ScalarGrid(rng.uniform(1.0, 2.0, size=(8, 8, 8)), 10.0, 0.0, fields.FieldId.T)
    mass = grids.ScalarGrid(np.full((8, 8, 8), 4.0), 10.0, 0.0, fields.FieldId.MGAS)
    projected = deposit.extract_map(temperature, 2, 0, 8, mass_grid=mass)
    np.testing.assert_allclose(projected.values, temperature.values.mean(axis=2), rtol=1e-6)


def test_weighted_projection_without_weights_raises_MissingMassGrid():
    temperature = grids.ScalarGrid(np.ones((4, 4, 4)), 10.0, 0.0, fields.FieldId.T)
    with pytest.raises(errors.MissingMassGrid):
        deposit.extract_map(temperature, "z", 0, 2)


def test_weighted_projection_uses_retained_planes():
    snap, radii = _mass_grid()
    masses = deposit.deposit3d(snap, radii, MGAS, 8)
    temperature = deposit.deposit3d(snap, radii, TEMPERATURE, 8)
    from_planes = deposit.extract_map(temperature, "y", 2, 3)
    from_masses = deposit.extract_map(temperature, "y", 2, 3, mass_grid=masses)
    np.testing.assert_allclose(from_planes.values, from_masses.values, rtol=1e-5)


def test_downsampling_a_uniform_grid_keeps_its_value():
    for field in (fields.FieldId.MGAS, fields.FieldId.T):
        grid = grids.ScalarGrid(np.full((8, 8, 8), 2.5), 10.0, 0.0, field)
        mass = grids.ScalarGrid(np.ones((8, 8, 8)), 10.0, 0.0, fields.FieldId.MGAS)
        coarse = deposit.downsample(grid, 2, mass_grid=mass)
        assert coarse.n == 4
        np.testing.assert_allclose(coarse.values, 2.5)


def test_downsampling_conserves_mass():
    snap, radii = _mass_grid()
    grid = deposit.deposit3d(snap, radii, MGAS, 8)
    assert deposit.downsample(grid).total() == pytest.approx(grid.total(), rel=1e-6)


def test_downsampled_temperature_equals_coarse_deposition():
    snap, radii = _mass_grid()
    fine = deposit.downsample(deposit.deposit3d(snap, radii, TEMPERATURE, 8))
    coarse = deposit.deposit3d(snap, radii, TEMPERATURE, 4)
    weighted = coarse.planes[1] > 1e-6 * coarse.planes[1].max()
    np.testing.assert_allclose(fine.values[weighted], coarse.values[weighted], rtol=1e-5)
    assert weighted.sum() > 32


def test_ratio_without_planes_raises_MissingMassGrid():
    ratio = grids.ScalarGrid(np.ones((4, 4, 4)), 10.0, 0.0, fields.FieldId.MGFE)
    with pytest.raises(errors.MissingMassGrid):
        deposit.downsample(ratio)


def test_indivisible_size_raises_NotDivisible():
    grid = grids.ScalarGrid(np.ones((6, 6, 6)), 10.0, 0.0, fields.FieldId.MGAS)
    with pytest.raises(errors.NotDivisible):
        deposit.downsample(grid, 4)


def test_maps_stack_into_channels():
    maps = [grids.ScalarGrid(np.full((4, 4), float(i)), 10.0, 0.0, field) for i, field in enumerate(fields.FieldId)]
    stacked = deposit.stack_maps(maps[:3])
    assert stacked.shape == (3, 4, 4)
    assert stacked[2, 0, 0] == 2.0


def test_stacking_mixed_sizes_raises_ShapeMismatch():
    small = grids.ScalarGrid(np.ones((4, 4)), 10.0, 0.0, fields.FieldId.MGAS)
    large = grids.ScalarGrid(np.ones((8, 8)), 10.0, 0.0, fields.FieldId.T)
    with pytest.raises(errors.ShapeMismatch):
        deposit.stack_maps([small, large])


def test_stacking_nothing_raises_EmptyInput():
    with pytest.raises(errors.EmptyInput):
        deposit.stack_maps([])
