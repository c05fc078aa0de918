# -*- coding: utf-8 -*-
# Copyright (c) 2026-present pymfd contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
"""
Particle to field deposition.

3D grids use the exact overlap of each uniform-sphere kernel with every voxel it touches; 2D
maps select the particles of a slab by their centre and spread each projected kernel over a
fixed set of tracers. Work is split into fixed particle chunks whose partial sums are reduced
in chunk order, so results do not depend on the number of worker threads.
"""
from __future__ import annotations

import concurrent.futures
import logging
import os
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import errors
from pymfd import fields
from pymfd import kernels
from pymfd.grids import KPC_PER_MPC
from pymfd.grids import ScalarGrid
from pymfd.params import ParameterVector
from pymfd.snapshot import Kind
from pymfd.snapshot import Snapshot
from pymfd.spatial import SmoothingRadii

__all__ = [
    "AXES",
    "DEFAULT_CHUNK",
    "SlicePlan",
    "slice_plan_default",
    "deposit3d",
    "deposit2d",
    "bulk_velocity3d",
    "extract_map",
    "downsample",
    "stack_maps",
]

_LOGGER = logging.getLogger(__name__)

AXES = ("x", "y", "z")
DEFAULT_CHUNK = 2048
STANDARD_GRID_SIZES = (128, 256, 512)
STANDARD_MAP_SIZE = 256

# upper bound on corner evaluations per batched overlap call
_CORNER_BUDGET = 1 << 21
_TRACER_BUDGET = 1 << 20

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
RadiiLike = t.Union[t.Mapping[Kind, SmoothingRadii], t.Iterable[SmoothingRadii]]
ChunkResult = t.Tuple[IntArray, FloatArray]


def _axis_index(axis: t.Union[str, int]) -> int:
    if isinstance(axis, str):
        try:
            return AXES.index(axis.lower())
        except ValueError:
            raise ValueError(f"unknown axis {axis!r}") from None
    if axis not in (0, 1, 2):
        raise ValueError(f"unknown axis {axis!r}")
    return int(axis)


class SlicePlan(t.NamedTuple):
    """A slab ``[offset, offset + thickness)`` along ``axis``, projected onto the other two axes."""

    axis: str
    offset: float
    thickness: float

    def __str__(self) -> str:
        return f"{self.axis}:{self.offset:g}:{self.thickness:g}"

    @property
    def plane(self) -> t.Tuple[int, int]:
        a = _axis_index(self.axis)
        i, j = (k for k in range(3) if k != a)
        return i, j

    def validate(self, box_size: float) -> None:
        _axis_index(self.axis)
        if not 0 < self.thickness <= box_size:
            raise ValueError(f"slab thickness {self.thickness} must lie in (0, {box_size}]")
        if not 0 <= self.offset < box_size:
            raise ValueError(f"slab offset {self.offset} must lie in [0, {box_size})")


def slice_plan_default(box_size: float, n_slices: int = 5) -> t.List[SlicePlan]:
    """Non-overlapping slabs of ``box_size / n_slices`` along z, then y, then x."""
    thickness = box_size / n_slices
    return [SlicePlan(axis, k * thickness, thickness) for axis in ("z", "y", "x") for k in range(n_slices)]


class _Streams(t.NamedTuple):
    # positions in cell units, radii in cell units, and one row per accumulated quantity
    centres: FloatArray
    radii: FloatArray
    values: FloatArray

    @property
    def count(self) -> int:
        return int(self.radii.shape[0])

    def take(self, selection: t.Union[slice, IntArray, npt.NDArray[np.bool_]]) -> _Streams:
        return _Streams(self.centres[selection], self.radii[selection], self.values[:, selection])


def _radii_by_kind(radii: RadiiLike) -> t.Dict[Kind, SmoothingRadii]:
    if isinstance(radii, t.Mapping):
        return dict(radii)
    return {r.kind: r for r in radii}


def _kernel_radii(snapshot: Snapshot, radii: t.Mapping[Kind, SmoothingRadii], kind: Kind) -> FloatArray:
    particle_set = snapshot.get(kind)
    assert particle_set is not None
    found = radii.get(kind)
    if found is None:
        # stars and black holes are point masses whether or not radii were computed for them
        if kind in (Kind.STAR, Kind.BLACK_HOLE):
            return np.zeros(particle_set.count)
        raise errors.MissingRadii(kind.tag)
    if found.radii.shape != (particle_set.count,):
        raise errors.ShapeMismatch(
            f"{kind.tag} has {particle_set.count} particles but {found.radii.shape[0]} smoothing radii"
        )
    return found.radii


def _collect(
    snapshot: Snapshot,
    radii: RadiiLike,
    contributions: t.Sequence[t.Tuple[Kind, t.Sequence[FloatArray]]],
) -> t.Tuple[FloatArray, FloatArray, FloatArray]:
    """Concatenated positions, kernel radii and value rows of every contributing species."""
    by_kind = _radii_by_kind(radii)
    positions, kernel_radii, values = [], [], []
    for kind, streams in contributions:
        particle_set = snapshot.get(kind)
        assert particle_set is not None
        positions.append(particle_set.positions)
        kernel_radii.append(_kernel_radii(snapshot, by_kind, kind))
        values.append(np.stack(streams))
    return (
        np.concatenate(positions),
        np.concatenate(kernel_radii),
        np.concatenate(values, axis=1),
    )


def _field_streams(snapshot: Snapshot, spec: fields.FieldSpec) -> t.List[t.Tuple[Kind, t.List[FloatArray]]]:
    streams = []
    for c in fields.contributions(spec, snapshot.species):
        streams.append((c.kind, [c.numerator] if c.weight is None else [c.numerator, c.weight]))
    return streams


def _reduce_cells(cells: t.List[IntArray], weights: t.List[FloatArray], n_streams: int) -> ChunkResult:
    if not cells:
        return np.zeros(0, dtype=np.int64), np.zeros((n_streams, 0))
    flat = np.concatenate(cells)
    stacked = np.concatenate(weights, axis=1)
    unique, inverse = np.unique(flat, return_inverse=True)
    inverse = inverse.reshape(-1)
    sums = np.stack([np.bincount(inverse, weights=w, minlength=len(unique)) for w in stacked])
    return unique, sums


def _sphere_chunk(streams: _Streams, n: int) -> ChunkResult:
    """Overlap-weighted contributions of a block of sphere kernels to a periodic ``n^3`` grid."""
    cells: t.List[IntArray] = []
    weights: t.List[FloatArray] = []
    n_streams = streams.values.shape[0]

    points = np.flatnonzero(streams.radii <= 0.0)
    if len(points):
        index = np.floor(streams.centres[points]).astype(np.int64) % n
        cells.append((index[:, 0] * n + index[:, 1]) * n + index[:, 2])
        weights.append(streams.values[:, points])

    spheres = np.flatnonzero(streams.radii > 0.0)
    if len(spheres):
        centres = streams.centres[spheres]
        radii = streams.radii[spheres]
        low = np.floor(centres - radii[:, None]).astype(np.int64)
        high = np.floor(centres + radii[:, None]).astype(np.int64)
        spans = (high - low + 1).max(axis=1)

        for span in np.unique(spans):
            m = int(span)
            group = np.flatnonzero(spans == m)
            batch = max(1, _CORNER_BUDGET // (m + 1) ** 3)
            steps = np.arange(m + 1)
            for start in range(0, len(group), batch):
                members = group[start : start + batch]
                origin = low[members]
                nodes = (origin[:, :, None] + steps - centres[members][:, :, None]) / radii[members][:, None, None]
                fractions = kernels.sphere_grid_fractions(nodes[:, 0], nodes[:, 1], nodes[:, 2])
                # every row spans its whole ball and sums to one
                fractions /= fractions.sum(axis=(1, 2, 3), keepdims=True)

                index = (origin[:, :, None] + steps[:-1]) % n
                flat = (index[:, 0, :, None, None] * n + index[:, 1, None, :, None]) * n + index[:, 2, None, None, :]
                cells.append(flat.reshape(-1))
                per_particle = streams.values[:, spheres[members]]
                weights.append((per_particle[:, :, None] * fractions.reshape(len(members), -1)).reshape(n_streams, -1))

    return _reduce_cells(cells, weights, n_streams)


def _tracer_chunk(streams: _Streams, n: int, offsets: FloatArray, tracer_weights: FloatArray) -> ChunkResult:
    """Tracer contributions of a block of projected kernels to a periodic ``n^2`` map."""
    cells: t.List[IntArray] = []
    weights: t.List[FloatArray] = []
    n_streams = streams.values.shape[0]

    points = np.flatnonzero(streams.radii <= 0.0)
    if len(points):
        index = np.floor(streams.centres[points]).astype(np.int64) % n
        cells.append(index[:, 0] * n + index[:, 1])
        weights.append(streams.values[:, points])

    disks = np.flatnonzero(streams.radii > 0.0)
    if len(disks):
        tracers = streams.centres[disks][:, None, :] + streams.radii[disks][:, None, None] * offsets[None]
        index = np.floor(tracers).astype(np.int64) % n
        cells.append((index[..., 0] * n + index[..., 1]).reshape(-1))
        per_particle = streams.values[:, disks]
        weights.append((per_particle[:, :, None] * tracer_weights).reshape(n_streams, -1))

    return _reduce_cells(cells, weights, n_streams)


def _accumulate(
    chunk: t.Callable[[_Streams], ChunkResult],
    streams: _Streams,
    size: int,
    threads: t.Optional[int],
    chunk_size: int,
) -> FloatArray:
    """Run ``chunk`` over fixed particle ranges and sum the results into dense planes in range order."""
    planes = np.zeros((streams.values.shape[0], size))
    starts = range(0, streams.count, chunk_size)
    workers = threads or os.cpu_count() or 1

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(lambda s: chunk(streams.take(slice(s, s + chunk_size))), starts)
        for number, (cells, sums) in enumerate(results):
            planes[:, cells] += sums
            _LOGGER.debug("reduced chunk %d/%d (%d cells)", number + 1, len(starts), len(cells))
    return planes


def _finish(
    planes: FloatArray,
    spec: fields.FieldSpec,
    shape: t.Tuple[int, ...],
    box_size: float,
    redshift: float,
    params: t.Optional[ParameterVector],
) -> ScalarGrid:
    n = shape[0]
    measure = (KPC_PER_MPC * box_size / n) ** len(shape)
    if spec.mode.is_extensive:
        density = planes[0].reshape(shape) / measure
        return ScalarGrid(density, box_size, redshift, spec.field_id, params, planes=(density,))

    numerator, denominator = (p.reshape(shape) / measure for p in planes)
    empty = denominator <= 0.0
    values = np.divide(numerator, denominator, out=np.zeros(shape), where=~empty)
    empty_cells = int(empty.sum())
    if empty_cells:
        _LOGGER.info("%s: %d of %d cells have no contributing weight", spec.prefix, empty_cells, empty.size)
    return ScalarGrid(values, box_size, redshift, spec.field_id, params, empty_cells, (numerator, denominator))


def _warn_unusual_size(n: int, standard_sizes: t.Tuple[int, ...], what: str) -> None:
    if n not in standard_sizes:
        _LOGGER.warning("%s size %d is not one of %s", what, n, ", ".join(str(s) for s in standard_sizes))


def deposit3d(
    snapshot: Snapshot,
    radii: RadiiLike,
    spec: fields.FieldSpec,
    n: int,
    *,
    params: t.Optional[ParameterVector] = None,
    threads: t.Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> ScalarGrid:
    """
    Deposit a field on a periodic ``n^3`` grid.

    Each particle contributes its quantity times the exact fraction of its sphere inside each
    voxel; zero-radius particles fall in the voxel holding their centre. Extensive fields are
    divided by the voxel volume in (h^-1 kpc)^3, weighted fields by their accumulated weight.

    Args:
        snapshot (:obj:`~pymfd.snapshot.Snapshot`): Particles to deposit.
        radii: Smoothing radii of every species the field needs, keyed by kind or as a sequence.
        spec (:obj:`~pymfd.fields.FieldSpec`): Field to deposit.
        n (:obj:`int`): Voxels per axis.

    Returns:
        :obj:`~pymfd.grids.ScalarGrid`: The deposited grid; weighted fields keep their
        numerator and denominator planes.
    """
    if n < 1:
        raise ValueError("grid size must be at least 1")
    _warn_unusual_size(n, STANDARD_GRID_SIZES, "grid")

    box_size = snapshot.header.box_size
    cell = box_size / n
    positions, kernel_radii, values = _collect(snapshot, radii, _field_streams(snapshot, spec))
    streams = _Streams(positions / cell, kernel_radii / cell, values)
    _LOGGER.debug("depositing %s from %d particles on %d^3 voxels", spec.prefix, streams.count, n)

    planes = _accumulate(lambda s: _sphere_chunk(s, n), streams, n**3, threads, chunk_size)
    return _finish(planes, spec, (n, n, n), box_size, snapshot.header.redshift, params)


def bulk_velocity3d(
    snapshot: Snapshot,
    radii: RadiiLike,
    n: int,
    kind: Kind = Kind.GAS,
    *,
    params: t.Optional[ParameterVector] = None,
    threads: t.Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> ScalarGrid:
    """
    Modulus of the mass-weighted mean velocity vector per voxel, ``|sum m v f| / sum m f``.

    Unlike the catalogued velocity fields, opposite motions inside a voxel cancel here. The
    grid is tagged with the velocity field of ``kind`` for its units.
    """
    spec = fields.field_spec(fields.FieldId.VCDM if kind == Kind.DARK_MATTER else fields.FieldId.VGAS)
    particle_set = snapshot.get(kind)
    if particle_set is None:
        raise errors.MissingProperty(fields.VELOCITY, kind.tag, spec.prefix)
    if n < 1:
        raise ValueError("grid size must be at least 1")

    box_size = snapshot.header.box_size
    masses = particle_set.masses
    momentum = [masses * particle_set.velocities[:, axis] for axis in range(3)]
    cell = box_size / n
    positions, kernel_radii, values = _collect(snapshot, radii, [(kind, [*momentum, masses])])
    streams = _Streams(positions / cell, kernel_radii / cell, values)
    planes = _accumulate(lambda s: _sphere_chunk(s, n), streams, n**3, threads, chunk_size)

    speed = np.sqrt(np.sum(planes[:3] ** 2, axis=0))
    collapsed = np.stack([speed, planes[3]])
    return _finish(collapsed, spec, (n, n, n), box_size, snapshot.header.redshift, params)


def deposit2d(
    snapshot: Snapshot,
    radii: RadiiLike,
    spec: fields.FieldSpec,
    plan: SlicePlan,
    n: int = STANDARD_MAP_SIZE,
    mode: kernels.Kernel2DMode = kernels.Kernel2DMode.UNIFORM_DISK,
    n_tracers: int = 1000,
    *,
    params: t.Optional[ParameterVector] = None,
    threads: t.Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> ScalarGrid:
    """
    Project the particles of one slab onto an ``n^2`` map.

    A particle belongs to the slab when its centre lies in ``[offset, offset + thickness)``
    along the projection axis, wrapping periodically; its whole projected kernel is then
    deposited, also wrapping across the in-plane box faces. The first in-plane axis is the
    map's row axis.
    """
    if n < 1:
        raise ValueError("map size must be at least 1")
    box_size = snapshot.header.box_size
    plan.validate(box_size)
    _warn_unusual_size(n, (STANDARD_MAP_SIZE,), "map")

    positions, kernel_radii, values = _collect(snapshot, radii, _field_streams(snapshot, spec))
    depth = np.mod(positions[:, _axis_index(plan.axis)] - plan.offset, box_size)
    inside = depth < plan.thickness
    cell = box_size / n
    streams = _Streams(positions[inside][:, list(plan.plane)] / cell, kernel_radii[inside] / cell, values[:, inside])
    _LOGGER.debug("slab %s holds %d of %d particles", plan, streams.count, len(inside))

    offsets = kernels.tracer_points(n_tracers)
    tracer_weights = kernels.tracer_weights(n_tracers, mode)
    chunk_size = min(chunk_size, max(1, _TRACER_BUDGET // n_tracers))
    planes = _accumulate(lambda s: _tracer_chunk(s, n, offsets, tracer_weights), streams, n * n, threads, chunk_size)
    return _finish(planes, spec, (n, n), box_size, snapshot.header.redshift, params)


def _weighting_planes(
    grid: ScalarGrid, mass_grid: t.Optional[ScalarGrid]
) -> t.Tuple[FloatArray, FloatArray]:
    """Numerator and denominator densities behind a weighted grid."""
    spec = grid.spec
    if mass_grid is not None and spec.mode is fields.Mode.MASS_WEIGHTED:
        if mass_grid.values.shape != grid.values.shape:
            raise errors.ShapeMismatch(f"mass grid {mass_grid!r} does not match {grid!r}")
        if not mass_grid.spec.mode.is_extensive:
            raise errors.ShapeMismatch(f"{mass_grid!r} is not an extensive grid")
        mass = mass_grid.values.astype(np.float64)
        return grid.values.astype(np.float64) * mass, mass
    if grid.planes is not None:
        numerator, denominator = grid.planes
        return numerator, denominator
    raise errors.MissingMassGrid(spec.prefix)


def _divide(numerator: FloatArray, denominator: FloatArray) -> t.Tuple[FloatArray, int]:
    empty = denominator <= 0.0
    return np.divide(numerator, denominator, out=np.zeros(numerator.shape), where=~empty), int(empty.sum())


def extract_map(
    grid: ScalarGrid,
    axis: t.Union[str, int],
    voxel_start: int,
    voxel_count: int,
    mass_grid: t.Optional[ScalarGrid] = None,
) -> ScalarGrid:
    """
    Project ``voxel_count`` planes of a 3D grid, starting at ``voxel_start`` and wrapping
    periodically, onto a 2D map.

    Extensive grids become surface densities (the slab column times the voxel edge in
    h^-1 kpc); mass-weighted grids are averaged with the weights of ``mass_grid``, or of
    their own retained planes when no mass grid is given.
    """
    if grid.dimensionality != 3:
        raise errors.ShapeMismatch(f"extract_map needs a 3D grid, got {grid!r}")
    if voxel_start < 0 or voxel_count < 1:
        raise ValueError("voxel_start must be non-negative and voxel_count positive")

    a = _axis_index(axis)
    planes = (voxel_start + np.arange(voxel_count)) % grid.n
    spec = grid.spec

    if spec.mode.is_extensive:
        column = np.take(grid.values.astype(np.float64), planes, axis=a).sum(axis=a)
        values = column * KPC_PER_MPC * grid.cell_size
        return ScalarGrid(values, grid.box_size, grid.redshift, grid.field_id, grid.params)

    numerator, denominator = (np.take(p, planes, axis=a).sum(axis=a) for p in _weighting_planes(grid, mass_grid))
    values, empty_cells = _divide(numerator, denominator)
    return ScalarGrid(values, grid.box_size, grid.redshift, grid.field_id, grid.params, empty_cells)


def _block_mean(values: FloatArray, factor: int) -> FloatArray:
    n = values.shape[0] // factor
    blocked = values.reshape(sum(((n, factor) for _ in values.shape), ()))
    return blocked.mean(axis=tuple(range(1, 2 * values.ndim, 2)))


def downsample(grid: ScalarGrid, factor: int = 2, mass_grid: t.Optional[ScalarGrid] = None) -> ScalarGrid:
    """
    Coarsen a grid by ``factor`` per axis.

    Extensive grids take the mean of each block, which conserves the total because coarse and
    fine cells share density units. Mass-weighted grids take the weighted mean of each block;
    pair ratios re-divide their summed numerator and denominator planes.
    """
    if factor < 1:
        raise ValueError("factor must be at least 1")
    if grid.n % factor:
        raise errors.NotDivisible(grid.n, factor)

    if grid.spec.mode.is_extensive:
        fine = grid.planes[0] if grid.planes is not None else grid.values.astype(np.float64)
        coarse = _block_mean(fine, factor)
        return ScalarGrid(coarse, grid.box_size, grid.redshift, grid.field_id, grid.params, planes=(coarse,))

    numerator, denominator = (_block_mean(p, factor) for p in _weighting_planes(grid, mass_grid))
    values, empty_cells = _divide(numerator, denominator)
    return ScalarGrid(
        values, grid.box_size, grid.redshift, grid.field_id, grid.params, empty_cells, (numerator, denominator)
    )


def stack_maps(maps: t.Sequence[ScalarGrid]) -> npt.NDArray[np.float32]:
    """Stack same-size 2D maps into a ``C x n x n`` multifield input, channels in argument order."""
    if not maps:
        raise errors.EmptyInput("No maps to stack")
    shape = maps[0].values.shape
    for m in maps:
        if m.dimensionality != 2 or m.values.shape != shape:
            raise errors.ShapeMismatch(f"cannot stack {m!r} with {maps[0]!r}")
    return np.stack([m.values for m in maps])
