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
"""End-to-end commands: dataset generation, image dumps and file summaries."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import deposit
from pymfd import errors
from pymfd import fields
from pymfd import grids
from pymfd import params
from pymfd import snapshot as snapshot_
from pymfd import spatial
from pymfd.config import RunConfig

__all__ = [
    "ManifestEntry",
    "Manifest",
    "load_snapshot",
    "resolve_params",
    "cmd_generate",
    "render_pgm",
    "cmd_render",
    "cmd_info",
]

_LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
LABELS_NAME = params.LABELS_NAME
# records per field file in the full dataset, for the storage projection
DATASET_MAPS_PER_FIELD = 15000
DATASET_GRIDS_PER_FIELD = 1000

_MB = 1024.0**2
_GB = 1024.0**3


class ManifestEntry(t.NamedTuple):
    path: str
    kind: str
    field: t.Optional[str]
    size: t.Optional[int]
    records: int
    bytes: int
    sha256: str


class Manifest(t.NamedTuple):
    """Everything one ``generate`` run wrote, with the resolved config that produced it."""

    output: str
    config_text: str
    params: params.ParameterVector
    snapshot: t.Dict[str, t.Any]
    entries: t.List[ManifestEntry]

    def to_json(self) -> str:
        document = {
            "config": self.config_text,
            "params": {"suite": self.params.suite.value, "values": list(self.params.values)},
            "snapshot": self.snapshot,
            "files": [entry._asdict() for entry in self.entries],
        }
        return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fp:
        for block in iter(lambda: fp.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def load_snapshot(config: RunConfig) -> snapshot_.Snapshot:
    if config.snapshot is not None:
        return snapshot_.read_snapshot(config.snapshot)
    _LOGGER.info("generating synthetic snapshot (seed %d)", config.synthetic_seed)
    return snapshot_.gen_synthetic(
        config.synthetic_seed,
        config.synthetic_box,
        config.synthetic_gas,
        config.synthetic_dm,
        config.synthetic_star,
        config.synthetic_clumps,
        n_bh=config.synthetic_bh,
        redshift=config.synthetic_redshift,
        with_magnetic=config.synthetic_magnetic,
    )


def resolve_params(config: RunConfig) -> params.ParameterVector:
    """The run's label: the configured values, or one latin-hypercube draw from ``seed``."""
    suite = config.suite_tag
    if config.params:
        vector = params.ParameterVector.from_values(suite, config.params)
    else:
        vector = params.sample_lhs(1, config.seed, suite)[0]
    params.validate(vector)
    return vector


def _requested_fields(config: RunConfig, snap: snapshot_.Snapshot) -> t.List[fields.FieldSpec]:
    if not config.fields:
        return fields.available_fields(snap.species)
    specs = config.field_specs()
    for spec in specs:
        # raises MissingProperty naming the field before any deposition starts
        fields.contributions(spec, snap.species)
    return specs


def _slice_plans(config: RunConfig, box_size: float) -> t.List[deposit.SlicePlan]:
    plans = list(config.slices) if config.slices is not None else deposit.slice_plan_default(box_size)
    for plan in plans:
        try:
            plan.validate(box_size)
        except ValueError as ex:
            raise errors.UsageError(f"slice {plan}: {ex}") from None
    return plans


class _Writer:
    __slots__ = ("root", "entries")

    def __init__(self, root: str) -> None:
        self.root = root
        self.entries: t.List[ManifestEntry] = []

    def grids(self, name: str, kind: str, records: t.Sequence[grids.ScalarGrid]) -> None:
        path = os.path.join(self.root, name)
        grids.write_grid_file(path, records)
        first = records[0]
        self.add(name, kind, first.spec.prefix, first.n, len(records))

    def add(self, name: str, kind: str, field: t.Optional[str], size: t.Optional[int], records: int) -> None:
        path = os.path.join(self.root, name)
        entry = ManifestEntry(name, kind, field, size, records, os.path.getsize(path), _sha256(path))
        self.entries.append(entry)
        _LOGGER.info("wrote %s (%d bytes)", path, entry.bytes)


def cmd_generate(config: RunConfig) -> Manifest:
    """
    Deposit every requested field at every grid size and on every slice, then write the label
    file and a manifest of checksums.
    """
    snap = load_snapshot(config)
    vector = resolve_params(config)
    specs = _requested_fields(config, snap)
    box_size = snap.header.box_size
    plans = _slice_plans(config, box_size)

    needed = {kind for spec in specs for kind in spec.species}
    if config.bulk_velocity:
        needed.add(snapshot_.Kind.GAS)
    radii = {
        s.kind: spatial.smoothing_radii(s, box_size, config.neighbours) for s in snap.species if s.kind in needed
    }

    try:
        os.makedirs(config.output, exist_ok=True)
    except OSError as ex:
        raise errors.IoFailure(f"Could not create output directory {config.output!r}: {ex}") from ex
    writer = _Writer(config.output)

    for spec in specs:
        for n in config.grid_sizes:
            grid = deposit.deposit3d(snap, radii, spec, n, params=vector, threads=config.threads)
            writer.grids(f"grid_{spec.prefix}_{n}.cmdgrid", "grid", [grid])

        maps = [
            deposit.deposit2d(
                snap,
                radii,
                spec,
                plan,
                config.map_size,
                config.kernel_mode,
                config.tracers,
                params=vector,
                threads=config.threads,
            )
            for plan in plans
        ]
        writer.grids(f"maps_{spec.prefix}.cmdgrid", "maps", maps)

    if config.bulk_velocity:
        for n in config.grid_sizes:
            grid = deposit.bulk_velocity3d(snap, radii, n, params=vector, threads=config.threads)
            writer.grids(f"bulk_velocity_{n}.cmdgrid", "bulk_velocity", [grid])

    params.write_labels(os.path.join(config.output, LABELS_NAME), [vector])
    writer.add(LABELS_NAME, "labels", None, None, 1)

    manifest = Manifest(
        config.output,
        config.to_text(),
        vector,
        {
            "box_size": box_size,
            "redshift": snap.header.redshift,
            "species": {s.kind.tag: s.count for s in snap.species},
        },
        writer.entries,
    )
    manifest_path = os.path.join(config.output, MANIFEST_NAME)
    try:
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(manifest.to_json())
    except OSError as ex:
        raise errors.IoFailure(f"Could not write manifest {manifest_path!r}: {ex}") from ex
    _LOGGER.info("wrote %d files to %s", len(writer.entries) + 1, config.output)
    return manifest


def render_pgm(values: npt.ArrayLike) -> bytes:
    """
    8-bit binary PGM of a 2D array, log-scaled between its 1st and 99th percentiles.

    Non-positive values are raised to the smallest positive value first; an array without
    spread renders black.
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 2:
        raise errors.ShapeMismatch(f"can only render 2D arrays, got shape {array.shape}")
    height, width = array.shape

    positive = array[array > 0]
    pixels = np.zeros(array.shape, dtype=np.uint8)
    if positive.size:
        logged = np.log10(np.maximum(array, positive.min()))
        low, high = np.percentile(logged, [1.0, 99.0])
        if high > low:
            scaled = np.clip((logged - low) / (high - low), 0.0, 1.0)
            pixels = np.rint(scaled * 255.0).astype(np.uint8)

    return f"P5 {width} {height} 255\n".encode("ascii") + pixels.tobytes()


def cmd_render(
    path: str,
    out: str,
    record: int = 0,
    axis: str = "z",
    voxel_start: t.Optional[int] = None,
    voxel_count: int = 1,
) -> t.Tuple[int, int]:
    """
    Write one record of a CMD-GRID file as a PGM image. 3D records need a slab, whose voxels
    are averaged along ``axis``.

    Returns:
        ``(height, width)`` of the image.
    """
    grid = grids.read_grid_record(path, record)
    values = grid.values.astype(np.float64)
    if grid.dimensionality == 3:
        if voxel_start is None:
            raise errors.UsageError("rendering a 3D grid needs a slab (axis, start voxel, voxel count)")
        if voxel_start < 0 or voxel_count < 1:
            raise errors.UsageError("the slab needs a non-negative start and a positive voxel count")
        a = deposit.AXES.index(axis)
        planes = (voxel_start + np.arange(voxel_count)) % grid.n
        values = np.take(values, planes, axis=a).mean(axis=a)

    image = render_pgm(values)
    try:
        with open(out, "wb") as fp:
            fp.write(image)
    except OSError as ex:
        raise errors.IoFailure(f"Could not write image {out!r}: {ex}") from ex
    _LOGGER.info("rendered record %d of %s to %s", record, path, out)
    return values.shape[0], values.shape[1]


def _bytes(count: float) -> str:
    if count >= _GB:
        return f"{count:,.0f} bytes ({count / _GB:.2f} GB)"
    return f"{count:,.0f} bytes ({count / _MB:.2f} MB)"


def cmd_info(path: str) -> str:
    """Human-readable summary of a CMD-GRID file, with the storage arithmetic of its records."""
    header = grids.read_grid_header(path)
    spec = fields.field_spec(header.field_id)
    shape = " x ".join([str(header.n)] * header.dimensionality)
    per_field = DATASET_MAPS_PER_FIELD if header.dimensionality == 2 else DATASET_GRIDS_PER_FIELD
    noun = "maps" if header.dimensionality == 2 else "grids"

    lines = [
        f"format: CMD-GRID v{grids.VERSION}",
        f"field: {spec.prefix} ({spec.name}) [{spec.units_for(header.dimensionality)}]",
        f"dimensionality: {header.dimensionality}",
        f"size: {shape}",
        f"box size: {header.box_size:g} h^-1 Mpc",
        f"redshift: {header.redshift:g}",
        f"records: {header.n_records}",
        f"payload per record: {_bytes(header.record_payload_bytes)}",
        f"record size: {header.record_bytes:,} bytes",
        f"file size: {header.total_bytes:,} bytes",
        f"full dataset ({per_field:,} {noun} per field): {_bytes(header.record_payload_bytes * per_field)}",
    ]
    return "\n".join(lines)
