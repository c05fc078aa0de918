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
"""Scalar maps and grids, and the CMD-GRID v1 container they are stored in."""
from __future__ import annotations

import logging
import os
import struct
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import errors
from pymfd import fields
from pymfd import params as params_
from pymfd import snapshot

__all__ = [
    "KPC_PER_MPC",
    "ScalarGrid",
    "GridFileHeader",
    "write_grid_file",
    "read_grid_header",
    "read_grid_record",
    "read_grid_file",
]

_LOGGER = logging.getLogger(__name__)

MAGIC = b"CMDGRID1"
VERSION = 1
KPC_PER_MPC = 1000.0

_HEADER = struct.Struct("<8sIBIIddI")
_RECORD_PARAMS = struct.Struct("<6d")

FloatArray = npt.NDArray[np.float64]
PathLike = t.Union[str, "os.PathLike[str]"]


class ScalarGrid:
    """
    A square 2D map or cubic 3D grid of one field.

    ``values`` is float32, row-major with the last axis fastest. Deposited grids keep their
    float64 accumulators in ``planes`` (as densities per unit cell measure): the density of an
    extensive field, or the numerator and denominator of a weighted one. Planes are never
    written to disk.
    """

    __slots__ = ("values", "box_size", "redshift", "field_id", "params", "empty_cells", "planes")

    def __init__(
        self,
        values: npt.ArrayLike,
        box_size: float,
        redshift: float,
        field_id: fields.FieldId,
        params: t.Optional[params_.ParameterVector] = None,
        empty_cells: int = 0,
        planes: t.Optional[t.Tuple[FloatArray, ...]] = None,
    ) -> None:
        self.values: npt.NDArray[np.float32] = np.ascontiguousarray(values, dtype=np.float32)
        self.box_size = float(box_size)
        self.redshift = float(redshift)
        self.field_id = fields.FieldId(field_id)
        self.params = params
        self.empty_cells = empty_cells
        self.planes = planes

        if self.values.ndim not in (2, 3) or len(set(self.values.shape)) != 1:
            raise errors.ShapeMismatch(f"grids must be square or cubic, got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise errors.InvariantViolation(f"non-finite values in {self.spec.prefix} grid")

    def __repr__(self) -> str:
        shape = "x".join(str(s) for s in self.values.shape)
        return f"ScalarGrid({self.spec.prefix}, {shape}, box={self.box_size}, z={self.redshift})"

    @property
    def spec(self) -> fields.FieldSpec:
        return fields.field_spec(self.field_id)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def dimensionality(self) -> int:
        return int(self.values.ndim)

    @property
    def units(self) -> str:
        return self.spec.units_for(self.dimensionality)

    @property
    def cell_size(self) -> float:
        """Cell edge in h^-1 Mpc."""
        return self.box_size / self.n

    @property
    def cell_measure(self) -> float:
        """Pixel area or voxel volume in (h^-1 kpc)^d, the denominator of density units."""
        return float((KPC_PER_MPC * self.cell_size) ** self.dimensionality)

    def total(self) -> float:
        """Sum of values times cell measure: the deposited quantity of an extensive field."""
        if self.planes is not None and self.spec.mode.is_extensive:
            return float(np.sum(self.planes[0]) * self.cell_measure)
        return float(np.sum(self.values, dtype=np.float64) * self.cell_measure)


class GridFileHeader(t.NamedTuple):
    dimensionality: int
    field_id: fields.FieldId
    n: int
    box_size: float
    redshift: float
    n_records: int

    @property
    def record_payload_bytes(self) -> int:
        return int(self.n**self.dimensionality * 4)

    @property
    def record_bytes(self) -> int:
        return _RECORD_PARAMS.size + self.record_payload_bytes

    @property
    def total_bytes(self) -> int:
        return _HEADER.size + self.n_records * self.record_bytes

    def record_offset(self, index: int) -> int:
        return _HEADER.size + index * self.record_bytes


def write_grid_file(path: PathLike, grids: t.Sequence[ScalarGrid]) -> GridFileHeader:
    """Write one or more records of the same field, size and redshift to a CMD-GRID file."""
    if not grids:
        raise errors.EmptyInput("No grids to write")
    first = grids[0]
    for grid in grids[1:]:
        same = (grid.values.shape, grid.field_id, grid.box_size, grid.redshift) == (
            first.values.shape,
            first.field_id,
            first.box_size,
            first.redshift,
        )
        if not same:
            raise errors.ShapeMismatch(f"{grid!r} cannot share a file with {first!r}")

    header = GridFileHeader(first.dimensionality, first.field_id, first.n, first.box_size, first.redshift, len(grids))
    try:
        with open(path, "wb") as fp:
            fp.write(
                _HEADER.pack(
                    MAGIC,
                    VERSION,
                    header.dimensionality,
                    int(header.field_id),
                    header.n,
                    header.box_size,
                    header.redshift,
                    header.n_records,
                )
            )
            for grid in grids:
                record = grid.params.to_record() if grid.params is not None else np.full(6, np.nan)
                fp.write(_RECORD_PARAMS.pack(*record))
                fp.write(grid.values.astype("<f4", copy=False).tobytes())
    except OSError as ex:
        raise errors.IoFailure(f"Could not write grid file {os.fspath(path)!r}: {ex}") from ex

    _LOGGER.debug("wrote %d %s record(s) to %s", len(grids), first.spec.prefix, os.fspath(path))
    return header


def read_grid_header(path: PathLike) -> GridFileHeader:
    try:
        with open(path, "rb") as fp:
            raw = fp.read(_HEADER.size)
        size = os.path.getsize(path)
    except OSError as ex:
        raise errors.IoFailure(f"Could not read grid file {os.fspath(path)!r}: {ex}") from ex

    found = raw[: len(MAGIC)]
    if found != MAGIC:
        hint = "this is a CMD-SNAP particle snapshot, not a grid file" if found == snapshot.MAGIC else None
        raise errors.MagicMismatch(MAGIC, found, hint)
    if len(raw) < _HEADER.size:
        raise errors.TruncatedFile("grid header", _HEADER.size, len(raw))

    _, version, dimensionality, field_id, n, box_size, redshift, n_records = _HEADER.unpack(raw)
    if version != VERSION:
        raise errors.DataError(f"Unsupported CMD-GRID version {version}")
    if dimensionality not in (2, 3):
        raise errors.DataError(f"Invalid dimensionality {dimensionality}")

    header = GridFileHeader(dimensionality, fields.field_spec(field_id).field_id, n, box_size, redshift, n_records)
    if size < header.total_bytes:
        raise errors.TruncatedFile("grid records", header.total_bytes, size)
    return header


def _suite_beside(path: PathLike) -> t.Optional[params_.Suite]:
    labels = os.path.join(os.path.dirname(os.fspath(path)), params_.LABELS_NAME)
    try:
        return params_.labels_suite(labels)
    except errors.PymfdError as ex:
        _LOGGER.warning("ignoring unreadable label file %s: %s", labels, ex)
        return None


def read_grid_record(path: PathLike, index: int, suite: t.Optional[params_.Suite] = None) -> ScalarGrid:
    """
    Read one record. The suite of its label comes from ``suite`` or, when that is not given,
    from the label file written next to the grid file.
    """
    header = read_grid_header(path)
    if not 0 <= index < header.n_records:
        raise errors.RecordOutOfRange(index, header.n_records)

    with open(path, "rb") as fp:
        fp.seek(header.record_offset(index))
        record = _RECORD_PARAMS.unpack(fp.read(_RECORD_PARAMS.size))
        payload = np.frombuffer(fp.read(header.record_payload_bytes), dtype="<f4")

    label = params_.ParameterVector.from_record(record, suite or _suite_beside(path))
    values = payload.reshape((header.n,) * header.dimensionality)
    return ScalarGrid(values, header.box_size, header.redshift, header.field_id, label)


def read_grid_file(path: PathLike, suite: t.Optional[params_.Suite] = None) -> t.List[ScalarGrid]:
    header = read_grid_header(path)
    suite = suite or _suite_beside(path)
    return [read_grid_record(path, i, suite) for i in range(header.n_records)]
