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
Particle data model, the CMD-SNAP v1 binary snapshot format and a synthetic snapshot generator.

Lengths are h^-1 Mpc, masses h^-1 Msun and velocities km/s. Arrays are held as float64 in
memory and stored as little-endian float32 on disk.
"""
from __future__ import annotations

import enum
import logging
import os
import struct
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import errors

__all__ = [
    "Kind",
    "GAS_PROPERTIES",
    "SnapshotHeader",
    "ParticleSet",
    "Snapshot",
    "read_snapshot",
    "write_snapshot",
    "gen_synthetic",
]

_LOGGER = logging.getLogger(__name__)

MAGIC = b"CMDSNAP1"
VERSION = 1
PROPERTY_NAME_SIZE = 16

_HEADER = struct.Struct("<8sIddI")
_SPECIES_HEADER = struct.Struct("<BQI")

FloatArray = npt.NDArray[np.float64]
PathLike = t.Union[str, "os.PathLike[str]"]


class Kind(enum.IntEnum):
    GAS = 0
    DARK_MATTER = 1
    STAR = 2
    BLACK_HOLE = 3

    @property
    def tag(self) -> str:
        return self.name.lower()

    @classmethod
    def from_tag(cls, tag: str) -> Kind:
        try:
            return cls[tag.upper()]
        except KeyError:
            raise ValueError(f"Unknown species tag {tag!r}") from None


GAS_PROPERTIES = (
    "temperature",
    "pressure",
    "metallicity",
    "hi_mass",
    "electron_count",
    "b_modulus",
    "mg_mass",
    "fe_mass",
)
# Element masses bounded by the particle mass
_MASS_LIKE_PROPERTIES = ("hi_mass", "mg_mass", "fe_mass")


class SnapshotHeader(t.NamedTuple):
    box_size: float
    redshift: float
    species_count: int

    def validate(self) -> None:
        if not self.box_size > 0:
            raise errors.InvariantViolation(f"box_size must be positive, got {self.box_size!r}")
        if not self.redshift >= 0:
            raise errors.InvariantViolation(f"redshift must be non-negative, got {self.redshift!r}")
        if self.species_count < 1:
            raise errors.InvariantViolation(f"species_count must be at least 1, got {self.species_count}")


class ParticleSet:
    """All particles of one species in one snapshot."""

    __slots__ = ("kind", "positions", "velocities", "masses", "properties")

    def __init__(
        self,
        kind: Kind,
        positions: npt.ArrayLike,
        velocities: npt.ArrayLike,
        masses: npt.ArrayLike,
        properties: t.Optional[t.Mapping[str, npt.ArrayLike]] = None,
    ) -> None:
        self.kind: Kind = Kind(kind)
        self.positions: FloatArray = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
        self.velocities: FloatArray = np.asarray(velocities, dtype=np.float64).reshape(-1, 3)
        self.masses: FloatArray = np.asarray(masses, dtype=np.float64).reshape(-1)
        self.properties: t.Dict[str, FloatArray] = {
            name: np.asarray(values, dtype=np.float64).reshape(-1) for name, values in (properties or {}).items()
        }

    def __repr__(self) -> str:
        return f"ParticleSet(kind={self.kind.tag}, count={self.count}, properties={list(self.properties)})"

    @property
    def count(self) -> int:
        return int(self.masses.shape[0])

    def validate(self, box_size: float) -> None:
        species = self.kind.tag
        n = self.count

        if self.positions.shape != (n, 3) or self.velocities.shape != (n, 3):
            raise errors.InvariantViolation("positions and velocities must be count x 3 arrays", species)

        outside = ~((self.positions >= 0.0) & (self.positions < box_size)).all(axis=1)
        if outside.any():
            raise errors.InvariantViolation(
                f"position outside [0, {box_size})", species, int(np.flatnonzero(outside)[0])
            )

        bad_mass = ~(self.masses > 0.0)
        if bad_mass.any():
            raise errors.InvariantViolation("mass must be strictly positive", species, int(np.flatnonzero(bad_mass)[0]))

        for name, values in self.properties.items():
            if len(name.encode("ascii")) > PROPERTY_NAME_SIZE:
                raise errors.InvariantViolation(f"property name {name!r} longer than {PROPERTY_NAME_SIZE} bytes")
            if values.shape != (n,):
                raise errors.InvariantViolation(
                    f"property {name!r} has length {values.shape[0]}, expected {n}", species
                )
            if name in _MASS_LIKE_PROPERTIES:
                bad = ~(values >= 0.0)
                if bad.any():
                    raise errors.InvariantViolation(
                        f"{name} must be non-negative", species, int(np.flatnonzero(bad)[0])
                    )

        if "hi_mass" in self.properties:
            bad = self.properties["hi_mass"] > self.masses
            if bad.any():
                raise errors.InvariantViolation("hi_mass exceeds particle mass", species, int(np.flatnonzero(bad)[0]))


class Snapshot(t.NamedTuple):
    header: SnapshotHeader
    species: t.List[ParticleSet]

    def get(self, kind: Kind) -> t.Optional[ParticleSet]:
        for particle_set in self.species:
            if particle_set.kind == kind:
                return particle_set
        return None

    def validate(self) -> None:
        self.header.validate()
        if self.header.species_count != len(self.species):
            raise errors.InvariantViolation(
                f"header declares {self.header.species_count} species but {len(self.species)} were given"
            )
        seen: t.Set[Kind] = set()
        for particle_set in self.species:
            if particle_set.kind in seen:
                raise errors.InvariantViolation("duplicate species", particle_set.kind.tag)
            seen.add(particle_set.kind)
            particle_set.validate(self.header.box_size)


def _as_float32(values: FloatArray) -> npt.NDArray[np.float32]:
    return np.ascontiguousarray(values, dtype="<f4")


def write_snapshot(header: SnapshotHeader, species: t.Sequence[ParticleSet], path: PathLike) -> None:
    """
    Write a snapshot in CMD-SNAP v1 format.

    Identical inputs always produce identical bytes: properties are written in mapping order and
    no timestamps or padding are emitted.
    """
    snapshot = Snapshot(header, list(species))
    snapshot.validate()

    chunks: t.List[bytes] = [_HEADER.pack(MAGIC, VERSION, header.box_size, header.redshift, len(species))]
    for particle_set in species:
        positions32 = _as_float32(particle_set.positions)
        # float32 rounding must not push a coordinate onto the upper box face
        if (positions32.astype(np.float64) >= header.box_size).any():
            raise errors.InvariantViolation("position rounds to box_size in float32", particle_set.kind.tag)

        names = list(particle_set.properties)
        chunks.append(_SPECIES_HEADER.pack(int(particle_set.kind), particle_set.count, len(names)))
        chunks.extend(name.encode("ascii").ljust(PROPERTY_NAME_SIZE, b"\0") for name in names)
        chunks.append(positions32.tobytes())
        chunks.append(_as_float32(particle_set.velocities).tobytes())
        chunks.append(_as_float32(particle_set.masses).tobytes())
        chunks.extend(_as_float32(particle_set.properties[name]).tobytes() for name in names)

    try:
        with open(path, "wb") as fp:
            for chunk in chunks:
                fp.write(chunk)
    except OSError as ex:
        raise errors.IoFailure(f"Could not write snapshot to {os.fspath(path)!r}: {ex}") from ex

    _LOGGER.debug("wrote snapshot %s (%d species)", os.fspath(path), len(species))


class _Reader:
    __slots__ = ("buffer", "offset")

    def __init__(self, buffer: bytes) -> None:
        self.buffer = buffer
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        available = len(self.buffer) - self.offset
        if size > available:
            raise errors.TruncatedFile(what, size, available)
        chunk = self.buffer[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: struct.Struct, what: str) -> t.Tuple[t.Any, ...]:
        return fmt.unpack(self.take(fmt.size, what))

    def floats(self, count: int, what: str) -> FloatArray:
        return np.frombuffer(self.take(4 * count, what), dtype="<f4").astype(np.float64)


def read_snapshot(path: PathLike) -> Snapshot:
    """Read and validate a CMD-SNAP v1 file."""
    try:
        with open(path, "rb") as fp:
            buffer = fp.read()
    except OSError as ex:
        raise errors.IoFailure(f"Could not read snapshot {os.fspath(path)!r}: {ex}") from ex

    if buffer[: len(MAGIC)] != MAGIC:
        raise errors.MagicMismatch(MAGIC, bytes(buffer[: len(MAGIC)]))

    reader = _Reader(buffer)
    _, version, box_size, redshift, n_species = reader.unpack(_HEADER, "file header")
    if version != VERSION:
        raise errors.DataError(f"Unsupported CMD-SNAP version {version}")

    species: t.List[ParticleSet] = []
    for _ in range(n_species):
        kind_code, count, n_props = reader.unpack(_SPECIES_HEADER, "species header")
        try:
            kind = Kind(kind_code)
        except ValueError:
            raise errors.DataError(f"Unknown species code {kind_code}") from None

        names = [
            reader.take(PROPERTY_NAME_SIZE, f"{kind.tag} property names").rstrip(b"\0").decode("ascii")
            for _ in range(n_props)
        ]
        positions = reader.floats(3 * count, f"{kind.tag} positions").reshape(count, 3)
        velocities = reader.floats(3 * count, f"{kind.tag} velocities").reshape(count, 3)
        masses = reader.floats(count, f"{kind.tag} masses")
        properties = {name: reader.floats(count, f"{kind.tag} property {name}") for name in names}
        species.append(ParticleSet(kind, positions, velocities, masses, properties))

    snapshot = Snapshot(SnapshotHeader(box_size, redshift, n_species), species)
    snapshot.validate()
    _LOGGER.debug("read snapshot %s: %s", os.fspath(path), snapshot.species)
    return snapshot


# Critical density in h^2 Msun / Mpc^3; masses below are in h^-1 Msun for an (h^-1 Mpc)^3 box
_RHO_CRIT = 2.775e11
_OMEGA_B = 0.049
_OMEGA_M = 0.3


def _round_trip32(values: FloatArray) -> FloatArray:
    return values.astype(np.float32).astype(np.float64)


def _wrap_positions(positions: FloatArray, box_size: float) -> FloatArray:
    wrapped = _round_trip32(np.mod(positions, box_size))
    wrapped[wrapped >= box_size] = 0.0
    return wrapped


def _draw_positions(
    rng: np.random.Generator,
    count: int,
    box_size: float,
    centres: FloatArray,
    widths: FloatArray,
    clump_fraction: float,
) -> FloatArray:
    positions = rng.random((count, 3)) * box_size
    in_clump = rng.random(count) < clump_fraction
    owner = rng.integers(0, centres.shape[0], size=count)
    offsets = rng.standard_normal((count, 3)) * widths[owner, None]
    positions[in_clump] = centres[owner[in_clump]] + offsets[in_clump]
    return _wrap_positions(positions, box_size)


def _clump_proximity(positions: FloatArray, box_size: float, centres: FloatArray, widths: FloatArray) -> FloatArray:
    """Smooth score in [0, 1): 0 far from every clump, approaching 1 at clump centres."""
    score = np.zeros(positions.shape[0])
    for centre, width in zip(centres, widths):
        delta = np.abs(positions - centre)
        delta = np.minimum(delta, box_size - delta)
        score += np.exp(-0.5 * np.sum(delta**2, axis=1) / width**2)
    return 1.0 - np.exp(-score)


def _gas_properties(
    rng: np.random.Generator, masses: FloatArray, proximity: FloatArray, with_magnetic: bool
) -> t.Dict[str, FloatArray]:
    # Invented toy model: hotter, denser, more enriched gas near clumps. Not physically calibrated.
    s = proximity
    jitter = 1.0 + 0.05 * rng.standard_normal(s.shape[0]).clip(-3.0, 3.0)
    temperature = 10.0 ** (4.0 + 2.5 * s) * jitter
    density = 1.0 + 20.0 * s
    metallicity = 0.02 * (0.05 + s)
    hi_fraction = 0.76 * (0.02 + 0.5 * (1.0 - s) ** 2)

    properties = {
        "temperature": temperature,
        "pressure": 100.0 * density * temperature / 1.0e4,
        "metallicity": metallicity,
        "hi_mass": masses * hi_fraction,
        "electron_count": masses * 1.16 * (1.0 - hi_fraction),
        "mg_mass": masses * metallicity * 0.06 * (1.0 + 0.5 * s),
        "fe_mass": masses * metallicity * 0.12 * (1.0 - 0.5 * s),
    }
    if with_magnetic:
        properties["b_modulus"] = 1.0e-9 * (1.0 + 50.0 * s) ** (2.0 / 3.0)

    rounded = {name: _round_trip32(values) for name, values in properties.items()}
    # keep hi_mass <= mass after float32 rounding
    rounded["hi_mass"] = np.minimum(rounded["hi_mass"], masses)
    return rounded


def gen_synthetic(
    seed: int,
    box_size: float,
    n_gas: int,
    n_dm: int,
    n_star: int,
    n_clumps: int,
    n_bh: int = 0,
    redshift: float = 0.0,
    with_magnetic: bool = True,
    clump_fraction: float = 0.3,
) -> Snapshot:
    """
    Generate a deterministic synthetic snapshot.

    Every species is a mixture of a uniform background and Gaussian clumps around ``n_clumps``
    seeded centres; gas, dark matter take ``clump_fraction`` of their particles from clumps,
    stars 90% and black holes all of them. Gas properties are smooth functions of a clump
    proximity score (see ``_gas_properties``). All float payloads are float32-representable, so
    a write/read cycle reproduces the snapshot exactly.

    Args:
        seed (int): Seed for ``numpy.random.default_rng``.
        box_size (float): Periodic box side in h^-1 Mpc.
        n_gas (int): Number of gas particles.
        n_dm (int): Number of dark matter particles.
        n_star (int): Number of star particles.
        n_clumps (int): Number of clump centres (at least 1).
        n_bh (int): Number of black hole particles; the species is omitted when 0.
        redshift (float): Redshift written to the header.
        with_magnetic (bool): Whether gas carries ``b_modulus`` (IllustrisTNG-like) or not (SIMBA-like).
        clump_fraction (float): Fraction of gas and dark matter particles drawn from clumps.

    Returns:
        The generated snapshot.
    """
    if min(n_gas, n_dm, n_star, n_bh) < 0:
        raise ValueError("particle counts must be non-negative")
    if n_clumps < 1:
        raise ValueError("n_clumps must be at least 1")
    if not box_size > 0:
        raise ValueError("box_size must be positive")
    if not 0.0 <= clump_fraction <= 1.0:
        raise ValueError("clump_fraction must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    centres = rng.random((n_clumps, 3)) * box_size
    widths = box_size * rng.uniform(0.02, 0.06, size=n_clumps)
    volume = box_size**3

    species: t.List[ParticleSet] = []
    plan = [
        (Kind.GAS, n_gas, clump_fraction, _OMEGA_B, 100.0),
        (Kind.DARK_MATTER, n_dm, clump_fraction, _OMEGA_M - _OMEGA_B, 150.0),
        (Kind.STAR, n_star, 0.9, 0.002, 120.0),
        (Kind.BLACK_HOLE, n_bh, 1.0, 0.0001, 80.0),
    ]
    for kind, count, fraction, omega, sigma_v in plan:
        if kind == Kind.BLACK_HOLE and count == 0:
            continue

        positions = _draw_positions(rng, count, box_size, centres, widths, fraction)
        proximity = _clump_proximity(positions, box_size, centres, widths)
        mean_mass = omega * _RHO_CRIT * volume / max(count, 1)
        masses = _round_trip32(mean_mass * rng.uniform(0.9, 1.1, size=count))
        velocities = _round_trip32(rng.standard_normal((count, 3)) * (sigma_v + 300.0 * proximity)[:, None])

        properties: t.Dict[str, FloatArray] = {}
        if kind == Kind.GAS:
            properties = _gas_properties(rng, masses, proximity, with_magnetic)
        species.append(ParticleSet(kind, positions, velocities, masses, properties))

    snapshot = Snapshot(SnapshotHeader(float(box_size), float(redshift), len(species)), species)
    snapshot.validate()
    _LOGGER.debug("generated synthetic snapshot seed=%d: %s", seed, species)
    return snapshot
