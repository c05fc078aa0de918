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
"""Catalog of the 13 multifield fields and extraction of per-particle contributions."""
from __future__ import annotations

import enum
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import errors
from pymfd.snapshot import Kind
from pymfd.snapshot import ParticleSet

__all__ = [
    "FieldId",
    "Mode",
    "FieldSpec",
    "Contribution",
    "field_catalog",
    "field_spec",
    "contributions",
    "available_fields",
]

FloatArray = npt.NDArray[np.float64]

MASS = "mass"
VELOCITY = "velocity"


class FieldId(enum.IntEnum):
    MGAS = 0
    VGAS = 1
    T = 2
    P = 3
    Z = 4
    HI = 5
    NE = 6
    B = 7
    MGFE = 8
    MCDM = 9
    VCDM = 10
    MSTAR = 11
    MTOT = 12


class Mode(enum.Enum):
    EXTENSIVE = "extensive"
    MASS_WEIGHTED = "mass_weighted"
    PAIR_RATIO = "pair_ratio"
    MULTI_SPECIES_EXTENSIVE = "multi_species_extensive"

    @property
    def is_extensive(self) -> bool:
        return self in (Mode.EXTENSIVE, Mode.MULTI_SPECIES_EXTENSIVE)


class FieldSpec(t.NamedTuple):
    field_id: FieldId
    prefix: str
    name: str
    mode: Mode
    species: t.Tuple[Kind, ...]
    numerator: str
    denominator: t.Optional[str]
    units: str

    def __repr__(self) -> str:
        return f"FieldSpec({self.prefix}, {self.mode.value})"

    def units_for(self, dimensionality: int) -> str:
        """Units with the density exponent ``A`` resolved (2 for maps, 3 for grids)."""
        return self.units.replace("^A", f"^{dimensionality}")

    @property
    def required_properties(self) -> t.Tuple[str, ...]:
        return tuple(p for p in (self.numerator, self.denominator) if p is not None and p not in (MASS, VELOCITY))


_GAS = (Kind.GAS,)
_DENSITY = "(h^-1 Msun)/(h^-1 kpc)^A"

_CATALOG: t.Tuple[FieldSpec, ...] = (
    FieldSpec(FieldId.MGAS, "Mgas", "Gas density", Mode.EXTENSIVE, _GAS, MASS, None, _DENSITY),
    FieldSpec(FieldId.VGAS, "Vgas", "Gas velocity", Mode.MASS_WEIGHTED, _GAS, VELOCITY, MASS, "km/s"),
    FieldSpec(FieldId.T, "T", "Gas temperature", Mode.MASS_WEIGHTED, _GAS, "temperature", MASS, "K"),
    FieldSpec(FieldId.P, "P", "Gas pressure", Mode.MASS_WEIGHTED, _GAS, "pressure", MASS, "(km/s)(Msun/kpc^3)"),
    FieldSpec(FieldId.Z, "Z", "Gas metallicity", Mode.MASS_WEIGHTED, _GAS, "metallicity", MASS, "-"),
    FieldSpec(FieldId.HI, "HI", "Neutral hydrogen density", Mode.EXTENSIVE, _GAS, "hi_mass", None, _DENSITY),
    FieldSpec(
        FieldId.NE, "ne", "Electron number density", Mode.EXTENSIVE, _GAS, "electron_count", None, "h^-1/(h^-1 kpc)^A"
    ),
    FieldSpec(FieldId.B, "B", "Magnetic fields", Mode.MASS_WEIGHTED, _GAS, "b_modulus", MASS, "Gauss"),
    FieldSpec(FieldId.MGFE, "MgFe", "Magnesium over iron", Mode.PAIR_RATIO, _GAS, "mg_mass", "fe_mass", "-"),
    FieldSpec(FieldId.MCDM, "Mcdm", "Dark matter density", Mode.EXTENSIVE, (Kind.DARK_MATTER,), MASS, None, _DENSITY),
    FieldSpec(
        FieldId.VCDM, "Vcdm", "Dark matter velocity", Mode.MASS_WEIGHTED, (Kind.DARK_MATTER,), VELOCITY, MASS, "km/s"
    ),
    FieldSpec(FieldId.MSTAR, "Mstar", "Stellar mass density", Mode.EXTENSIVE, (Kind.STAR,), MASS, None, _DENSITY),
    FieldSpec(
        FieldId.MTOT,
        "Mtot",
        "Total matter density",
        Mode.MULTI_SPECIES_EXTENSIVE,
        (Kind.GAS, Kind.DARK_MATTER, Kind.STAR, Kind.BLACK_HOLE),
        MASS,
        None,
        _DENSITY,
    ),
)


def field_catalog() -> t.List[FieldSpec]:
    return list(_CATALOG)


def field_spec(key: t.Union[int, str, FieldId]) -> FieldSpec:
    """Look a field up by id code or prefix (case-insensitive)."""
    if isinstance(key, str):
        for spec in _CATALOG:
            if spec.prefix.lower() == key.lower():
                return spec
        raise errors.UsageError(f"Unknown field {key!r}; expected one of {', '.join(s.prefix for s in _CATALOG)}")
    try:
        return _CATALOG[FieldId(key)]
    except ValueError:
        raise errors.DataError(f"Unknown field id {key!r}") from None


class Contribution(t.NamedTuple):
    """Per-particle streams for one species; ``weight`` is None for extensive fields."""

    kind: Kind
    numerator: FloatArray
    weight: t.Optional[FloatArray]


def _modulus(vectors: FloatArray) -> FloatArray:
    return np.sqrt(np.sum(vectors * vectors, axis=-1))


def _select(spec: FieldSpec, particle_set: ParticleSet, selector: str) -> FloatArray:
    if selector == MASS:
        return particle_set.masses
    if selector == VELOCITY:
        return _modulus(particle_set.velocities)
    try:
        values = particle_set.properties[selector]
    except KeyError:
        raise errors.MissingProperty(selector, particle_set.kind.tag, spec.prefix) from None
    if values.ndim == 2:
        return _modulus(values)
    return np.abs(values) if selector == "b_modulus" else values


def contributions(spec: FieldSpec, species_sets: t.Sequence[ParticleSet]) -> t.List[Contribution]:
    """
    Per-particle ``(numerator, weight)`` streams for a field.

    extensive: ``(q_i, None)``; mass weighted: ``(m_i * p_i, m_i)``; pair ratio:
    ``(Mg_i, Fe_i)``; multi-species extensive: one ``(m_i, None)`` stream per species present.
    Velocities enter through their modulus, so opposite velocities never cancel.
    """
    by_kind = {s.kind: s for s in species_sets}
    streams: t.List[Contribution] = []

    for kind in spec.species:
        particle_set = by_kind.get(kind)
        if particle_set is None:
            if spec.mode is Mode.MULTI_SPECIES_EXTENSIVE:
                continue
            raise errors.MissingProperty(spec.numerator, kind.tag, spec.prefix)

        if spec.mode is Mode.MASS_WEIGHTED:
            masses = particle_set.masses
            streams.append(Contribution(kind, masses * _select(spec, particle_set, spec.numerator), masses))
        elif spec.mode is Mode.PAIR_RATIO:
            assert spec.denominator is not None
            numerator = _select(spec, particle_set, spec.numerator)
            streams.append(Contribution(kind, numerator, _select(spec, particle_set, spec.denominator)))
        else:
            streams.append(Contribution(kind, _select(spec, particle_set, spec.numerator), None))

    if not streams:
        raise errors.MissingProperty(spec.numerator, "any", spec.prefix)
    return streams


def _is_nbody(species_sets: t.Sequence[ParticleSet]) -> bool:
    return all(s.kind == Kind.DARK_MATTER or s.count == 0 for s in species_sets)


def available_fields(species_sets: t.Sequence[ParticleSet]) -> t.List[FieldSpec]:
    """
    Fields a snapshot can produce. Gravity-only snapshots expose only ``Mtot``; ``B`` needs
    ``b_modulus`` on the gas.
    """
    if _is_nbody(species_sets):
        return [field_spec(FieldId.MTOT)]

    by_kind = {s.kind: s for s in species_sets}
    available = []
    for spec in _CATALOG:
        if spec.mode is Mode.MULTI_SPECIES_EXTENSIVE:
            available.append(spec)
            continue
        present = [by_kind.get(kind) for kind in spec.species]
        if any(p is None for p in present):
            continue
        if all(prop in t.cast(ParticleSet, p).properties for p in present for prop in spec.required_properties):
            available.append(spec)
    return available
