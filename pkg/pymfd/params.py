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
The six-parameter label space: ranges, validation, latin-hypercube sampling, the loss-side
[0, 1] normalisation and the plain-text label format.
"""
from __future__ import annotations

import enum
import logging
import math
import os
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import errors

__all__ = [
    "Suite",
    "ParameterRange",
    "PARAMETER_RANGES",
    "ParameterVector",
    "validate",
    "sample_lhs",
    "normalize",
    "denormalize",
    "write_labels",
    "read_labels",
    "LABELS_NAME",
    "labels_suite",
]

_LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
PathLike = t.Union[str, "os.PathLike[str]"]

LABELS_NAME = "labels.txt"


class Suite(enum.Enum):
    ILLUSTRIS_TNG = "IllustrisTNG"
    SIMBA = "SIMBA"
    NBODY = "N-body"

    @property
    def n_params(self) -> int:
        return 2 if self is Suite.NBODY else 6

    @classmethod
    def from_tag(cls, tag: str) -> Suite:
        for suite in cls:
            if suite.value.lower() == tag.lower() or suite.name.lower() == tag.lower():
                return suite
        raise ValueError(f"Unknown suite {tag!r}")


class ParameterRange(t.NamedTuple):
    name: str
    low: float
    high: float
    log: bool

    def to_unit(self, values: FloatArray) -> FloatArray:
        if self.log:
            return (np.log(values) - math.log(self.low)) / (math.log(self.high) - math.log(self.low))
        return (values - self.low) / (self.high - self.low)

    def from_unit(self, unit: FloatArray) -> FloatArray:
        if self.log:
            values = np.exp(math.log(self.low) + unit * (math.log(self.high) - math.log(self.low)))
        else:
            values = self.low + unit * (self.high - self.low)
        # rounding must never leave the closed range
        return np.clip(values, self.low, self.high)


PARAMETER_RANGES: t.Tuple[ParameterRange, ...] = (
    ParameterRange("omega_m", 0.1, 0.5, False),
    ParameterRange("sigma_8", 0.6, 1.0, False),
    ParameterRange("a_sn1", 0.25, 4.0, True),
    ParameterRange("a_sn2", 0.5, 2.0, True),
    ParameterRange("a_agn1", 0.25, 4.0, True),
    ParameterRange("a_agn2", 0.5, 2.0, True),
)


class ParameterVector(t.NamedTuple):
    """Label of one simulation. N-body vectors carry only ``omega_m`` and ``sigma_8``."""

    suite: Suite
    omega_m: float
    sigma_8: float
    a_sn1: t.Optional[float] = None
    a_sn2: t.Optional[float] = None
    a_agn1: t.Optional[float] = None
    a_agn2: t.Optional[float] = None

    @property
    def values(self) -> t.Tuple[float, ...]:
        return tuple(t.cast(float, v) for v in self[1 : 1 + self.suite.n_params])

    def to_record(self) -> FloatArray:
        """Six float64 values, NaN where the suite has no such parameter."""
        record = np.full(len(PARAMETER_RANGES), np.nan)
        record[: self.suite.n_params] = self.values
        return record

    @classmethod
    def from_values(cls, suite: Suite, values: t.Sequence[float]) -> ParameterVector:
        if len(values) != suite.n_params:
            raise errors.ShapeMismatch(f"{suite.value} labels need {suite.n_params} values, got {len(values)}")
        return cls(suite, *(float(v) for v in values))

    @classmethod
    def from_record(cls, record: t.Sequence[float], suite: t.Optional[Suite] = None) -> t.Optional[ParameterVector]:
        """
        Label of a CMD-GRID record, or ``None`` for an unlabelled one.

        Two present values always mean N-body. Six values fit both hydrodynamic suites, so the
        caller should pass ``suite``; without it IllustrisTNG is assumed and a warning logged.
        """
        values = [float(v) for v in record]
        present = [v for v in values if not math.isnan(v)]
        if not present:
            return None
        if suite is None:
            if len(present) == Suite.NBODY.n_params:
                suite = Suite.NBODY
            else:
                _LOGGER.warning("six-value label read without a suite tag, assuming %s", Suite.ILLUSTRIS_TNG.value)
                suite = Suite.ILLUSTRIS_TNG
        if len(present) != suite.n_params:
            raise errors.ShapeMismatch(f"{suite.value} labels need {suite.n_params} values, record has {len(present)}")
        return cls.from_values(suite, values[: suite.n_params])


def validate(v: ParameterVector) -> None:
    """Raise :class:`OutOfRange` for the first parameter outside its closed range."""
    ranges = PARAMETER_RANGES[: v.suite.n_params]
    if len(v.values) != len(ranges) or any(x is None for x in v.values):
        raise errors.ShapeMismatch(f"{v.suite.value} labels need {len(ranges)} values")
    for param, value in zip(ranges, v.values):
        if not param.low <= value <= param.high:
            raise errors.OutOfRange(param.name, value, param.low, param.high)


def sample_lhs(n: int, seed: int, suite: Suite = Suite.ILLUSTRIS_TNG) -> t.List[ParameterVector]:
    """
    Latin-hypercube design over the suite's parameters.

    Each dimension gets an independent random permutation of ``n`` equal-probability bins and a
    uniform position inside each bin. Bins are uniform in value for ``omega_m``/``sigma_8`` and
    uniform in log-value for the feedback amplitudes.
    """
    if n < 1:
        raise ValueError("n must be at least 1")

    rng = np.random.default_rng(seed)
    columns = []
    for param in PARAMETER_RANGES[: suite.n_params]:
        bins = rng.permutation(n)
        unit = (bins + rng.random(n)) / n
        columns.append(param.from_unit(unit))

    samples = np.stack(columns, axis=-1)
    return [ParameterVector.from_values(suite, row) for row in samples]


def normalize(vectors: t.Sequence[ParameterVector]) -> FloatArray:
    """Map labels to ``[0, 1]`` per parameter (log scale for feedback amplitudes); shape ``B x P``."""
    if not vectors:
        raise errors.EmptyInput("No parameter vectors to normalise")
    width = vectors[0].suite.n_params
    if any(v.suite.n_params != width for v in vectors):
        raise errors.ShapeMismatch("Cannot normalise labels of different widths together")
    raw = np.array([v.values for v in vectors], dtype=np.float64)
    return np.stack([param.to_unit(raw[:, i]) for i, param in enumerate(PARAMETER_RANGES[:width])], axis=-1)


def denormalize(unit: npt.ArrayLike, suite: Suite) -> t.List[ParameterVector]:
    array = np.atleast_2d(np.asarray(unit, dtype=np.float64))
    if array.shape[1] != suite.n_params:
        raise errors.ShapeMismatch(f"Expected {suite.n_params} columns, got {array.shape[1]}")
    columns = [param.from_unit(array[:, i]) for i, param in enumerate(PARAMETER_RANGES[: suite.n_params])]
    return [ParameterVector.from_values(suite, row) for row in np.stack(columns, axis=-1)]


def write_labels(path: PathLike, vectors: t.Sequence[ParameterVector], ids: t.Optional[t.Sequence[int]] = None) -> None:
    """
    Write one ``<record-id> <suite> <values...>`` line per vector.

    Values use Python's shortest round-trip float representation, so reading them back
    reproduces every bit.
    """
    ids = list(range(len(vectors))) if ids is None else list(ids)
    if len(ids) != len(vectors):
        raise errors.ShapeMismatch("ids and vectors differ in length")

    lines = [" ".join([str(i), v.suite.value, *(repr(float(x)) for x in v.values)]) for i, v in zip(ids, vectors)]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            fp.write("".join(line + "\n" for line in lines))
    except OSError as ex:
        raise errors.IoFailure(f"Could not write labels to {os.fspath(path)!r}: {ex}") from ex
    _LOGGER.debug("wrote %d labels to %s", len(vectors), os.fspath(path))


def _parse_label_line(line: str, line_no: int, source: str) -> t.Tuple[int, ParameterVector]:
    fields = line.split()

    def fail(message: str, column: int) -> t.NoReturn:
        offsets = []
        cursor = 0
        for item in fields:
            cursor = line.index(item, cursor)
            offsets.append(cursor)
            cursor += len(item)
        start = offsets[column] if column < len(offsets) else len(line)
        width = len(fields[column]) if column < len(fields) else 1
        raise errors.ParseError(message, line_no, line, range(start, start + width), source)

    if len(fields) < 2:
        fail("expected '<record-id> <suite> <values...>'", len(fields))
    try:
        record_id = int(fields[0])
    except ValueError:
        fail("record id must be an integer", 0)
    try:
        suite = Suite.from_tag(fields[1])
    except ValueError:
        fail(f"unknown suite {fields[1]!r}", 1)
    if len(fields) - 2 != suite.n_params:
        message = f"{suite.value} records carry {suite.n_params} values, found {len(fields) - 2}"
        fail(message, min(len(fields), 2 + suite.n_params))

    values: t.List[float] = []
    for column, text in enumerate(fields[2:], start=2):
        try:
            value = float(text)
        except ValueError:
            fail(f"{text!r} is not a number", column)
        if not math.isfinite(value):
            fail(f"{text!r} is not finite", column)
        values.append(value)

    return record_id, ParameterVector.from_values(suite, values)


def read_labels(path: PathLike, with_ids: bool = False) -> t.List[t.Any]:
    """
    Read a label file written by :func:`write_labels`.

    Returns:
        The vectors, or ``(record_id, vector)`` pairs when ``with_ids`` is set.
    """
    source = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except OSError as ex:
        raise errors.IoFailure(f"Could not read labels {source!r}: {ex}") from ex

    records = [
        _parse_label_line(line, line_no, source)
        for line_no, line in enumerate(text.split("\n"), start=1)
        if line.strip()
    ]
    return records if with_ids else [vector for _, vector in records]


def labels_suite(path: PathLike) -> t.Optional[Suite]:
    """The one suite every vector of a label file shares, or ``None`` if it is absent or mixed."""
    if not os.path.isfile(path):
        return None
    suites = {vector.suite for vector in read_labels(path)}
    return suites.pop() if len(suites) == 1 else None
