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
import typing as t

__all__ = [
    "PymfdError",
    "UsageError",
    "DataError",
    "MagicMismatch",
    "TruncatedFile",
    "InvariantViolation",
    "IoFailure",
    "OutOfBox",
    "InsufficientPoints",
    "MissingProperty",
    "MissingRadii",
    "MissingMassGrid",
    "NotDivisible",
    "OutOfRange",
    "ParseError",
    "ShapeMismatch",
    "EmptyInput",
    "ShapeUnderflow",
    "RecordOutOfRange",
]


class PymfdError(Exception):
    """Base class for every error raised by pymfd."""

    exit_code: int = 2


class UsageError(PymfdError):
    exit_code = 1


class DataError(PymfdError):
    """Bad input data or file contents."""


class MagicMismatch(DataError):
    def __init__(self, expected: bytes, found: bytes, hint: t.Optional[str] = None) -> None:
        self.expected = expected
        self.found = found
        message = f"Expected file magic {expected!r} but found {found!r}"
        if hint:
            message += f" ({hint})"
        super().__init__(message)


class TruncatedFile(DataError):
    def __init__(self, what: str, expected: int, available: int) -> None:
        self.what = what
        self.expected = expected
        self.available = available
        super().__init__(f"File truncated while reading {what}: needed {expected} bytes, {available} available")


class InvariantViolation(PymfdError):
    exit_code = 3

    def __init__(self, message: str, species: t.Optional[str] = None, index: t.Optional[int] = None) -> None:
        self.species = species
        self.index = index
        context = []
        if species is not None:
            context.append(f"species={species}")
        if index is not None:
            context.append(f"index={index}")
        if context:
            message = f"{message} [{', '.join(context)}]"
        super().__init__(message)


class IoFailure(DataError):
    pass


class OutOfBox(DataError):
    def __init__(self, index: int, box_size: float) -> None:
        self.index = index
        self.box_size = box_size
        super().__init__(f"Point {index} lies outside the periodic box [0, {box_size})")


class InsufficientPoints(DataError):
    def __init__(self, requested: int, available: int, species: t.Optional[str] = None) -> None:
        self.requested = requested
        self.available = available
        self.species = species
        where = f" for species {species}" if species else ""
        super().__init__(f"Requested {requested} neighbours{where} but only {available} points are available")


class MissingProperty(DataError):
    def __init__(self, prop: str, species: str, field: t.Optional[str] = None) -> None:
        self.prop = prop
        self.species = species
        self.field = field
        prefix = f"Field {field}: " if field else ""
        super().__init__(f"{prefix}property {prop!r} is missing for species {species}")


class MissingRadii(DataError):
    def __init__(self, species: str) -> None:
        self.species = species
        super().__init__(f"No smoothing radii were supplied for species {species}")


class MissingMassGrid(DataError):
    def __init__(self, field: str) -> None:
        self.field = field
        super().__init__(f"Field {field} is mass weighted and needs a companion mass grid")


class NotDivisible(DataError):
    def __init__(self, size: int, factor: int) -> None:
        self.size = size
        self.factor = factor
        super().__init__(f"Grid size {size} is not divisible by {factor}")


class OutOfRange(DataError):
    def __init__(self, parameter: str, value: float, low: float, high: float) -> None:
        self.parameter = parameter
        self.value = value
        super().__init__(f"Parameter {parameter}={value!r} is outside [{low}, {high}]")


class ParseError(DataError):
    """
    Raised for malformed text inputs (config files, architecture files, label files).

    When the offending source line is known, the message repeats it with carets under the
    failing columns.
    """

    def __init__(
        self,
        message: str,
        line_no: t.Optional[int] = None,
        line: t.Optional[str] = None,
        at: t.Sequence[int] = (),
        source: t.Optional[str] = None,
    ) -> None:
        self.line_no = line_no
        self.source = source

        location = ":".join(str(p) for p in (source, line_no) if p is not None)
        built_message = [f"{location}: {message}" if location else message]
        if line:
            built_message.append((" " * 4) + line)
            if at:
                error_arrows = [" " for _ in range(4 + len(line) + 1)]
                for idx in at:
                    if 0 <= idx <= len(line):
                        error_arrows[4 + idx] = "^"
                built_message.append("".join(error_arrows).rstrip())
        super().__init__("\n".join(built_message))


class ShapeMismatch(DataError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class EmptyInput(DataError):
    pass


class ShapeUnderflow(DataError):
    def __init__(self, layer: str, size: int, kernel: int) -> None:
        self.layer = layer
        self.size = size
        self.kernel = kernel
        super().__init__(f"{layer}: spatial size {size} is smaller than the kernel ({kernel}) after padding")


class RecordOutOfRange(DataError):
    def __init__(self, index: int, n_records: int) -> None:
        self.index = index
        self.n_records = n_records
        super().__init__(f"Record {index} requested but the file holds {n_records} record(s)")
