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
Run configuration.

A run is described by a :class:`RunConfig` resolved from built-in defaults, an optional
``key = value`` text file, command line flags and finally the ``CMD_THREADS`` environment
variable, each overriding the previous one.
"""
from __future__ import annotations

import os
import typing as t

from pymfd import errors
from pymfd import fields
from pymfd import kernels
from pymfd import lexer
from pymfd import tokens
from pymfd.deposit import SlicePlan
from pymfd.params import Suite

__all__ = ["THREADS_ENV", "RunConfig", "parse_config", "parse_assignments", "load_config", "resolve"]

THREADS_ENV = "CMD_THREADS"

Scalar = t.Union[int, float, str, bool]
Value = t.Union[Scalar, t.Tuple[t.Any, ...], None]


class RunConfig(t.NamedTuple):
    """Everything a ``generate`` run depends on. An empty ``fields`` means every available field."""

    snapshot: t.Optional[str] = None
    synthetic_seed: int = 0
    synthetic_box: float = 25.0
    synthetic_gas: int = 20000
    synthetic_dm: int = 20000
    synthetic_star: int = 2000
    synthetic_bh: int = 0
    synthetic_clumps: int = 16
    synthetic_redshift: float = 0.0
    synthetic_magnetic: bool = True
    fields: t.Tuple[str, ...] = ()
    output: str = "cmd_output"
    grid_sizes: t.Tuple[int, ...] = (128, 256, 512)
    map_size: int = 256
    slices: t.Optional[t.Tuple[SlicePlan, ...]] = None
    kernel2d: str = kernels.Kernel2DMode.UNIFORM_DISK.value
    tracers: int = 1000
    neighbours: int = 32
    seed: int = 0
    deterministic: bool = True
    threads: t.Optional[int] = None
    suite: str = Suite.ILLUSTRIS_TNG.value
    params: t.Tuple[float, ...] = ()
    bulk_velocity: bool = False

    @property
    def kernel_mode(self) -> kernels.Kernel2DMode:
        return kernels.Kernel2DMode(self.kernel2d)

    @property
    def suite_tag(self) -> Suite:
        return Suite.from_tag(self.suite)

    def field_specs(self) -> t.List[fields.FieldSpec]:
        return [fields.field_spec(name) for name in self.fields]

    def to_text(self) -> str:
        """Canonical config text; parsing it back yields the same config."""
        lines = []
        for key, value in self._asdict().items():
            if value is None:
                continue
            lines.append(f"{key} = {_render(key, value)}")
        return "\n".join(lines) + "\n"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_scalar(value: t.Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, SlicePlan):
        return f"{value.axis}:{value.offset!r}:{value.thickness!r}"
    if isinstance(value, str):
        return _quote(value)
    return str(value)


def _render(key: str, value: t.Any) -> str:
    if isinstance(value, tuple):
        if not value:
            return "default" if key in ("fields", "params") else "none"
        return ", ".join(_render_scalar(v) for v in value)
    return _render_scalar(value)


_KINDS: t.Dict[str, str] = {
    "snapshot": "str",
    "synthetic_seed": "int",
    "synthetic_box": "float",
    "synthetic_gas": "int",
    "synthetic_dm": "int",
    "synthetic_star": "int",
    "synthetic_bh": "int",
    "synthetic_clumps": "int",
    "synthetic_redshift": "float",
    "synthetic_magnetic": "bool",
    "fields": "str_list",
    "output": "str",
    "grid_sizes": "int_list",
    "map_size": "int",
    "slices": "slices",
    "kernel2d": "str",
    "tracers": "int",
    "neighbours": "int",
    "seed": "int",
    "deterministic": "bool",
    "threads": "int",
    "suite": "str",
    "params": "float_list",
    "bulk_velocity": "bool",
}
assert set(_KINDS) == set(RunConfig._fields)


class _ConfigParser(lexer.TokenStream):
    __slots__ = ()

    def key(self) -> str:
        token = self.expect("key", tokens.TokenType.IDENTIFIER)
        if token.value not in _KINDS:
            self.syntax_error(f"Unknown config key {token.value!r}")
        return str(token.value)

    def item(self) -> t.Tuple[t.Any, tokens.Token]:
        self.error_stack.appendleft("value")
        token = self.next_token()
        if token is None:
            self.syntax_error()
        self.error_stack.popleft()

        if isinstance(token, tokens.IdentifierToken):
            nxt = self.peek_next_token()
            if nxt is not None and nxt.type is tokens.TokenType.COLON:
                return self.slice_rest(token), token
        elif not isinstance(token, tokens.LiteralMixin):
            self.syntax_error()
        return token.value, token

    def slice_rest(self, axis: tokens.Token) -> SlicePlan:
        numbers = []
        for what in ("offset", "thickness"):
            self.expect("':'", tokens.TokenType.COLON)
            numbers.append(float(self.expect(what, tokens.TokenType.INT_LITERAL, tokens.TokenType.FLOAT_LITERAL).value))
        if axis.value not in ("x", "y", "z"):
            raise self.lexer.error("slice axis must be x, y or z", self.statement.line_no, axis.columns)
        return SlicePlan(str(axis.value), numbers[0], numbers[1])

    def assignment(self) -> t.Tuple[str, Value]:
        key = self.key()
        self.expect("'='", tokens.TokenType.EQUALS)

        items = [self.item()]
        while (nxt := self.peek_next_token()) is not None and nxt.type is tokens.TokenType.COMMA:
            self.next_token()
            items.append(self.item())
        self.expect_end()
        return key, self.coerce(key, items)

    def coerce(self, key: str, items: t.List[t.Tuple[t.Any, tokens.Token]]) -> Value:
        kind = _KINDS[key]

        def fail(message: str, token: tokens.Token) -> t.NoReturn:
            raise self.lexer.error(f"{key}: {message}", self.statement.line_no, token.columns)

        def scalar(value: t.Any, token: tokens.Token, scalar_kind: str) -> t.Any:
            if scalar_kind == "int":
                if isinstance(token, tokens.IntToken):
                    return value
                fail("expected an integer", token)
            if scalar_kind == "float":
                if isinstance(token, (tokens.IntToken, tokens.FloatToken)):
                    return float(value)
                fail("expected a number", token)
            if scalar_kind == "bool":
                if isinstance(token, tokens.IdentifierToken) and value in ("true", "false"):
                    return value == "true"
                fail("expected true or false", token)
            if isinstance(token, (tokens.IdentifierToken, tokens.StringToken)):
                return str(value)
            fail("expected a string", token)

        first_value, first_token = items[0]
        bare = isinstance(first_token, tokens.IdentifierToken) and len(items) == 1
        if not kind.endswith("list") and kind != "slices":
            if len(items) > 1:
                fail("expected a single value", items[1][1])
            if kind == "int" and bare and first_value in ("none", "auto") and key == "threads":
                return None
            if kind == "str" and bare and first_value == "none" and key == "snapshot":
                return None
            return scalar(first_value, first_token, kind)

        if bare and first_value in ("default", "none"):
            return None if kind == "slices" else ()
        if kind == "slices":
            for value, token in items:
                if not isinstance(value, SlicePlan):
                    fail("expected 'default' or axis:offset:thickness entries", token)
            return tuple(value for value, _ in items)
        scalar_kind = kind[: -len("_list")]
        return tuple(scalar(value, token, scalar_kind) for value, token in items)


def parse_config(text: str, source: t.Optional[str] = None) -> t.Dict[str, Value]:
    """Parse config text into the mapping of keys it sets."""
    lex = lexer.Lexer(text, source)
    settings: t.Dict[str, Value] = {}
    for statement in lex.statements():
        key, value = _ConfigParser(lex, statement).assignment()
        if key in settings:
            raise lex.error(f"{key} is set twice", statement.line_no, statement.tokens[0].columns)
        settings[key] = value
    return settings


def load_config(path: str) -> t.Dict[str, Value]:
    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except OSError as ex:
        raise errors.IoFailure(f"Could not read config {path!r}: {ex}") from ex
    return parse_config(text, path)


def _validate(config: RunConfig) -> None:
    positive = {
        "map_size": config.map_size,
        "tracers": config.tracers,
        "neighbours": config.neighbours,
        "synthetic_clumps": config.synthetic_clumps,
    }
    for key, value in positive.items():
        if value < 1:
            raise errors.UsageError(f"{key} must be at least 1, got {value}")
    if any(n < 1 for n in config.grid_sizes):
        raise errors.UsageError(f"grid sizes must be at least 1, got {config.grid_sizes}")
    if config.threads is not None and config.threads < 1:
        raise errors.UsageError(f"threads must be at least 1, got {config.threads}")
    if not config.synthetic_box > 0:
        raise errors.UsageError("synthetic_box must be positive")

    try:
        config.kernel_mode
    except ValueError:
        modes = ", ".join(m.value for m in kernels.Kernel2DMode)
        raise errors.UsageError(f"Unknown kernel2d {config.kernel2d!r}; expected one of {modes}") from None
    try:
        suite = config.suite_tag
    except ValueError as ex:
        raise errors.UsageError(str(ex)) from None
    if config.params and len(config.params) != suite.n_params:
        raise errors.UsageError(f"{suite.value} runs take {suite.n_params} params, got {len(config.params)}")

    config.field_specs()


def resolve(
    file_settings: t.Optional[t.Mapping[str, Value]] = None,
    flag_settings: t.Optional[t.Mapping[str, Value]] = None,
    environ: t.Optional[t.Mapping[str, str]] = None,
) -> RunConfig:
    """Merge defaults, file settings, flag settings and ``CMD_THREADS``, then validate."""
    merged: t.Dict[str, t.Any] = {}
    for layer in (file_settings or {}, flag_settings or {}):
        for key, value in layer.items():
            if key not in _KINDS:
                raise errors.UsageError(f"Unknown setting {key!r}")
            merged[key] = value

    env = os.environ if environ is None else environ
    if (threads := env.get(THREADS_ENV)) is not None:
        try:
            merged["threads"] = int(threads)
        except ValueError:
            raise errors.UsageError(f"{THREADS_ENV} must be an integer, got {threads!r}") from None

    config = RunConfig(**merged)
    _validate(config)
    return config


def parse_assignments(assignments: t.Mapping[str, str], source: str = "command line") -> t.Dict[str, Value]:
    """
    Parse ``key -> text`` pairs as config lines. Values of plain string settings are quoted
    first, so paths need no escaping on the command line.
    """
    lines = []
    for key, text in assignments.items():
        if _KINDS.get(key) == "str" and not text.startswith(("'", '"')):
            text = _quote(text)
        lines.append(f"{key} = {text}")
    return parse_config("\n".join(lines), source)
