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
import abc
import enum
import re
import typing as t

__all__ = [
    "TokenType",
    "Token",
    "LiteralMixin",
    "PunctuationToken",
    "IdentifierToken",
    "StringToken",
    "IntToken",
    "FloatToken",
    "NewlineToken",
    "ErrorToken",
]


class TokenType(enum.Enum):
    # Compound tokens
    IDENTIFIER = "[\\w./][\\w./-]*"
    INT_LITERAL = "[+-]?\\d+"
    FLOAT_LITERAL = "[+-]?\\d+(\\.\\d*)?([eE][+-]?\\d+)?"
    STRING_LITERAL = "'.*'"
    NEWLINE = "\\n"
    # Special tokens
    UNKNOWN = "UNKNOWN"
    # Punctuation
    EQUALS = "="
    COMMA = ","
    COLON = ":"


EXCLUDED_TOKEN_TYPES = {
    TokenType.IDENTIFIER,
    TokenType.INT_LITERAL,
    TokenType.FLOAT_LITERAL,
    TokenType.STRING_LITERAL,
    TokenType.NEWLINE,
    TokenType.UNKNOWN,
}
SORTED_TOKEN_TYPES = sorted(
    set(TokenType).difference(EXCLUDED_TOKEN_TYPES),
    key=lambda itm: len(itm.value),
    reverse=True,
)


class Token(abc.ABC):
    """A lexeme together with its 1-based line number and 0-based column."""

    __slots__ = ("value", "at", "line", "width", "type")

    value: t.Any
    at: int
    line: int
    width: int
    type: TokenType

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(value={self.value!r}, type={self.type}, line={self.line})"

    @property
    def columns(self) -> range:
        return range(self.at, self.at + self.width)


class LiteralMixin:
    __slots__ = ()


class PunctuationToken(Token):
    __slots__ = ()

    def __init__(self, type: TokenType, at: int, line: int) -> None:
        self.value = type.value
        self.at = at
        self.line = line
        self.width = len(type.value)
        self.type = type


class IdentifierToken(Token):
    __slots__ = ()

    type: TokenType = TokenType.IDENTIFIER

    def __init__(self, value: str, at: int, line: int) -> None:
        self.value = value
        self.at = at
        self.line = line
        self.width = len(value)


# only quotes and backslashes are escaped; any other backslash is literal
_ESCAPE = re.compile(r"\\([\"'\\])")


class StringToken(Token, LiteralMixin):
    __slots__ = ()

    type: TokenType = TokenType.STRING_LITERAL

    def __init__(self, value: str, at: int, line: int) -> None:
        # quotes are part of the lexeme but not of the value
        self.width = len(value) + 2
        self.value = _ESCAPE.sub(r"\1", value)
        self.at = at
        self.line = line


class IntToken(Token, LiteralMixin):
    __slots__ = ()

    type: TokenType = TokenType.INT_LITERAL

    def __init__(self, value: str, at: int, line: int) -> None:
        self.value: int = int(value)
        self.at = at
        self.line = line
        self.width = len(value)


class FloatToken(Token, LiteralMixin):
    __slots__ = ()

    type: TokenType = TokenType.FLOAT_LITERAL

    def __init__(self, value: str, at: int, line: int) -> None:
        self.value = float(value)
        self.at = at
        self.line = line
        self.width = len(value)


class NewlineToken(Token):
    __slots__ = ()

    type: TokenType = TokenType.NEWLINE

    def __init__(self, at: int, line: int) -> None:
        self.value = "\n"
        self.at = at
        self.line = line
        self.width = 1


class ErrorToken(Token):
    __slots__ = ()

    type: TokenType = TokenType.UNKNOWN

    def __init__(self, value: str, at: int, line: int) -> None:
        self.value: str = value
        self.at = at
        self.line = line
        self.width = len(value)
