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
"""Line-oriented lexer shared by the config and architecture file parsers."""
from __future__ import annotations

import collections
import typing as t

from pymfd import errors
from pymfd import tokens

__all__ = ["Lexer", "Statement", "TokenStream"]


def _trailing_backslashes(text: str) -> int:
    return len(text) - len(text.rstrip("\\"))


class Statement(t.NamedTuple):
    """The tokens of one non-empty source line."""

    line_no: int
    text: str
    tokens: t.List[tokens.Token]


class Lexer:
    __slots__ = ("raw", "source", "tokens", "idx", "eof", "line", "line_start")

    def __init__(self, raw: str, source: t.Optional[str] = None) -> None:
        self.raw: str = raw.replace("\r\n", "\n")
        self.source = source
        self.tokens: t.List[tokens.Token] = []

        self.idx: int = -1
        self.eof: bool = False
        self.line: int = 1
        self.line_start: int = 0

    def line_text(self, line_no: int) -> str:
        lines = self.raw.split("\n")
        return lines[line_no - 1] if 0 < line_no <= len(lines) else ""

    def error(self, message: str, line_no: int, columns: t.Iterable[int]) -> errors.ParseError:
        return errors.ParseError(message, line_no, self.line_text(line_no), list(columns), self.source)

    def next(self) -> t.Tuple[t.Optional[str], t.Optional[int]]:
        self.idx += 1

        while self.idx < len(self.raw):
            char = self.raw[self.idx]
            if char == "#":
                end = self.raw.find("\n", self.idx)
                self.idx = len(self.raw) if end == -1 else end
                continue
            if char == "\n" or not char.isspace():
                return char, self.idx
            self.idx += 1

        return None, None

    def peek(self, n_ahead: int = 1) -> t.Optional[str]:
        idx = self.idx + n_ahead

        if len(self.raw) <= idx:
            return None

        return self.raw[idx]

    def parse_while(
        self,
        char: t.Optional[str],
        condition: t.Callable[[t.Optional[str], int, t.List[str]], bool],
        fail_on_eol: bool = False,
    ) -> str:
        buf: t.List[str] = []
        offset: int = 0
        while condition(char, offset, buf):
            if fail_on_eol and (char is None or char == "\n"):
                column = self.idx + offset - self.line_start
                raise self.error("Unexpected end of line while parsing", self.line, [column])
            assert char is not None
            buf.append(char)
            char, offset = self.peek(offset + 1), offset + 1
        return "".join(buf)

    def _is_number_char(self, char: t.Optional[str], offset: int, buf: t.List[str]) -> bool:
        if char is None:
            return False
        if char.isdecimal():
            return True
        has_exponent = any(c in "eE" for c in buf)
        if char in "+-":
            return offset == 0 or (bool(buf) and buf[-1] in "eE")
        if char == ".":
            return "." not in buf and not has_exponent
        if char in "eE" and not has_exponent:
            following = self.peek(offset + 1) or ""
            if following in ("+", "-"):
                following = self.peek(offset + 2) or ""
            return following.isdecimal()
        return False

    def as_token(self, char: str, charindex: int) -> t.Tuple[tokens.Token, int]:
        column = charindex - self.line_start

        if char == "\n":
            return tokens.NewlineToken(column, self.line), 1
        if char.isalpha() or char in "_./":
            tkn = self.parse_while(char, lambda c, o, _: c is not None and (c.isalnum() or c in "_./-"))
            return tokens.IdentifierToken(tkn, column, self.line), len(tkn)
        if char == "'" or char == '"':
            looking_for = char
            # a quote preceded by an odd run of backslashes is escaped
            tkn = self.parse_while(
                "",
                lambda c, o, buf: c != looking_for or _trailing_backslashes("".join(buf)) % 2 == 1,
                True,
            )
            return tokens.StringToken(tkn, column, self.line), len(tkn) + 2
        if char.isdecimal() or (char in "+-" and (self.peek() or "").isdecimal()):
            tkn = self.parse_while(char, self._is_number_char)
            if any(c in tkn for c in ".eE"):
                return tokens.FloatToken(tkn, column, self.line), len(tkn)
            return tokens.IntToken(tkn, column, self.line), len(tkn)

        for token_type in tokens.SORTED_TOKEN_TYPES:
            if char == token_type.value:
                return tokens.PunctuationToken(token_type, column, self.line), 1

        return tokens.ErrorToken(char, column, self.line), 1

    def tokenize(self) -> t.List[tokens.Token]:
        while not self.eof:
            char, charindex = self.next()

            if char is None:
                self.eof = True
                break

            assert charindex is not None
            token, consumed = self.as_token(char, charindex)
            if consumed > 1:
                self.idx += consumed - 1

            self.tokens.append(token)
            if isinstance(token, tokens.NewlineToken):
                self.line += 1
                self.line_start = charindex + 1

        if invalid := [tk for tk in self.tokens if isinstance(tk, tokens.ErrorToken)]:
            line = invalid[0].line
            raise self.error(
                "Unexpected characters encountered during lexing",
                line,
                [tk.at for tk in invalid if tk.line == line],
            )

        return self.tokens

    def statements(self) -> t.List[Statement]:
        """Tokens grouped by source line, skipping blank and comment-only lines."""
        grouped: t.Dict[int, t.List[tokens.Token]] = collections.defaultdict(list)
        for token in self.tokenize():
            if not isinstance(token, tokens.NewlineToken):
                grouped[token.line].append(token)
        return [Statement(line, self.line_text(line), grouped[line]) for line in sorted(grouped)]


class TokenStream:
    """Cursor over one statement's tokens with the error reporting of the expression parser."""

    __slots__ = ("lexer", "statement", "idx", "error_stack")

    def __init__(self, lexer: Lexer, statement: Statement) -> None:
        self.lexer = lexer
        self.statement = statement

        self.idx = -1
        self.error_stack: collections.deque[str] = collections.deque()

    def syntax_error(self, message: t.Optional[str] = None) -> t.NoReturn:
        toks = self.statement.tokens
        columns: t.Iterable[int]

        if self.idx == -1:
            columns = toks[0].columns if toks else [0]
        elif self.idx >= len(toks):
            columns = [len(self.statement.text.rstrip())]
        else:
            columns = toks[self.idx].columns

        if message is None:
            if self.error_stack:
                message = f"Expected {self.error_stack.popleft()!r} was not found"
            else:
                message = "Unexpected token encountered while parsing"
        raise self.lexer.error(message, self.statement.line_no, columns)

    def next_token(self) -> t.Optional[tokens.Token]:
        self.idx += 1

        if len(self.statement.tokens) <= self.idx:
            return None

        return self.statement.tokens[self.idx]

    def peek_next_token(self) -> t.Optional[tokens.Token]:
        token = self.next_token()
        self.idx -= 1
        return token

    def at_end(self) -> bool:
        return self.peek_next_token() is None

    def expect(self, what: str, *types: tokens.TokenType) -> tokens.Token:
        """Consume the next token, which must be one of ``types``."""
        self.error_stack.appendleft(what)
        token = self.next_token()
        if token is None or token.type not in types:
            self.syntax_error()
        self.error_stack.popleft()
        return token

    def expect_end(self) -> None:
        if not self.at_end():
            self.next_token()
            self.syntax_error("Unexpected trailing token")
