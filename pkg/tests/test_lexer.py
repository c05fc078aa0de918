import pytest

from pymfd import errors
from pymfd import lexer
from pymfd import tokens


def _types(text):
    return [token.type for token in lexer.Lexer(text).tokenize()]


def test_assignment_tokens():
    assert _types("grid_sizes = 128, 256\n") == [
        tokens.TokenType.IDENTIFIER,
        tokens.TokenType.EQUALS,
        tokens.TokenType.INT_LITERAL,
        tokens.TokenType.COMMA,
        tokens.TokenType.INT_LITERAL,
        tokens.TokenType.NEWLINE,
    ]


def test_comments_are_skipped():
    assert _types("# comment only\nseed = 1 # trailing\n") == [
        tokens.TokenType.NEWLINE,
        tokens.TokenType.IDENTIFIER,
        tokens.TokenType.EQUALS,
        tokens.TokenType.INT_LITERAL,
        tokens.TokenType.NEWLINE,
    ]


def test_numbers_with_signs_and_exponents():
    values = [token.value for token in lexer.Lexer("-3 2.5 1e-9 +4").tokenize()]
    assert values == [-3, 2.5, 1e-9, 4]
    assert [type(v) for v in values] == [int, float, float, int]


def test_width_suffix_lexes_as_adjacent_identifier():
    number, symbol = lexer.Lexer("128H").tokenize()
    assert isinstance(number, tokens.IntToken) and number.value == 128
    assert isinstance(symbol, tokens.IdentifierToken) and symbol.value == "H"
    assert symbol.at == number.at + number.width


def test_paths_and_suite_names_are_identifiers():
    values = [token.value for token in lexer.Lexer("out/run-1 N-body ./data.cmdsnap").tokenize()]
    assert values == ["out/run-1", "N-body", "./data.cmdsnap"]


def test_string_literal_strips_quotes_and_escapes():
    (token,) = lexer.Lexer('"say \\"hi\\""').tokenize()
    assert isinstance(token, tokens.StringToken)
    assert token.value == 'say "hi"'
    assert token.width == 12


def test_slice_triple_tokens():
    assert _types("z:0:5") == [
        tokens.TokenType.IDENTIFIER,
        tokens.TokenType.COLON,
        tokens.TokenType.INT_LITERAL,
        tokens.TokenType.COLON,
        tokens.TokenType.INT_LITERAL,
    ]


def test_unexpected_characters_are_marked_with_carets():
    with pytest.raises(errors.ParseError) as ex:
        lexer.Lexer("seed = 1\nmap_size = $4 ;\n", "run.cfg").tokenize()
    assert str(ex.value) == (
        "run.cfg:2: Unexpected characters encountered during lexing\n"
        "    map_size = $4 ;\n"
        + " " * 15
        + "^  ^"
    )


def test_unclosed_string_raises_ParseError():
    with pytest.raises(errors.ParseError):
        lexer.Lexer('output = "abc\n').tokenize()


def test_statements_group_tokens_by_line():
    statements = lexer.Lexer("a = 1\n\n# skip\nb = 2\n").statements()
    assert [(s.line_no, s.text) for s in statements] == [(1, "a = 1"), (4, "b = 2")]


def test_string_literal_keeps_other_backslashes():
    (token,) = lexer.Lexer('"C:\\data\\run1"').tokenize()
    assert token.value == "C:\\data\\run1"


def test_string_literal_ending_in_escaped_backslash():
    statement_tokens = lexer.Lexer('"out\\\\" "next"').tokenize()
    assert [token.value for token in statement_tokens] == ["out\\", "next"]
    assert statement_tokens[0].width == 7
