import re

import pytest

from prolint import _quoting
from prolint.dialect import DialectOptions
from prolint.lexer import (
    LexError,
    ParseTimeout,
    Token,
    classify_variable,
    layout_of_line,
    line_indentation,
    tokenize,
)

ISO = DialectOptions.for_profile("iso")
SWI = DialectOptions.for_profile("swi")

_WORD = re.compile(r"\w")


def _pairs(source: str, dialect: DialectOptions = ISO) -> list[tuple[str, str]]:
    return [(t.kind, t.text) for t in tokenize(source, dialect) if t.kind != "eof"]


# (source, profile, expected (kind, text) pairs)
TOKEN_CASES: list[tuple[str, str, list[tuple[str, str]]]] = [
    # variables
    ("_a", "iso", [("variable", "_a")]),
    ("_", "iso", [("variable", "_")]),
    ("X", "iso", [("variable", "X")]),
    ("Xs_1", "iso", [("variable", "Xs_1")]),
    ("_123", "iso", [("variable", "_123")]),
    ("ABC", "iso", [("variable", "ABC")]),
    ("Ärger", "iso", [("variable", "Ärger")]),
    # letter-digit names
    ("abc", "iso", [("name", "abc")]),
    ("aB_9", "iso", [("name", "aB_9")]),
    ("a", "iso", [("name", "a")]),
    ("été", "iso", [("name", "été")]),
    ("end.", "iso", [("name", "end"), ("end", ".")]),
    # quoted names
    ("'hello world'", "iso", [("name", "'hello world'")]),
    ("'it''s'", "iso", [("name", "'it''s'")]),
    ("'a\\nb'", "iso", [("name", "'a\\nb'")]),
    ("'\\\\'", "iso", [("name", "'\\\\'")]),
    ("''", "iso", [("name", "''")]),
    ("'\\''", "iso", [("name", "'\\''")]),
    ("'\\x41\\'", "iso", [("name", "'\\x41\\'")]),
    ("'\\101\\'", "iso", [("name", "'\\101\\'")]),
    ("'[]'", "iso", [("name", "'[]'")]),
    ("'\\u0041'", "swi", [("name", "'\\u0041'")]),
    ("'\\U0001F600'", "swi", [("name", "'\\U0001F600'")]),
    ("'\\x41'", "swi", [("name", "'\\x41'")]),
    ("'a\\\nb'", "iso", [("name", "'a\\\nb'")]),
    # solo and punctuation
    ("!", "iso", [("name", "!")]),
    (";", "iso", [("name", ";")]),
    (",", "iso", [("comma", ",")]),
    ("|", "iso", [("bar", "|")]),
    ("[]", "iso", [("open_list", "["), ("close_list", "]")]),
    ("{}", "iso", [("open_curly", "{"), ("close_curly", "}")]),
    ("(", "iso", [("open_paren", "(")]),
    (")", "iso", [("close_paren", ")")]),
    ("a(", "iso", [("name", "a"), ("open_ct", "(")]),
    ("a (", "iso", [("name", "a"), ("open_paren", "(")]),
    ("'q'(", "iso", [("name", "'q'"), ("open_ct", "(")]),
    ("X(", "iso", [("variable", "X"), ("open_paren", "(")]),
    (".(", "iso", [("name", "."), ("open_ct", "(")]),
    # symbol-char names
    ("=", "iso", [("name", "=")]),
    ("=..", "iso", [("name", "=..")]),
    ("\\+", "iso", [("name", "\\+")]),
    (":-", "iso", [("name", ":-")]),
    ("a +/* c */ b", "iso", [("name", "a"), ("name", "+"), ("name", "b")]),
    ("=/*c*/=", "iso", [("name", "="), ("name", "=")]),
    ("+/-", "iso", [("name", "+/-")]),
    ("?-", "iso", [("name", "?-")]),
    ("-->", "iso", [("name", "-->")]),
    ("@>=", "iso", [("name", "@>=")]),
    ("+-*/", "iso", [("name", "+-*/")]),
    ("\\", "iso", [("name", "\\")]),
    ("$", "iso", [("name", "$")]),
    ("a$b", "iso", [("name", "a"), ("name", "$"), ("name", "b")]),
    ("X==Y", "iso", [("variable", "X"), ("name", "=="), ("variable", "Y")]),
    ("X=..Y", "iso", [("variable", "X"), ("name", "=.."), ("variable", "Y")]),
    ("a:-b", "iso", [("name", "a"), ("name", ":-"), ("name", "b")]),
    ("a:b:c", "iso", [("name", "a"), ("name", ":"), ("name", "b"), ("name", ":"), ("name", "c")]),
    ("- 1", "iso", [("name", "-"), ("integer", "1")]),
    ("-1", "iso", [("name", "-"), ("integer", "1")]),
    # end token
    ("a.", "iso", [("name", "a"), ("end", ".")]),
    ("a.\n", "iso", [("name", "a"), ("end", ".")]),
    ("a.%c", "iso", [("name", "a"), ("end", ".")]),
    ("a .", "iso", [("name", "a"), ("end", ".")]),
    ("a.b", "iso", [("name", "a"), ("name", "."), ("name", "b")]),
    ("a. b.", "iso", [("name", "a"), ("end", "."), ("name", "b"), ("end", ".")]),
    ("p:-q.", "iso", [("name", "p"), ("name", ":-"), ("name", "q"), ("end", ".")]),
    (
        "X = 'a'.",
        "iso",
        [("variable", "X"), ("name", "="), ("name", "'a'"), ("end", ".")],
    ),
    # integers
    ("0", "iso", [("integer", "0")]),
    ("42", "iso", [("integer", "42")]),
    ("007", "iso", [("integer", "007")]),
    ("0x1F", "iso", [("integer", "0x1F")]),
    ("0o17", "iso", [("integer", "0o17")]),
    ("0b101", "iso", [("integer", "0b101")]),
    ("0xg", "iso", [("integer", "0"), ("name", "xg")]),
    ("1.", "iso", [("integer", "1"), ("end", ".")]),
    ("1.x", "iso", [("integer", "1"), ("name", "."), ("name", "x")]),
    ("1_000", "iso", [("integer", "1"), ("variable", "_000")]),
    ("1_000", "swi", [("integer", "1_000")]),
    ("1_000_000", "swi", [("integer", "1_000_000")]),
    # floats
    ("1.5", "iso", [("float", "1.5")]),
    ("0.5", "iso", [("float", "0.5")]),
    ("1.5e10", "iso", [("float", "1.5e10")]),
    ("1.5E-3", "iso", [("float", "1.5E-3")]),
    ("1.0e+3", "iso", [("float", "1.0e+3")]),
    ("1e3", "iso", [("integer", "1"), ("name", "e3")]),
    ("1e3", "swi", [("float", "1e3")]),
    ("1.0e3", "swi", [("float", "1.0e3")]),
    # character codes
    ("0'a", "iso", [("char_code_constant", "0'a")]),
    ("0' ", "iso", [("char_code_constant", "0' ")]),
    ("0'''", "iso", [("char_code_constant", "0'''")]),
    ("0''", "iso", [("integer", "0"), ("name", "''")]),
    ("0''", "swi", [("char_code_constant", "0''")]),
    ("0'\\n", "iso", [("char_code_constant", "0'\\n")]),
    ("0'\\\\", "iso", [("char_code_constant", "0'\\\\")]),
    # strings
    ('"abc"', "iso", [("double_quoted", '"abc"')]),
    ('"a""b"', "iso", [("double_quoted", '"a""b"')]),
    ('""', "iso", [("double_quoted", '""')]),
    ('"it\'s"', "iso", [("double_quoted", '"it\'s"')]),
    ('"\\t"', "iso", [("double_quoted", '"\\t"')]),
    ('"\t"', "swi", [("double_quoted", '"\t"')]),
    ("`abc`", "iso", [("back_quoted", "`abc`")]),
    # compound structure
    (
        "foo(X, Y)",
        "iso",
        [
            ("name", "foo"),
            ("open_ct", "("),
            ("variable", "X"),
            ("comma", ","),
            ("variable", "Y"),
            ("close_paren", ")"),
        ],
    ),
    ("foo()", "iso", [("name", "foo"), ("open_ct", "("), ("close_paren", ")")]),
    (
        "[H|T]",
        "iso",
        [
            ("open_list", "["),
            ("variable", "H"),
            ("bar", "|"),
            ("variable", "T"),
            ("close_list", "]"),
        ],
    ),
    ("{a}", "iso", [("open_curly", "{"), ("name", "a"), ("close_curly", "}")]),
    ("a , b", "iso", [("name", "a"), ("comma", ","), ("name", "b")]),
    # dicts
    (
        "a{b:1}",
        "swi",
        [
            ("name", "a"),
            ("dict_open", "{"),
            ("name", "b"),
            ("name", ":"),
            ("integer", "1"),
            ("close_curly", "}"),
        ],
    ),
    (
        "a{b:1}",
        "iso",
        [
            ("name", "a"),
            ("open_curly", "{"),
            ("name", "b"),
            ("name", ":"),
            ("integer", "1"),
            ("close_curly", "}"),
        ],
    ),
    ("a {b}", "swi", [("name", "a"), ("open_curly", "{"), ("name", "b"), ("close_curly", "}")]),
    ("X{}", "swi", [("variable", "X"), ("dict_open", "{"), ("close_curly", "}")]),
    ("_{}", "swi", [("variable", "_"), ("dict_open", "{"), ("close_curly", "}")]),
    # layout and comments
    ("a% comment\nb", "iso", [("name", "a"), ("name", "b")]),
    ("a/* c */b", "iso", [("name", "a"), ("name", "b")]),
    ("/* c */", "iso", []),
    ("%only", "iso", []),
    ("", "iso", []),
    ("   \n\t ", "iso", []),
    ("a /* x */ . ", "iso", [("name", "a"), ("end", ".")]),
    ("a\r\nb", "iso", [("name", "a"), ("name", "b")]),
    ("/* a /* b */ c */", "swi", []),
    ("/* a /* b */ c */", "iso", [("name", "c"), ("name", "*/")]),
    ("#!/usr/bin/env swipl\na.", "swi", [("name", "a"), ("end", ".")]),
    ("\ufeffa.", "iso", [("name", "a"), ("end", ".")]),
]


def _mergeable(left: Token, right: Token) -> bool:
    """Whether two touching tokens could have been read as one."""
    if right.layout_before or left.kind != right.kind:
        return False
    if left.kind == "name" and not left.text.startswith("'") and not right.text.startswith("'"):
        symbols = _quoting.SYMBOL_CHARS
        if left.text[-1] in symbols and right.text[0] in symbols:
            return True
        return bool(_WORD.match(left.text[-1]) and _WORD.match(right.text[0]))
    return left.kind in ("variable", "integer")


def test_token_case_count() -> None:
    assert len(TOKEN_CASES) >= 100


@pytest.mark.parametrize(("source", "profile", "expected"), TOKEN_CASES)
def test_tokens(source: str, profile: str, expected: list[tuple[str, str]]) -> None:
    assert _pairs(source, DialectOptions.for_profile(profile)) == expected


@pytest.mark.parametrize(("source", "profile", "expected"), TOKEN_CASES)
def test_lossless_and_maximal_munch(
    source: str, profile: str, expected: list[tuple[str, str]]
) -> None:
    del expected
    tokens = tokenize(source, DialectOptions.for_profile(profile))
    assert "".join(t.source_text for t in tokens) == source
    for left, right in zip(tokens, tokens[1:], strict=False):
        assert not _mergeable(left, right), (left, right)


@pytest.mark.parametrize(
    ("source", "profile", "message"),
    [
        ("'\\u0041'", "iso", "Unicode character escapes are not enabled"),
        ("'\\x41'", "iso", "Escape sequence lacks the closing backslash"),
        ("'\\101'", "iso", "Escape sequence lacks the closing backslash"),
        ('"\t"', "iso", "Tab character inside quotes"),
        ("0'\t", "iso", "Tab character in character code constant"),
        ("'abc", "iso", "Unterminated quoted token"),
        ('"abc', "swi", "Unterminated quoted token"),
        ("/* abc", "iso", "Unterminated block comment"),
        ("/* a /* b */", "swi", "Unterminated block comment"),
        ("'\\q'", "swi", "Invalid escape sequence"),
        ("'\\u41'", "swi", "Invalid escape sequence"),
        ("'\\x'", "swi", "Invalid escape sequence"),
        ("a\x01", "iso", "Character '\\x01' is outside the accepted character set"),
    ],
)
def test_lex_errors(source: str, profile: str, message: str) -> None:
    with pytest.raises(LexError) as exc_info:
        tokenize(source, DialectOptions.for_profile(profile))
    assert exc_info.value.message == message


def test_lex_error_renders_location() -> None:
    with pytest.raises(LexError) as exc_info:
        tokenize("ok.\nX = 'abc\\q'.", ISO)
    rendered = str(exc_info.value)
    assert rendered.startswith("Invalid escape sequence (line 2, column 9)")
    assert "X = 'abc\\q'." in rendered
    assert exc_info.value.span.line_start == 2


def test_empty_source_has_no_tokens() -> None:
    assert tokenize("", ISO) == []


def test_trailing_layout_goes_to_eof() -> None:
    tokens = tokenize("a.\n% done\n", ISO)
    assert [t.kind for t in tokens] == ["name", "end", "eof"]
    eof = tokens[-1]
    assert eof.text == ""
    assert [item.kind for item in eof.layout_before] == ["newline", "line_comment", "newline"]


def test_no_eof_without_trailing_layout() -> None:
    assert [t.kind for t in tokenize("a.", ISO)] == ["name", "end"]


def test_line_comment_excludes_line_break() -> None:
    tokens = tokenize("% note\r\na", ISO)
    items = tokens[0].layout_before
    assert [(i.kind, i.text) for i in items] == [("line_comment", "% note"), ("newline", "\r\n")]


def test_shebang_is_layout() -> None:
    tokens = tokenize("#!/usr/bin/env swipl\na.\n", SWI)
    items = tokens[0].layout_before
    assert items[0].kind == "shebang"
    assert items[0].text == "#!/usr/bin/env swipl"
    assert items[1].kind == "newline"


def test_byte_order_mark_is_layout() -> None:
    tokens = tokenize("\ufeffa.", ISO)
    assert tokens[0].layout_before[0].kind == "bom"
    assert tokens[0].span.byte_start == 3


def test_spans() -> None:
    tokens = tokenize("a.\nfoo(é).", ISO)
    foo = tokens[2]
    assert (foo.span.line_start, foo.span.col_start) == (2, 1)
    assert foo.span.byte_start == 3
    accented = tokens[4]
    assert accented.text == "é"
    assert (accented.span.col_start, accented.span.col_end) == (5, 6)
    assert accented.span.byte_end - accented.span.byte_start == 2


def test_multiline_token_span() -> None:
    (token,) = tokenize('"a\nbc"', SWI)
    assert (token.span.line_start, token.span.line_end) == (1, 2)
    assert token.span.col_end == 4


def test_token_properties() -> None:
    tokens = tokenize("a :-\n  b.", ISO)
    b = tokens[2]
    assert b.has_newline_before
    assert b.source_text == "\n  b"
    assert not tokens[1].has_newline_before


@pytest.mark.parametrize(
    ("text", "expected"), [("_", "anonymous"), ("_a", "named"), ("X", "named")]
)
def test_classify_variable(text: str, expected: str) -> None:
    (token,) = tokenize(text, ISO)
    assert classify_variable(token) == expected


def test_classify_variable_rejects_other_tokens() -> None:
    (token,) = tokenize("a", ISO)
    with pytest.raises(ValueError, match="Expected a variable token"):
        classify_variable(token)


def test_layout_of_line() -> None:
    tokens = tokenize("a :-\n    b,\n\t  c.\n", ISO)
    assert layout_of_line(tokens, 1) == ()
    assert layout_of_line(tokens, 2) == (("space", 4),)
    assert layout_of_line(tokens, 3) == (("tab", 1), ("space", 2))
    assert layout_of_line(tokens, 9) == ()


def test_line_indentation_ignores_blank_lines_and_comments() -> None:
    tokens = tokenize("a :-\n   \n    b /* x\n  y */ .\n", ISO)
    assert line_indentation(tokens) == {3: (("space", 4),)}
    assert 2 in line_indentation(tokens, include_blank=True)


def test_timeout() -> None:
    with pytest.raises(ParseTimeout):
        tokenize("a " * 1000, ISO, deadline=0.0, clock=lambda: 100.0)


def test_no_timeout_before_deadline() -> None:
    tokens = tokenize("a " * 1000, ISO, deadline=200.0, clock=lambda: 100.0)
    assert len(tokens) == 1001
