import pytest

from prolint.diagnostics import (
    RULES,
    SYNTAX_ERROR,
    make_diagnostic,
    sort_diagnostics,
    syntax_diagnostic,
)
from prolint.dialect import DialectOptions
from prolint.lexer import LexError, SourceSpan, tokenize
from prolint.parser import parse_source

SWI = DialectOptions.for_profile("swi")


def _span(start: int, line: int = 1, col: int = 1) -> SourceSpan:
    return SourceSpan(
        byte_start=start,
        byte_end=start + 1,
        line_start=line,
        col_start=col,
        line_end=line,
        col_end=col + 1,
    )


def test_catalogue() -> None:
    assert RULES[SYNTAX_ERROR].severity == "error"
    assert {info.severity for rule, info in RULES.items() if rule != SYNTAX_ERROR} == {"warning"}
    assert {"cov_2_1", "cov_2_14", "cov_3_1", "cov_3_4", "cov_3_12"} <= RULES.keys()


def test_make_diagnostic() -> None:
    diagnostic = make_diagnostic("cov_2_3", "Line is too long", _span(10, 2, 5), file="a.pl")
    assert diagnostic.severity == "warning"
    assert diagnostic.format_text() == "a.pl:2:5: warning cov_2_3 Line is too long"
    assert diagnostic.to_dict() == {
        "file": "a.pl",
        "line": 2,
        "col": 5,
        "end_line": 2,
        "end_col": 6,
        "rule": "cov_2_3",
        "severity": "warning",
        "message": "Line is too long",
    }


def test_unknown_rule() -> None:
    with pytest.raises(ValueError, match="Unknown rule 'cov_9_9'"):
        make_diagnostic("cov_9_9", "nope", _span(0))


def test_sort_order() -> None:
    diagnostics = [
        make_diagnostic("cov_2_5", "m", _span(5), file="b.pl"),
        make_diagnostic("cov_2_3", "m", _span(5), file="a.pl"),
        make_diagnostic("cov_2_1", "m", _span(9), file="a.pl"),
        make_diagnostic("cov_2_1", "m", _span(5), file="a.pl"),
    ]
    ordered = sort_diagnostics(diagnostics)
    assert [(d.file, d.span.byte_start, d.rule_id) for d in ordered] == [
        ("a.pl", 5, "cov_2_1"),
        ("a.pl", 5, "cov_2_3"),
        ("a.pl", 9, "cov_2_1"),
        ("b.pl", 5, "cov_2_5"),
    ]


def test_syntax_diagnostics() -> None:
    (error,) = parse_source("a.\nfoo(.\n", SWI).errors
    diagnostic = syntax_diagnostic(error, file="x.pl")
    assert diagnostic.rule_id == SYNTAX_ERROR
    assert diagnostic.severity == "error"
    assert diagnostic.message == error.message
    assert diagnostic.span.line_start == 2

    with pytest.raises(LexError) as info:
        tokenize("X = 'open\n", SWI)
    assert syntax_diagnostic(info.value).rule_id == SYNTAX_ERROR
