import pytest

from prolint.dialect import DIALECT_FLAGS, DialectOptions, UnknownFlagError
from prolint.lexer import LexError
from prolint.parser import parse_source

SWI = DialectOptions.for_profile("swi")


def test_iso_profile_turns_everything_off() -> None:
    iso = DialectOptions.for_profile("iso")
    assert iso.profile == "iso"
    assert not any(iso.as_dict().values())


def test_swi_profile() -> None:
    flags = SWI.as_dict()
    assert list(flags) == list(DIALECT_FLAGS)
    assert flags.pop("deduce_operators") is False
    assert all(flags.values())


def test_with_flags() -> None:
    updated = SWI.with_flags({"dicts": False, "deduce_operators": True})
    assert updated.profile == "swi"
    assert not updated.dicts
    assert updated.deduce_operators
    assert SWI.dicts


def test_unknown_flag() -> None:
    with pytest.raises(UnknownFlagError, match="Unknown dialect flag 'sparkles'"):
        SWI.with_flags({"sparkles": True})


def test_unknown_profile() -> None:
    with pytest.raises(UnknownFlagError, match="Unknown dialect profile 'gnu'"):
        DialectOptions.for_profile("gnu")


def _accepts(source: str, dialect: DialectOptions) -> bool:
    try:
        outcome = parse_source(source, dialect)
    except LexError:
        return False
    return not outcome.errors


# Each source needs its flag: it is accepted under swi and rejected once the
# flag alone is switched off.
GATED = [
    ("dicts", "X = point{x: 1}.\n"),
    ("allow_compounds_with_zero_arguments", "foo() :- true.\n"),
    ("allow_arg_precedence_geq_1000", "foo(a :- b).\n"),
    ("allow_operator_as_operand", "X = \\+ .\n"),
    ("allow_integer_exponential_notation", "X = 1e3.\n"),
    ("digit_groups", "X = 1_000.\n"),
    ("shebang", "#!/usr/bin/env swipl\na.\n"),
    ("unicode_character_escape", "X = '\\u0041'.\n"),
    ("missing_closing_backslash", "X = '\\x41'.\n"),
    ("single_quote_char_constant", "X = 0''.\n"),
    ("tab_in_quotes", "X = 'a\tb'.\n"),
    ("nested_block_comments", "/* a /* b */ c */\nx.\n"),
]


def test_every_flag_is_gated() -> None:
    assert {flag for flag, _ in GATED} | {"deduce_operators"} == set(DIALECT_FLAGS)


@pytest.mark.parametrize(("flag", "source"), GATED)
def test_flag_gates_syntax(flag: str, source: str) -> None:
    assert _accepts(source, SWI)
    assert not _accepts(source, SWI.with_flags({flag: False}))


def test_deduce_operators_gates_unknown_operators() -> None:
    source = "foo bar.\n"
    assert not _accepts(source, SWI)
    assert _accepts(source, SWI.with_flags({"deduce_operators": True}))
