import re
import tomllib
from pathlib import Path

import pytest

from prolint.config import (
    CONFIG_ENV,
    CONFIG_FILENAME,
    Config,
    ConfigError,
    discover_config,
    emit_config,
    load_config_file,
    parse_style_setting,
    resolve_config,
)
from prolint.corpus import Limits
from prolint.dialect import DialectOptions
from prolint.style import INFER, OFF, Check, StyleOptions

SWI = DialectOptions.for_profile("swi")


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults(tmp_path: Path) -> None:
    config = resolve_config(start=tmp_path, environ={})
    assert config.dialect == SWI
    assert config.style == StyleOptions()
    assert config.limits == Limits()
    assert config.output_format == "text"
    assert config.source is None


class TestDiscovery:
    def test_walks_upward(self, tmp_path: Path) -> None:
        config = _write(tmp_path / CONFIG_FILENAME, "indent = 2\n")
        nested = tmp_path / "a" / "b"
        nested.mkdir(parents=True)
        assert discover_config(nested, environ={}) == config
        assert discover_config(_write(nested / "x.pl", "a.\n"), environ={}) == config

    def test_environment_wins(self, tmp_path: Path) -> None:
        _write(tmp_path / CONFIG_FILENAME, "")
        other = tmp_path / "elsewhere.toml"
        assert discover_config(tmp_path, environ={CONFIG_ENV: str(other)}) == other

    def test_nothing_found(self, tmp_path: Path) -> None:
        assert discover_config(tmp_path, environ={}) is None


def test_file_values(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "prolint.toml",
        "\n".join(
            [
                'dialect = "iso"',
                "dicts = true",
                "indent = 2",
                "max_line_length = 100",
                'max_subgoals = "off"',
                'newline_after_subgoal = "no"',
                'predicate_naming_style = "underscore"',
                'naming_convention_3_12 = "yes"',
                'extra_operators = ["700 xfx ==="]',
                'format = "json"',
                "timeout_seconds = 2.5",
                "max_bytes = 4096",
                "",
            ]
        ),
    )
    config = resolve_config(config_path=path, environ={})
    assert config.source == path
    assert config.dialect == DialectOptions.for_profile("iso").with_flags({"dicts": True})
    assert config.style == StyleOptions(
        indent=Check(2),
        max_line_length=Check(100),
        max_subgoals=OFF,
        newline_after_subgoal=Check(False),
    )
    assert config.quality.predicate_naming_style == Check("underscore")
    assert config.quality.naming_convention_3_12 == Check(True)
    assert config.limits == Limits(timeout_seconds=2.5, max_bytes=4096)
    assert config.output_format == "json"
    op = config.initial_table().infix_op("===")
    assert op is not None
    assert op.priority == 700


def test_bare_word_values(tmp_path: Path) -> None:
    path = _write(
        tmp_path / CONFIG_FILENAME,
        "# house style\nmax_line_length = 80\ndialect = iso\n\nindent = tab\n"
        "max_subgoals = off\nnewline_after_subgoal = no\nextra_operators = 700 xfx ===\n",
    )
    assert load_config_file(path) == {
        "max_line_length": 80,
        "dialect": "iso",
        "indent": "tab",
        "max_subgoals": "off",
        "newline_after_subgoal": "no",
        "extra_operators": "700 xfx ===",
    }
    config = resolve_config(start=tmp_path, environ={})
    assert config.dialect.profile == "iso"
    assert config.style.max_line_length == Check(80)
    assert config.style.indent == Check("tab")
    assert config.style.max_subgoals == OFF
    assert config.style.newline_after_subgoal == Check(False)
    assert config.initial_table().infix_op("===") is not None


def test_quoted_and_bare_values_mix(tmp_path: Path) -> None:
    path = _write(tmp_path / CONFIG_FILENAME, 'dialect = swi\nformat = "json"\ndicts = false\n')
    assert load_config_file(path) == {"dialect": "swi", "format": "json", "dicts": False}


def test_command_line_wins(tmp_path: Path) -> None:
    path = _write(tmp_path / CONFIG_FILENAME, 'dialect = "iso"\nindent = 2\n')
    config = resolve_config(
        overrides={"indent": "8", "dialect": "swi", "dicts": "false"}, start=tmp_path, environ={}
    )
    assert config.source == path
    assert config.style.indent == Check(8)
    assert config.dialect == SWI.with_flags({"dicts": False})

    config = resolve_config(dialect="iso", overrides={"dialect": "swi"}, start=tmp_path, environ={})
    assert config.dialect.profile == "iso"


def test_naming_convention_no_means_off(tmp_path: Path) -> None:
    config = resolve_config(overrides={"naming_convention_3_12": "no"}, start=tmp_path, environ={})
    assert config.quality.naming_convention_3_12 == OFF


@pytest.mark.parametrize(
    ("overrides", "message"),
    [
        ({"bogus": "1"}, "Unknown configuration key in '--set:bogus'"),
        ({"indent": "wide"}, "Expected an integer, got 'wide' in 'indent'"),
        ({"indent": "0"}, "Expected 'tab' or an integer in 1..16 in 'indent' in '--set'"),
        ({"newline_after_clause": "maybe"}, "Expected yes or no, got 'maybe'"),
        ({"dicts": "perhaps"}, "Expected yes or no, got 'perhaps' in 'dicts'"),
        ({"format": "xml"}, "Expected text or json, got 'xml' in 'format'"),
        ({"predicate_naming_style": "snake"}, "Unknown naming style 'snake'"),
        ({"timeout_seconds": "0"}, "Expected a positive number of seconds, got 0"),
        ({"max_bytes": "0"}, "Expected a positive integer, got 0 in 'max_bytes'"),
        (
            {"extra_operators": "700 xfx"},
            "Expected 'PRIORITY SPECIFIER NAME', got '700 xfx' in 'extra_operators'",
        ),
        ({"dialect": "gnu"}, "Expected iso or swi, got 'gnu' in '--set:dialect'"),
    ],
)
def test_invalid_overrides(tmp_path: Path, overrides: dict[str, str], message: str) -> None:
    with pytest.raises(ConfigError, match=re.escape(message)):
        resolve_config(overrides=overrides, start=tmp_path, environ={})


def test_invalid_dialect_option(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match=re.escape("got 'gnu' in '--dialect:dialect'")):
        resolve_config(dialect="gnu", start=tmp_path, environ={})


class TestFileErrors:
    def test_unknown_key(self, tmp_path: Path) -> None:
        path = _write(tmp_path / CONFIG_FILENAME, "colour = 1\n")
        with pytest.raises(ConfigError, match=re.escape(f"in '{path}:colour'")):
            resolve_config(config_path=path, environ={})

    def test_nested_table(self, tmp_path: Path) -> None:
        path = _write(tmp_path / CONFIG_FILENAME, "[style]\nindent = 2\n")
        message = f"Nested tables are not supported in '{path}:style'"
        with pytest.raises(ConfigError, match=re.escape(message)):
            load_config_file(path)

    def test_invalid_toml(self, tmp_path: Path) -> None:
        path = _write(tmp_path / CONFIG_FILENAME, "indent = \n")
        with pytest.raises(ConfigError, match="^Invalid TOML"):
            load_config_file(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="Cannot read configuration"):
            resolve_config(config_path=tmp_path / "missing.toml", environ={})

    def test_environment_file_is_used(self, tmp_path: Path) -> None:
        path = _write(tmp_path / "custom.toml", "max_line_length = 120\n")
        config = resolve_config(start=tmp_path, environ={CONFIG_ENV: str(path)})
        assert config.style.max_line_length == Check(120)


def test_invalid_extra_operator() -> None:
    with pytest.raises(ConfigError, match=re.escape("in 'extra_operators'")):
        Config(extra_operators=("700 nonsense ===",)).initial_table()


@pytest.mark.parametrize(
    ("key", "value", "expected"),
    [
        ("indent", "tab", Check("tab")),
        ("indent", 4, Check(4)),
        ("indent", "infer", INFER),
        ("max_subgoals", "off", OFF),
        ("max_rule_lines", "12", Check(12)),
        ("newline_after_clause", "yes", Check(True)),
        ("newline_after_clause", False, Check(False)),
        ("no_trailing_whitespace", "On", Check(True)),
    ],
)
def test_parse_style_setting(key: str, value: object, expected: object) -> None:
    assert parse_style_setting(key, value) == expected


def test_parse_unknown_style_setting() -> None:
    with pytest.raises(ConfigError, match=re.escape("Unknown style option in 'colour'")):
        parse_style_setting("colour", "red")


def test_config_error_context_nests() -> None:
    error = ConfigError(ConfigError("bad value", context="inner"), context="outer")
    assert str(error) == "bad value in 'outer.inner'"
    assert str(ConfigError("plain")) == "plain"


def test_emit_config_round_trips(tmp_path: Path) -> None:
    style = StyleOptions(indent=Check(2), max_subgoals=OFF, newline_after_clause=Check(False))
    dialect = SWI.with_flags({"dicts": False})
    text = emit_config(style, dialect)
    values = tomllib.loads(text)
    assert values["dialect"] == "swi"
    assert values["dicts"] is False
    assert "shebang" not in values
    assert values["indent"] == 2
    assert values["max_subgoals"] == "off"
    assert values["newline_after_clause"] is False

    path = _write(tmp_path / CONFIG_FILENAME, text)
    config = resolve_config(config_path=path, environ={})
    assert config.style == style
    assert config.dialect == dialect
