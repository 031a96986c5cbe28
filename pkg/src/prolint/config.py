"""Configuration files, command-line overrides and their resolution.

A configuration file is a flat TOML table of ``key = value`` pairs. It is
looked up, in order, from the ``--config`` option, the ``PROLINT_CONFIG``
environment variable, and the first ``.prolintrc`` found walking upward from
the first target path.
"""

from __future__ import annotations

import dataclasses
import logging
import os
import tomllib
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Final, Literal, get_args

import tomli_w

from prolint.corpus import Limits
from prolint.dialect import DIALECT_FLAGS, DialectOptions, Profile
from prolint.operators import OperatorTable, OpError, apply_op_directive, default_table
from prolint.quality import QualityOptions
from prolint.style import COUNT_OPTIONS, INFER, OFF, YES_NO_OPTIONS, Check, Setting, StyleOptions

__all__ = [
    "CONFIG_ENV",
    "CONFIG_FILENAME",
    "Config",
    "ConfigError",
    "discover_config",
    "emit_config",
    "load_config_file",
    "parse_style_setting",
    "resolve_config",
]

_logger = logging.getLogger(__name__)

CONFIG_FILENAME: Final = ".prolintrc"
CONFIG_ENV: Final = "PROLINT_CONFIG"
DEFAULT_PROFILE: Final[Profile] = "swi"

OutputFormat = Literal["text", "json"]

_STYLE_KEYS = frozenset(f.name for f in dataclasses.fields(StyleOptions))
_QUALITY_KEYS = frozenset(f.name for f in dataclasses.fields(QualityOptions))
_LIMIT_KEYS = frozenset(f.name for f in dataclasses.fields(Limits))
_YES = frozenset({"yes", "true", "on"})
_NO = frozenset({"no", "false"})


class ConfigError(ValueError):
    """A configuration value or key that cannot be used.

    `context` names the offending key, and the source file when one is known.
    """

    context: str | None = None
    message: str

    def __init__(self, cause: str | Exception, *, context: str | None = None) -> None:
        """Wrap `cause`, nesting the context of another ConfigError if given one."""
        if isinstance(cause, ConfigError):
            if cause.context:
                self.context = f"{context}.{cause.context}" if context else cause.context
            else:
                self.context = context
            self.message = cause.message
        else:
            self.context = context
            self.message = str(cause)
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return the message, followed by the context if there is one."""
        if self.context:
            return f"{self.message} in '{self.context}'"
        return self.message


@dataclass(frozen=True)
class Config:
    """Everything a command needs to know besides its targets."""

    dialect: DialectOptions = field(
        default_factory=lambda: DialectOptions.for_profile(DEFAULT_PROFILE)
    )
    style: StyleOptions = field(default_factory=StyleOptions)
    quality: QualityOptions = field(default_factory=QualityOptions)
    limits: Limits = field(default_factory=Limits)
    extra_operators: tuple[str, ...] = ()
    output_format: OutputFormat = "text"
    source: Path | None = None

    def initial_table(self) -> OperatorTable:
        """Return the default operators of the dialect plus `extra_operators`."""
        table = default_table(self.dialect.profile, dicts=self.dialect.dicts)
        for entry in self.extra_operators:
            priority, specifier, name = _split_operator(entry)
            try:
                table = apply_op_directive(table, priority, specifier, name)
            except OpError as exc:
                raise ConfigError(exc, context="extra_operators") from None
        return table


def _split_operator(entry: str) -> tuple[int, str, str]:
    parts = entry.split()
    if len(parts) != 3 or not parts[0].isdigit():  # noqa: PLR2004
        raise ConfigError(
            f"Expected 'PRIORITY SPECIFIER NAME', got {entry!r}", context="extra_operators"
        )
    return int(parts[0]), parts[1], parts[2]


def _yes_no(key: str, value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in _YES | _NO:
        return value.lower() in _YES
    raise ConfigError(f"Expected yes or no, got {value!r}", context=key)


def _integer(key: str, value: object) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"Expected an integer, got {value!r}", context=key)
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().isdigit():
        return int(value)
    raise ConfigError(f"Expected an integer, got {value!r}", context=key)


def parse_style_setting(key: str, value: object) -> Setting[Any]:
    """Read one style option: ``off``, ``infer`` or a value to check against."""
    if value in (OFF, INFER):
        return value  # type: ignore[return-value]
    if key == "indent":
        if value == "tab":
            return Check("tab")
        return Check(_integer(key, value))
    if key in COUNT_OPTIONS:
        return Check(_integer(key, value))
    if key in YES_NO_OPTIONS:
        return Check(_yes_no(key, value))
    raise ConfigError("Unknown style option", context=key)


def _quality_setting(key: str, value: object) -> Setting[Any] | str:
    if key == "predicate_name_pattern":
        if not isinstance(value, str):
            raise ConfigError(f"Expected a regular expression, got {value!r}", context=key)
        return value
    if value == OFF:
        return OFF
    if key == "naming_convention_3_12":
        return Check(True) if _yes_no(key, value) else OFF  # noqa: FBT003
    return Check(value)


def _limit(key: str, value: object) -> float | int:
    if key == "timeout_seconds":
        if isinstance(value, int | float) and not isinstance(value, bool) and value > 0:
            return value
        if isinstance(value, str):
            try:
                seconds = float(value)
            except ValueError:
                pass
            else:
                if seconds > 0:
                    return seconds
        raise ConfigError(f"Expected a positive number of seconds, got {value!r}", context=key)
    number = _integer(key, value)
    if number < 1:
        raise ConfigError(f"Expected a positive integer, got {value!r}", context=key)
    return number


def _flat_value(raw: str) -> object:
    """Read one value as TOML, or as a bare word the way ``--set`` does."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return _coerce(raw)


def _flat_values(text: str) -> dict[str, Any] | None:
    """Read ``key = value`` lines whose values may be bare words, e.g. ``dialect = swi``."""
    values: dict[str, Any] = {}
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        if not sep or not key.strip() or not raw.strip():
            return None
        values[key.strip()] = _flat_value(raw.strip())
    return values


def load_config_file(path: Path) -> dict[str, Any]:
    """Read the flat table of a configuration file.

    The file is TOML; unquoted words are accepted as string values as well.
    """
    try:
        text = path.read_bytes().decode("utf-8")
    except OSError as exc:
        message = f"Cannot read configuration: {exc.strerror}"
        raise ConfigError(message, context=str(path)) from None
    except UnicodeDecodeError as exc:
        raise ConfigError(f"Configuration is not UTF-8: {exc}", context=str(path)) from None
    try:
        values = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        flat = _flat_values(text)
        if flat is None:
            raise ConfigError(f"Invalid TOML: {exc}", context=str(path)) from None
        values = flat
    for key, value in values.items():
        if isinstance(value, dict):
            raise ConfigError("Nested tables are not supported", context=f"{path}:{key}")
    return values


def discover_config(
    start: Path | None = None, *, environ: Mapping[str, str] | None = None
) -> Path | None:
    """Find the configuration file that applies to `start`, if any."""
    environ = os.environ if environ is None else environ
    if environ.get(CONFIG_ENV):
        return Path(environ[CONFIG_ENV])
    directory = (start or Path.cwd()).resolve()
    if not directory.is_dir():
        directory = directory.parent
    for candidate in (directory, *directory.parents):
        path = candidate / CONFIG_FILENAME
        if path.is_file():
            _logger.debug("using configuration %s", path)
            return path
    return None


def _coerce(value: str) -> object:
    """Interpret a bare command-line value."""
    text = value.strip()
    if text.lstrip("-").isdigit():
        return int(text)
    return text


def _apply(values: Mapping[str, object], config: Config, *, origin: str) -> Config:
    style: dict[str, Any] = {}
    quality: dict[str, Any] = {}
    limits: dict[str, Any] = {}
    flags: dict[str, bool] = {}
    changes: dict[str, Any] = {}
    for key, value in values.items():
        if key == "dialect":
            continue
        if key in DIALECT_FLAGS:
            flags[key] = _yes_no(key, value)
        elif key in _STYLE_KEYS:
            style[key] = parse_style_setting(key, value)
        elif key in _QUALITY_KEYS:
            quality[key] = _quality_setting(key, value)
        elif key in _LIMIT_KEYS:
            limits[key] = _limit(key, value)
        elif key == "extra_operators":
            entries = [value] if isinstance(value, str) else value
            if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
                raise ConfigError("Expected a list of strings", context=key)
            for entry in entries:
                _split_operator(entry)
            changes["extra_operators"] = (*config.extra_operators, *entries)
        elif key == "format":
            if value not in get_args(OutputFormat):
                raise ConfigError(f"Expected text or json, got {value!r}", context=key)
            changes["output_format"] = value
        else:
            raise ConfigError("Unknown configuration key", context=f"{origin}:{key}")
    try:
        return dataclasses.replace(
            config,
            dialect=config.dialect.with_flags(flags),
            style=dataclasses.replace(config.style, **style),
            quality=dataclasses.replace(config.quality, **quality),
            limits=dataclasses.replace(config.limits, **limits),
            **changes,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(exc, context=origin) from None


def _profile(value: object, *, origin: str) -> Profile:
    if value not in get_args(Profile):
        raise ConfigError(f"Expected iso or swi, got {value!r}", context=f"{origin}:dialect")
    return value  # type: ignore[return-value]


def resolve_config(
    *,
    config_path: Path | None = None,
    dialect: str | None = None,
    overrides: Mapping[str, str] | None = None,
    start: Path | None = None,
    environ: Mapping[str, str] | None = None,
) -> Config:
    """Combine defaults, the configuration file and command-line values.

    Command-line values win over the file, which wins over the defaults of the
    dialect profile (``swi`` unless stated otherwise).
    """
    path = config_path or discover_config(start, environ=environ)
    file_values = load_config_file(path) if path is not None else {}
    cli_values = {key: _coerce(value) for key, value in (overrides or {}).items()}

    profile: Profile = DEFAULT_PROFILE
    if "dialect" in file_values:
        profile = _profile(file_values["dialect"], origin=str(path))
    if "dialect" in cli_values:
        profile = _profile(cli_values["dialect"], origin="--set")
    if dialect is not None:
        profile = _profile(dialect, origin="--dialect")

    config = Config(dialect=DialectOptions.for_profile(profile), source=path)
    config = _apply(file_values, config, origin=str(path))
    return _apply(cli_values, config, origin="--set")


def _toml_setting(setting: Setting[Any]) -> object:
    if isinstance(setting, Check):
        return setting.value
    return setting


def emit_config(style: StyleOptions, dialect: DialectOptions) -> str:
    """Render style options and the dialect as a configuration file.

    Flags are written only where they differ from the profile defaults.
    """
    defaults = DialectOptions.for_profile(dialect.profile).as_dict()
    values: dict[str, Any] = {"dialect": dialect.profile}
    values.update(
        (flag, enabled) for flag, enabled in dialect.as_dict().items() if defaults[flag] != enabled
    )
    values.update((name, _toml_setting(setting)) for name, setting in style.items())
    return tomli_w.dumps(values)
