"""Dialect flags that switch non-ISO syntax on and off."""

from __future__ import annotations

import dataclasses
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Literal, get_args

__all__ = [
    "DIALECT_FLAGS",
    "DialectOptions",
    "Profile",
    "UnknownFlagError",
]

Profile = Literal["iso", "swi"]

DIALECT_FLAGS: tuple[str, ...] = (
    "dicts",
    "allow_compounds_with_zero_arguments",
    "allow_arg_precedence_geq_1000",
    "allow_operator_as_operand",
    "allow_integer_exponential_notation",
    "digit_groups",
    "shebang",
    "unicode_character_escape",
    "missing_closing_backslash",
    "single_quote_char_constant",
    "tab_in_quotes",
    "nested_block_comments",
    "deduce_operators",
)
"""Every known flag, in documentation order. New flags are appended here."""

# Flags the swi profile leaves off.
_SWI_OFF = frozenset({"deduce_operators"})


class UnknownFlagError(ValueError):
    """A dialect flag or profile name that is not registered."""


@dataclass(frozen=True, kw_only=True)
class DialectOptions:
    """The resolved set of dialect flags.

    Build one with `DialectOptions.for_profile` and refine it with `with_flags`;
    the iso profile turns every flag off, the swi profile turns every flag on
    except `deduce_operators`.
    """

    profile: Profile = "iso"
    dicts: bool = False
    allow_compounds_with_zero_arguments: bool = False
    allow_arg_precedence_geq_1000: bool = False
    allow_operator_as_operand: bool = False
    allow_integer_exponential_notation: bool = False
    digit_groups: bool = False
    shebang: bool = False
    unicode_character_escape: bool = False
    missing_closing_backslash: bool = False
    single_quote_char_constant: bool = False
    tab_in_quotes: bool = False
    nested_block_comments: bool = False
    deduce_operators: bool = False

    @classmethod
    def for_profile(cls, profile: str) -> DialectOptions:
        """Return the preset for `profile` (``iso`` or ``swi``)."""
        if profile not in get_args(Profile):
            raise UnknownFlagError(f"Unknown dialect profile {profile!r}")
        if profile == "iso":
            return cls(profile="iso")
        return cls(profile="swi", **{flag: flag not in _SWI_OFF for flag in DIALECT_FLAGS})

    def with_flags(self, flags: Mapping[str, bool]) -> DialectOptions:
        """Return a copy with the given flags overridden; unknown names are errors."""
        for name in flags:
            if name not in DIALECT_FLAGS:
                raise UnknownFlagError(f"Unknown dialect flag {name!r}")
        return dataclasses.replace(self, **flags)

    def as_dict(self) -> dict[str, bool]:
        """Return the flag values keyed by flag name."""
        return {flag: getattr(self, flag) for flag in DIALECT_FLAGS}
