"""Escape sequences, quoted-token decoding and atom quoting."""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Literal

SYMBOL_CHARS = frozenset("+-*/\\^<>=~:.?@#&$")
SOLO_ATOMS = frozenset({"!", ";", "[]", "{}"})

EscapeKind = Literal["meta", "control", "octal", "hex", "unicode", "continuation", "unknown"]

_CONTROL = {"a": "\a", "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t", "v": "\v"}
_OCTAL_DIGITS = re.compile(r"[0-7]+")
_HEX_DIGITS = re.compile(r"[0-9a-fA-F]*")
_UNICODE_DIGITS = {"u": re.compile(r"[0-9a-fA-F]{0,4}"), "U": re.compile(r"[0-9a-fA-F]{0,8}")}
_PLAIN_RUN = {q: re.compile(rf"[^{re.escape(q)}\\]+") for q in "'\"`"}


@dataclass(frozen=True, slots=True)
class Escape:
    """One backslash escape inside a quoted token, with offsets into the scanned text."""

    kind: EscapeKind
    start: int
    end: int
    digits: str = ""
    closed: bool = True

    @property
    def code_point(self) -> int | None:
        """The code point denoted by a numeric escape, or None."""
        if self.kind == "octal":
            return int(self.digits, 8)
        if self.kind in ("hex", "unicode") and self.digits:
            return int(self.digits, 16)
        return None


def read_escape(text: str, pos: int) -> Escape:
    """Read the escape sequence starting at the backslash at `pos`.

    The reading is structural and lenient; whether the escape is acceptable is
    decided by the caller against the dialect.
    """
    n = len(text)
    if pos + 1 >= n:
        return Escape("unknown", pos, pos + 1)
    nxt = text[pos + 1]
    if nxt == "\n":
        return Escape("continuation", pos, pos + 2)
    if nxt == "\r" and text.startswith("\n", pos + 2):
        return Escape("continuation", pos, pos + 3)
    if nxt in "\\'\"`":
        return Escape("meta", pos, pos + 2, nxt)
    if nxt in _CONTROL:
        return Escape("control", pos, pos + 2, nxt)
    if nxt in "01234567":
        match = _OCTAL_DIGITS.match(text, pos + 1)
        assert match is not None
        closed = text.startswith("\\", match.end())
        return Escape("octal", pos, match.end() + closed, match[0], closed)
    if nxt == "x":
        match = _HEX_DIGITS.match(text, pos + 2)
        assert match is not None
        closed = text.startswith("\\", match.end())
        return Escape("hex", pos, match.end() + closed, match[0], closed)
    if nxt in _UNICODE_DIGITS:
        match = _UNICODE_DIGITS[nxt].match(text, pos + 2)
        assert match is not None
        return Escape("unicode", pos, match.end(), match[0])
    return Escape("unknown", pos, pos + 2, nxt)


def scan_quoted(text: str, start: int, quote: str) -> tuple[int, list[Escape]] | None:
    """Find the end of a quoted token whose body begins at `start`.

    Returns the offset just past the closing quote and the escapes met on the
    way, or None when the input ends before the closing quote.
    """
    plain = _PLAIN_RUN[quote]
    escapes: list[Escape] = []
    pos = start
    n = len(text)
    while pos < n:
        run = plain.match(text, pos)
        if run is not None:
            pos = run.end()
            continue
        if text[pos] == quote:
            if text.startswith(quote, pos + 1):
                pos += 2
                continue
            return pos + 1, escapes
        escape = read_escape(text, pos)
        escapes.append(escape)
        pos = escape.end
    return None


def _escape_value(text: str, escape: Escape) -> str:
    if escape.kind == "continuation":
        return ""
    if escape.kind == "meta":
        return escape.digits
    if escape.kind == "control":
        return _CONTROL[escape.digits]
    code = escape.code_point
    if code is None:
        return text[escape.start + 1 : escape.end]
    return chr(code)


def _decode_body(text: str, start: int, end: int, quote: str) -> Iterator[str]:
    pos = start
    while pos < end:
        ch = text[pos]
        if ch == quote:
            # doubled quote inside the body
            yield quote
            pos += 2
        elif ch == "\\":
            escape = read_escape(text, pos)
            yield _escape_value(text, escape)
            pos = escape.end
        else:
            yield ch
            pos += 1


def decode_quoted(text: str) -> str:
    """Return the value of a quoted token given its verbatim text, quotes included."""
    return "".join(_decode_body(text, 1, len(text) - 1, text[0]))


def char_code_value(text: str) -> int:
    """Return the code point of a character code constant such as ``0'a``."""
    body = text[2:]
    if body in ("''", "'"):
        return ord("'")
    if body.startswith("\\"):
        return ord(_escape_value(body, read_escape(body, 0)))
    return ord(body)


def is_letter_digit_atom(text: str) -> bool:
    """Whether `text` is an atom that needs no quotes because it is alphanumeric."""
    return (
        bool(text)
        and text[0].isalpha()
        and not text[0].isupper()
        and all(ch.isalnum() or ch == "_" for ch in text)
    )


def is_symbol_atom(text: str) -> bool:
    """Whether `text` consists only of symbol characters and prints unquoted."""
    return (
        bool(text)
        and all(ch in SYMBOL_CHARS for ch in text)
        and "/*" not in text
        and text != "."
    )


def _escape_char(ch: str, quote: str) -> str:
    if ch in ("\\", quote):
        return "\\" + ch
    for letter, value in _CONTROL.items():
        if ch == value:
            return "\\" + letter
    if ord(ch) < 0x20 or ord(ch) == 0x7F:  # noqa: PLR2004
        return f"\\x{ord(ch):x}\\"
    return ch


def quote_text(value: str, quote: str) -> str:
    """Quote `value` with the given quote character, escaping as needed."""
    return quote + "".join(_escape_char(ch, quote) for ch in value) + quote


def quote_atom(value: str) -> str:
    """Render an atom so that re-tokenizing yields one name token with this value."""
    if is_letter_digit_atom(value) or is_symbol_atom(value) or value in SOLO_ATOMS:
        return value
    return quote_text(value, "'")
