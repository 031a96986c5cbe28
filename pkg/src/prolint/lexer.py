"""Lossless tokenizer for Prolog source text.

Every character of the input ends up either in a token or in a layout item
attached to the token that follows it, so concatenating layout and token texts
reproduces the input exactly.
"""

from __future__ import annotations

import functools
import re
import time
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import Literal

from prolint import _quoting
from prolint._quoting import Escape
from prolint.dialect import DialectOptions

__all__ = [
    "LayoutItem",
    "LexError",
    "ParseTimeout",
    "PrologSyntaxError",
    "SourceSpan",
    "Token",
    "VariableClass",
    "classify_variable",
    "layout_of_line",
    "line_indentation",
    "tokenize",
]

LayoutKind = Literal[
    "space", "tab", "newline", "line_comment", "block_comment", "shebang", "bom"
]
TokenKind = Literal[
    "name",
    "variable",
    "integer",
    "float",
    "double_quoted",
    "back_quoted",
    "char_code_constant",
    "open_paren",
    "open_ct",
    "close_paren",
    "open_list",
    "close_list",
    "open_curly",
    "close_curly",
    "comma",
    "bar",
    "end",
    "dict_open",
    "eof",
]
VariableClass = Literal["anonymous", "named"]

# Check the deadline once per this many tokens.
_DEADLINE_STRIDE = 512

_PUNCTUATION: dict[str, TokenKind] = {
    ")": "close_paren",
    "[": "open_list",
    "]": "close_list",
    "}": "close_curly",
    ",": "comma",
    "|": "bar",
}
_QUOTED_KINDS: dict[str, TokenKind] = {
    "'": "name",
    '"': "double_quoted",
    "`": "back_quoted",
}

_WORD = re.compile(r"\w+")
# A symbol-character token ends where a block comment starts.
_SYMBOLS = re.compile(r"(?:(?!/\*)[+\-*/\\^<>=~:.?@#&$])+")
_SPACES = re.compile(r" +")
_TABS = re.compile(r"\t+")
_OTHER_SPACE = re.compile(r"[^\S\r\n\t ]+")
_NESTED_COMMENT = re.compile(r"/\*|\*/")
_RADIX = re.compile(r"0(?:x[0-9a-fA-F]+|o[0-7]+|b[01]+)")


@functools.cache
def _number_patterns(*, digit_groups: bool, exponent: bool) -> tuple[re.Pattern[str], ...]:
    digits = r"[0-9]+(?:_[0-9]+)*" if digit_groups else r"[0-9]+"
    patterns = [re.compile(rf"{digits}\.[0-9]+(?:[eE][+-]?[0-9]+)?")]
    if exponent:
        patterns.append(re.compile(rf"{digits}[eE][+-]?[0-9]+"))
    patterns.append(re.compile(digits))
    return tuple(patterns)


@dataclass(frozen=True, kw_only=True, slots=True)
class SourceSpan:
    """A region of the source.

    Byte offsets are 0-based into the UTF-8 encoding, end exclusive. Lines and
    columns are 1-based and count characters; ``col_end`` is the column just
    after the last character.
    """

    byte_start: int
    byte_end: int
    line_start: int
    col_start: int
    line_end: int
    col_end: int

    def cover(self, other: SourceSpan) -> SourceSpan:
        """Return the smallest span containing this span and `other`."""
        first = self if self.byte_start <= other.byte_start else other
        end = self if self.byte_end >= other.byte_end else other
        return SourceSpan(
            byte_start=first.byte_start,
            byte_end=end.byte_end,
            line_start=first.line_start,
            col_start=first.col_start,
            line_end=end.line_end,
            col_end=end.col_end,
        )


@dataclass(frozen=True, kw_only=True, slots=True)
class LayoutItem:
    """Whitespace, a newline, a comment, a shebang line or a byte-order mark."""

    kind: LayoutKind
    text: str
    span: SourceSpan


@dataclass(frozen=True, kw_only=True, slots=True)
class Token:
    """The smallest lexical unit, together with the layout that precedes it."""

    kind: TokenKind
    text: str
    span: SourceSpan
    layout_before: tuple[LayoutItem, ...] = ()

    @property
    def source_text(self) -> str:
        """The layout text followed by the token text."""
        return "".join(item.text for item in self.layout_before) + self.text

    @property
    def has_newline_before(self) -> bool:
        """Whether the preceding layout contains a line break."""
        return any(item.kind == "newline" for item in self.layout_before)


class PrologSyntaxError(Exception):
    """The provided source text could not be tokenized or parsed."""

    def __init__(self, message: str, *, source: str, span: SourceSpan) -> None:
        """Record the message and where in `source` the problem lies."""
        self.message = message
        self.source = source
        self.span = span

        super().__init__(message)

    def __str__(self) -> str:
        """Render the message with the offending line and a marker below it."""
        lines = self.source.splitlines() or [""]
        line = lines[min(self.span.line_start, len(lines)) - 1]
        width = 0
        if self.span.line_end == self.span.line_start:
            width = max(self.span.col_end - self.span.col_start - 1, 0)
        marker = " " * (self.span.col_start - 1) + "~" * width + "^"
        location = f"line {self.span.line_start}, column {self.span.col_start}"
        return "\n    ".join([f"{self.message} ({location})", line, marker])


class LexError(PrologSyntaxError):
    """The source contains characters that do not form valid tokens."""


class ParseTimeout(TimeoutError):
    """The analysis deadline passed before tokenizing or parsing finished."""


class Tokenizer:
    """Scanner that walks the source once and keeps track of positions."""

    def __init__(
        self,
        source: str,
        *,
        dialect: DialectOptions,
        deadline: float | None = None,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        """Prepare to scan `source` under `dialect`."""
        self.source = source
        self.dialect = dialect
        self.deadline = deadline
        self.clock = clock
        self.position = 0
        self._line = 1
        self._col = 1
        self._byte = 0
        self._numbers = _number_patterns(
            digit_groups=dialect.digit_groups,
            exponent=dialect.allow_integer_exponential_notation,
        )

    def _advance(self, end: int) -> SourceSpan:
        text = self.source[self.position : end]
        line, col, byte = self._line, self._col, self._byte
        newlines = text.count("\n")
        if newlines:
            self._line += newlines
            self._col = len(text) - text.rfind("\n")
        else:
            self._col += len(text)
        self._byte += len(text.encode("utf-8", "surrogatepass"))
        self.position = end
        return SourceSpan(
            byte_start=byte,
            byte_end=self._byte,
            line_start=line,
            col_start=col,
            line_end=self._line,
            col_end=self._col,
        )

    def _peek_span(self, start: int, end: int) -> SourceSpan:
        """Span of source[start:end] without consuming it; start must be >= position."""
        before = self.source[self.position : start]
        line = self._line + before.count("\n")
        col = len(before) - before.rfind("\n") if "\n" in before else self._col + len(before)
        byte = self._byte + len(before.encode("utf-8", "surrogatepass"))
        text = self.source[start:end]
        newlines = text.count("\n")
        line_end = line + newlines
        col_end = len(text) - text.rfind("\n") if newlines else col + len(text)
        return SourceSpan(
            byte_start=byte,
            byte_end=byte + len(text.encode("utf-8", "surrogatepass")),
            line_start=line,
            col_start=col,
            line_end=line_end,
            col_end=col_end,
        )

    def raise_syntax_error(self, message: str, *, start: int, end: int) -> LexError:
        """Build a LexError covering source[start:end]."""
        return LexError(message, source=self.source, span=self._peek_span(start, end))

    def tokenize(self) -> list[Token]:
        """Scan the whole source."""
        tokens: list[Token] = []
        previous: Token | None = None
        while True:
            layout = self._read_layout()
            if self.position >= len(self.source):
                if layout:
                    span = self._advance(self.position)
                    tokens.append(Token(kind="eof", text="", span=span, layout_before=layout))
                return tokens
            previous = self._read_token(layout, previous)
            tokens.append(previous)
            if (
                self.deadline is not None
                and len(tokens) % _DEADLINE_STRIDE == 0
                and self.clock() >= self.deadline
            ):
                raise ParseTimeout("deadline passed while tokenizing")

    def _layout(self, kind: LayoutKind, end: int) -> LayoutItem:
        text = self.source[self.position : end]
        return LayoutItem(kind=kind, text=text, span=self._advance(end))

    def _read_layout(self) -> tuple[LayoutItem, ...]:
        source = self.source
        items: list[LayoutItem] = []
        if self.position == 0:
            if source.startswith("\ufeff"):
                items.append(self._layout("bom", 1))
            if self.dialect.shebang and source.startswith("#!", self.position):
                end = source.find("\n", self.position)
                items.append(self._layout("shebang", len(source) if end < 0 else end))
        n = len(source)
        while self.position < n:
            pos = self.position
            ch = source[pos]
            if ch == "\n":
                items.append(self._layout("newline", pos + 1))
            elif ch == "\r":
                crlf = source.startswith("\n", pos + 1)
                items.append(self._layout("newline", pos + 2 if crlf else pos + 1))
            elif ch == " ":
                items.append(self._layout("space", _end_of(_SPACES, source, pos)))
            elif ch == "\t":
                items.append(self._layout("tab", _end_of(_TABS, source, pos)))
            elif ch.isspace():
                items.append(self._layout("space", _end_of(_OTHER_SPACE, source, pos)))
            elif ch == "%":
                end = source.find("\n", pos)
                if end > pos and source[end - 1] == "\r":
                    end -= 1
                items.append(self._layout("line_comment", n if end < 0 else end))
            elif source.startswith("/*", pos):
                items.append(self._layout("block_comment", self._block_comment_end(pos)))
            else:
                break
        return tuple(items)

    def _block_comment_end(self, start: int) -> int:
        if not self.dialect.nested_block_comments:
            end = self.source.find("*/", start + 2)
            if end < 0:
                raise self.raise_syntax_error(
                    "Unterminated block comment", start=start, end=len(self.source)
                )
            return end + 2
        depth = 0
        for match in _NESTED_COMMENT.finditer(self.source, start):
            depth += 1 if match[0] == "/*" else -1
            if depth == 0:
                return match.end()
        raise self.raise_syntax_error(
            "Unterminated block comment", start=start, end=len(self.source)
        )

    def _token(
        self, kind: TokenKind, end: int, layout: tuple[LayoutItem, ...]
    ) -> Token:
        text = self.source[self.position : end]
        return Token(kind=kind, text=text, span=self._advance(end), layout_before=layout)

    def _read_token(self, layout: tuple[LayoutItem, ...], previous: Token | None) -> Token:
        source = self.source
        pos = self.position
        ch = source[pos]
        adjacent = previous is not None and not layout

        if "0" <= ch <= "9":
            return self._read_number(layout)
        if ch == "_" or ch.isalpha():
            end = _end_of(_WORD, source, pos)
            word = source[pos:end]
            kind: TokenKind = "variable" if word[0] == "_" or word[0].isupper() else "name"
            return self._token(kind, end, layout)
        if ch in _QUOTED_KINDS:
            return self._read_quoted(ch, layout)
        if ch == "(":
            functor = adjacent and previous is not None and previous.kind == "name"
            return self._token("open_ct" if functor else "open_paren", pos + 1, layout)
        if ch == "{":
            tagged = adjacent and self.dialect.dicts and _is_dict_tag(previous)
            return self._token("dict_open" if tagged else "open_curly", pos + 1, layout)
        if ch in _PUNCTUATION:
            return self._token(_PUNCTUATION[ch], pos + 1, layout)
        if ch in "!;":
            return self._token("name", pos + 1, layout)
        if ch in _quoting.SYMBOL_CHARS:
            end = _end_of(_SYMBOLS, source, pos)
            if end == pos + 1 and ch == "." and (
                end == len(source) or source[end].isspace() or source[end] == "%"
            ):
                return self._token("end", end, layout)
            return self._token("name", end, layout)
        raise self.raise_syntax_error(
            f"Character {ch!r} is outside the accepted character set", start=pos, end=pos + 1
        )

    def _read_number(self, layout: tuple[LayoutItem, ...]) -> Token:
        source = self.source
        pos = self.position
        if source.startswith("0'", pos):
            end = self._char_code_end(pos)
            if end is not None:
                return self._token("char_code_constant", end, layout)
        radix = _RADIX.match(source, pos)
        if radix is not None:
            return self._token("integer", radix.end(), layout)
        for pattern in self._numbers:
            match = pattern.match(source, pos)
            if match is not None:
                kind: TokenKind = "integer" if match.re is self._numbers[-1] else "float"
                return self._token(kind, match.end(), layout)
        raise AssertionError("unreachable: a digit always matches")  # pragma: no cover

    def _char_code_end(self, pos: int) -> int | None:
        """End offset of a character code constant at `pos`, or None for a plain 0."""
        source = self.source
        at = pos + 2
        if at >= len(source):
            return None
        ch = source[at]
        if ch == "'":
            if source.startswith("'", at + 1):
                return at + 2
            return at + 1 if self.dialect.single_quote_char_constant else None
        if ch == "\\":
            escape = _quoting.read_escape(source, at)
            if escape.kind == "continuation":
                return None
            self._validate_escape(escape)
            return escape.end
        if ch == "\t" and not self.dialect.tab_in_quotes:
            raise self.raise_syntax_error(
                "Tab character in character code constant", start=at, end=at + 1
            )
        if ch in "\n\r":
            return None
        if ch < " " and ch != "\t":
            raise self.raise_syntax_error(
                f"Character {ch!r} is outside the accepted character set", start=at, end=at + 1
            )
        return at + 1

    def _read_quoted(self, quote: str, layout: tuple[LayoutItem, ...]) -> Token:
        source = self.source
        start = self.position
        scanned = _quoting.scan_quoted(source, start + 1, quote)
        if scanned is None:
            raise self.raise_syntax_error("Unterminated quoted token", start=start, end=len(source))
        end, escapes = scanned
        for escape in escapes:
            self._validate_escape(escape)
        self._validate_quoted_chars(start, end, escapes)
        return self._token(_QUOTED_KINDS[quote], end, layout)

    def _validate_quoted_chars(self, start: int, end: int, escapes: Sequence[Escape]) -> None:
        for offset in range(start + 1, end - 1):
            ch = self.source[offset]
            if ch >= " " or ch in "\n\r":
                continue
            if _inside_escape(offset, escapes):
                continue
            if ch == "\t":
                if self.dialect.tab_in_quotes:
                    continue
                message = "Tab character inside quotes"
            else:
                message = f"Character {ch!r} is outside the accepted character set"
            raise self.raise_syntax_error(message, start=offset, end=offset + 1)

    def _validate_escape(self, escape: Escape) -> None:
        dialect = self.dialect
        problem = None
        if escape.kind == "unknown":
            problem = "Invalid escape sequence"
        elif escape.kind in ("octal", "hex"):
            if not escape.digits:
                problem = "Invalid escape sequence"
            elif not escape.closed and not dialect.missing_closing_backslash:
                problem = "Escape sequence lacks the closing backslash"
        elif escape.kind == "unicode":
            expected = 4 if self.source[escape.start + 1] == "u" else 8
            if not dialect.unicode_character_escape:
                problem = "Unicode character escapes are not enabled"
            elif len(escape.digits) != expected:
                problem = "Invalid escape sequence"
        code = escape.code_point
        if problem is None and code is not None and code > 0x10FFFF:  # noqa: PLR2004
            problem = "Escape sequence denotes no character"
        if problem is not None:
            raise self.raise_syntax_error(problem, start=escape.start, end=escape.end)


def _inside_escape(offset: int, escapes: Sequence[Escape]) -> bool:
    return any(e.start <= offset < e.end for e in escapes)


def _end_of(pattern: re.Pattern[str], text: str, pos: int) -> int:
    match = pattern.match(text, pos)
    assert match is not None
    return match.end()


def _is_dict_tag(token: Token | None) -> bool:
    if token is None:
        return False
    if token.kind == "variable":
        return True
    return token.kind == "name" and (token.text[0].isalpha() or token.text[0] == "'")


def tokenize(
    source: str,
    dialect: DialectOptions,
    *,
    deadline: float | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> list[Token]:
    """Convert `source` into tokens with attached layout.

    A synthetic ``eof`` token carrying the trailing layout is appended when the
    source ends in layout. Raises LexError on malformed input and ParseTimeout
    when `deadline` (a `clock` reading) passes.
    """
    return Tokenizer(source, dialect=dialect, deadline=deadline, clock=clock).tokenize()


def classify_variable(token: Token) -> VariableClass:
    """Tell the anonymous variable ``_`` apart from named variables."""
    if token.kind != "variable":
        raise ValueError(f"Expected a variable token, got {token.kind} {token.text!r}")
    return "anonymous" if token.text == "_" else "named"


IndentRuns = tuple[tuple[str, int], ...]


def _leading_runs(token: Token, *, include_blank: bool) -> Iterator[tuple[int, IndentRuns]]:
    items = token.layout_before
    index = 0
    while index < len(items):
        item = items[index]
        if item.kind not in ("space", "tab") or item.span.col_start != 1:
            index += 1
            continue
        runs: list[tuple[str, int]] = []
        while index < len(items) and items[index].kind in ("space", "tab"):
            runs.append((items[index].kind, len(items[index].text)))
            index += 1
        blank = items[index].kind == "newline" if index < len(items) else token.kind == "eof"
        if include_blank or not blank:
            yield item.span.line_start, tuple(runs)


def line_indentation(
    tokens: Iterable[Token], *, include_blank: bool = False
) -> dict[int, IndentRuns]:
    """Map each line that begins with whitespace to its leading (kind, count) runs.

    Only layout between tokens is considered, so the inside of a block comment
    or a quoted token never counts as indentation. Lines holding nothing but
    whitespace are left out unless `include_blank` is set.
    """
    result: dict[int, IndentRuns] = {}
    for token in tokens:
        result.update(_leading_runs(token, include_blank=include_blank))
    return result


def layout_of_line(tokens: Sequence[Token], line: int) -> IndentRuns:
    """Return the leading whitespace of physical `line` as (kind, count) runs.

    For ``"    a."`` this is ``(("space", 4),)``; it is empty when the line starts
    with a non-layout character or lies outside the source.
    """
    return line_indentation(tokens, include_blank=True).get(line, ())
