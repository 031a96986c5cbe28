"""Layout rules checked against the concrete syntax tree.

Each option is either ``"off"``, ``"infer"`` or ``Check(value)``. Checked
options produce diagnostics; inferred options produce no diagnostics, only the
value observed in the file, which can be checked against later.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any, Final, Literal

from prolint.diagnostics import Diagnostic, make_diagnostic, sort_diagnostics
from prolint.lexer import SourceSpan, Token, line_indentation
from prolint.parser import CstNode, atom_value

__all__ = [
    "INFER",
    "OFF",
    "RULE_OP_BREAK_MESSAGE",
    "SUBGOAL_BREAK_MESSAGE",
    "Check",
    "ClauseMetrics",
    "IndentationClass",
    "InferredOptions",
    "Setting",
    "StyleOptions",
    "check_repeat_cut_indent",
    "check_style",
    "indentation_class",
    "merge_inferred",
    "rule_metrics",
    "split_lines",
]

OFF: Final = "off"
INFER: Final = "infer"

MAX_INDENT = 16
MAX_LINE_LENGTH = 10_000
# Column width of a tab when comparing indentation depths.
TAB_WIDTH = 8

IndentationClass = Literal["no_indentation", "spaces_only", "tabs_only", "mixed"]
IndentValue = int | Literal["tab"]
ClauseKind = Literal["rule", "fact", "directive"]


@dataclass(frozen=True, slots=True)
class Check[T]:
    """Check the option against `value`."""

    value: T


type Setting[T] = Check[T] | Literal["off", "infer"]
# Whether one occurrence complies, the message if it does not, and where it is.
_Occurrence = tuple[bool, str, SourceSpan]

YES_NO_OPTIONS: Final = (
    "space_after_arglist_comma",
    "newline_after_clause",
    "newline_after_rule_op",
    "newline_after_subgoal",
    "indent_between_repeat_cut",
    "no_trailing_whitespace",
)
COUNT_OPTIONS: Final = ("max_line_length", "max_subgoals", "max_rule_lines")
RULE_OP_BREAK_MESSAGE: Final = "Missing line break after ':-'"
SUBGOAL_BREAK_MESSAGE: Final = "Missing line break after subgoal"


@dataclass(frozen=True, kw_only=True)
class StyleOptions:
    """Settings of the layout rules."""

    indent: Setting[IndentValue] = Check(4)
    max_line_length: Setting[int] = Check(80)
    max_subgoals: Setting[int] = OFF
    max_rule_lines: Setting[int] = OFF
    space_after_arglist_comma: Setting[bool] = Check(True)  # noqa: FBT003
    newline_after_clause: Setting[bool] = Check(True)  # noqa: FBT003
    newline_after_rule_op: Setting[bool] = Check(True)  # noqa: FBT003
    newline_after_subgoal: Setting[bool] = Check(True)  # noqa: FBT003
    indent_between_repeat_cut: Setting[bool] = Check(True)  # noqa: FBT003
    no_trailing_whitespace: Setting[bool] = Check(True)  # noqa: FBT003

    def __post_init__(self) -> None:
        """Reject checked values outside their bounds."""
        for name, setting in self.items():
            if isinstance(setting, Check):
                _validate(name, setting.value)
            elif setting not in (OFF, INFER):
                raise ValueError(f"Invalid setting {setting!r} for '{name}'")

    def items(self) -> Iterator[tuple[str, Setting[Any]]]:
        """Yield (option name, setting) pairs in declaration order."""
        for option in dataclasses.fields(self):
            yield option.name, getattr(self, option.name)

    @property
    def concrete(self) -> bool:
        """Whether no option is left to inference."""
        return all(setting != INFER for _, setting in self.items())


def _is_count(value: object, low: int, high: int) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and low <= value <= high


def _validate(name: str, value: object) -> None:
    if name == "indent":
        if value == "tab":
            return
        if not _is_count(value, 1, MAX_INDENT):
            raise ValueError(f"Expected 'tab' or an integer in 1..{MAX_INDENT} in '{name}'")
    elif name == "max_line_length":
        if not _is_count(value, 1, MAX_LINE_LENGTH):
            raise ValueError(f"Expected an integer in 1..{MAX_LINE_LENGTH} in '{name}'")
    elif name in COUNT_OPTIONS:
        if not _is_count(value, 1, sys.maxsize):
            raise ValueError(f"Expected a positive integer in '{name}'")
    elif not isinstance(value, bool):
        raise ValueError(f"Expected yes or no in '{name}'")


@dataclass(frozen=True)
class InferredOptions:
    """Options with every inferred slot replaced by the value observed.

    Slots that could not be resolved keep ``"infer"`` and say why in
    `unresolved`.
    """

    options: StyleOptions
    unresolved: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class ClauseMetrics:
    """Size of one clause."""

    kind: ClauseKind
    subgoals: int
    lines: int
    span: SourceSpan


def split_lines(source: str) -> list[str]:
    """Split `source` into physical lines without their line terminators."""
    lines = source.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [line.removesuffix("\r") for line in lines]


def _utf8_len(text: str) -> int:
    return len(text.encode("utf-8", "surrogatepass"))


class _Lines:
    """Physical lines with the byte offset at which each starts."""

    def __init__(self, source: str, lines: Sequence[str]) -> None:
        self.lines = lines
        self.offsets: list[int] = []
        offset = 0
        for raw in source.split("\n"):
            self.offsets.append(offset)
            offset += _utf8_len(raw) + 1

    def text(self, line: int) -> str:
        return self.lines[line - 1] if 0 < line <= len(self.lines) else ""

    def span(self, line: int, col_start: int, col_end: int) -> SourceSpan:
        text = self.text(line)
        base = self.offsets[line - 1] if line <= len(self.offsets) else 0
        return SourceSpan(
            byte_start=base + _utf8_len(text[: col_start - 1]),
            byte_end=base + _utf8_len(text[: col_end - 1]),
            line_start=line,
            col_start=col_start,
            line_end=line,
            col_end=col_end,
        )

    def depth(self, line: int) -> int:
        """Width of the leading whitespace of `line`, tabs expanded."""
        text = self.text(line).expandtabs(TAB_WIDTH)
        return len(text) - len(text.lstrip(" "))


def _unwrap(node: CstNode | Token) -> CstNode | Token:
    while isinstance(node, CstNode) and node.label == "paren":
        node = node.children[1]
    return node


def _rule_parts(clause: CstNode) -> tuple[CstNode | Token, Token, CstNode | Token] | None:
    """Split a rule clause into head, ``:-`` token and body."""
    if clause.label != "clause":
        return None
    term = _unwrap(clause.children[0])
    if not isinstance(term, CstNode) or term.label != "infix" or term.op is None:
        return None
    if term.op.name != ":-":
        return None
    head, op, body = term.children
    assert isinstance(op, Token)
    return head, op, body


def _body_goals(body: CstNode | Token) -> list[tuple[CstNode | Token, Token | None]]:
    """Subgoals of a body with the comma that follows each, if any."""
    goals: list[tuple[CstNode | Token, Token | None]] = []
    node = _unwrap(body)
    while isinstance(node, CstNode) and node.label == "infix" and node.op and node.op.name == ",":
        comma = node.children[1]
        assert isinstance(comma, Token)
        goals.append((node.children[0], comma))
        node = _unwrap(node.children[2])
    goals.append((node, None))
    return goals


def _first_token(node: CstNode | Token) -> Token:
    token = node if isinstance(node, Token) else node.first_token()
    assert token is not None
    return token


def _span(node: CstNode | Token) -> SourceSpan:
    if isinstance(node, Token):
        return node.span
    span = node.span
    assert span is not None
    return span


def _valid_clauses(cst: CstNode) -> list[CstNode]:
    return [c for c in cst.children if isinstance(c, CstNode) and c.label != "invalid_clause"]


def rule_metrics(cst: CstNode) -> list[ClauseMetrics]:
    """Measure every valid clause: subgoals of its body and the lines it spans.

    Facts and directives have no subgoals. Comments and blank lines inside a
    clause count towards its lines.
    """
    metrics: list[ClauseMetrics] = []
    for clause in _valid_clauses(cst):
        span = _span(clause)
        lines = span.line_end - span.line_start + 1
        parts = _rule_parts(clause)
        if parts is not None:
            metrics.append(ClauseMetrics("rule", len(_body_goals(parts[2])), lines, span))
        else:
            kind: ClauseKind = "directive" if clause.label == "directive" else "fact"
            metrics.append(ClauseMetrics(kind, 0, lines, span))
    return metrics


def _is_atom(node: CstNode | Token, name: str) -> bool:
    node = _unwrap(node)
    if not isinstance(node, CstNode) or node.label != "atom" or len(node.children) != 1:
        return False
    token = node.children[0]
    return isinstance(token, Token) and atom_value(token) == name


def indentation_class(tokens: Iterable[Token]) -> IndentationClass:
    """Classify how the lines of a file are indented."""
    kinds = [frozenset(kind for kind, _ in runs) for runs in line_indentation(tokens).values()]
    if not kinds:
        return "no_indentation"
    used = frozenset().union(*kinds)
    if used == {"space"}:
        return "spaces_only"
    if used == {"tab"}:
        return "tabs_only"
    return "mixed"


class _StyleChecker:
    def __init__(
        self, cst: CstNode, source_lines: Sequence[str], options: StyleOptions, file: str
    ) -> None:
        self.cst = cst
        self.tokens = list(cst.tokens())
        self.following = {id(t): self.tokens[i + 1] for i, t in enumerate(self.tokens[:-1])}
        self.lines = _Lines(cst.serialize(), source_lines)
        self.options = options
        self.file = file
        self.clauses = _valid_clauses(cst)
        self.rules = [(c, parts) for c in self.clauses if (parts := _rule_parts(c)) is not None]
        self.diagnostics: list[Diagnostic] = []
        self.inferred: dict[str, Setting[Any]] = {}
        self.unresolved: dict[str, str] = {}

    def report(self, rule_id: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(make_diagnostic(rule_id, message, span, file=self.file))

    def observe(self, name: str, value: object, reason: str = "") -> None:
        """Record an inferred value, or why there is none when `value` is None."""
        if getattr(self.options, name) != INFER:
            return
        if value is None:
            self.unresolved[name] = reason
        else:
            self.inferred[name] = Check(value)

    def newline_follows(self, token: Token) -> bool:
        following = self.following.get(id(token))
        return following is not None and following.has_newline_before

    def run(self) -> tuple[list[Diagnostic], InferredOptions]:
        self.check_indentation()
        self.check_line_length()
        self.check_rule_size()
        self.check_arglist_commas()
        self.check_clause_newlines()
        self.check_rule_breaks()
        self.check_repeat_cut()
        self.check_trailing_whitespace()
        options = dataclasses.replace(self.options, **self.inferred)
        return sort_diagnostics(self.diagnostics), InferredOptions(options, self.unresolved)

    def _yes_no(self, name: str, rule_id: str, occurrences: list[_Occurrence]) -> None:
        """Report failing occurrences of a yes/no option, or infer it from them."""
        setting = getattr(self.options, name)
        if setting == Check(True):  # noqa: FBT003
            for ok, message, span in occurrences:
                if not ok:
                    self.report(rule_id, message, span)
        elif setting == INFER:
            if occurrences:
                self.observe(name, all(ok for ok, _, _ in occurrences))
            else:
                self.observe(name, None, "nothing to observe")

    def check_indentation(self) -> None:
        setting = self.options.indent
        if setting == OFF:
            return
        indents = line_indentation(self.tokens)
        if isinstance(setting, Check):
            wanted = "tab" if setting.value == "tab" else "space"
            for line, runs in sorted(indents.items()):
                kinds = {kind for kind, _ in runs}
                width = sum(count for _, count in runs)
                span = self.lines.span(line, 1, width + 1)
                if kinds != {wanted}:
                    found = " and ".join(sorted(f"{kind}s" for kind in kinds))
                    self.report("cov_2_1", f"Line indented with {found}, expected {wanted}s", span)
                elif isinstance(setting.value, int) and width % setting.value:
                    self.report(
                        "cov_2_2",
                        f"Indentation of {width} is not a multiple of {setting.value}",
                        span,
                    )
            return
        kinds = [frozenset(kind for kind, _ in runs) for runs in indents.values()]
        if not kinds:
            self.observe("indent", None, "no indented lines")
        elif all(k == {"tab"} for k in kinds):
            self.observe("indent", "tab")
        elif all(k == {"space"} for k in kinds):
            unit = math.gcd(*(count for runs in indents.values() for _, count in runs))
            if unit <= MAX_INDENT:
                self.observe("indent", unit)
            else:
                self.observe("indent", None, f"indentation unit {unit} is too wide")
        else:
            self.observe("indent", None, "mixed indentation")

    def check_line_length(self) -> None:
        setting = self.options.max_line_length
        if isinstance(setting, Check):
            limit = setting.value
            for number, text in enumerate(self.lines.lines, 1):
                if len(text) > limit:
                    self.report(
                        "cov_2_3",
                        f"Line is {len(text)} characters long, limit is {limit}",
                        self.lines.span(number, limit + 1, len(text) + 1),
                    )
        elif setting == INFER:
            longest = max(map(len, self.lines.lines), default=0)
            if 1 <= longest <= MAX_LINE_LENGTH:
                self.observe("max_line_length", longest)
            else:
                self.observe("max_line_length", None, "no measurable lines")

    def check_rule_size(self) -> None:
        metrics = [m for m in rule_metrics(self.cst) if m.kind == "rule"]
        heads = [_span(parts[0]) for _, parts in self.rules]
        for name, attribute, noun in (
            ("max_subgoals", "subgoals", "subgoals"),
            ("max_rule_lines", "lines", "lines"),
        ):
            setting = getattr(self.options, name)
            if isinstance(setting, Check):
                for metric, head in zip(metrics, heads, strict=True):
                    value = getattr(metric, attribute)
                    if value > setting.value:
                        self.report(
                            "cov_2_4", f"Rule has {value} {noun}, limit is {setting.value}", head
                        )
            elif setting == INFER:
                largest = max((getattr(m, attribute) for m in metrics), default=None)
                self.observe(name, largest, "no rules")

    def check_arglist_commas(self) -> None:
        occurrences: list[_Occurrence] = []
        for node in self.cst.nodes():
            if node.label != "compound":
                continue
            arguments = node.children[2]
            assert isinstance(arguments, CstNode)
            for comma in arguments.children:
                if isinstance(comma, Token) and comma.kind == "comma":
                    following = self.following.get(id(comma))
                    ok = following is not None and bool(following.layout_before)
                    occurrences.append((ok, "Missing space after argument comma", comma.span))
        self._yes_no("space_after_arglist_comma", "cov_2_5", occurrences)

    def check_clause_newlines(self) -> None:
        occurrences: list[_Occurrence] = []
        for clause in self.clauses:
            end = clause.children[-1]
            assert isinstance(end, Token)
            ok = self.newline_follows(end)
            occurrences.append((ok, "Missing line break after clause", end.span))
        self._yes_no("newline_after_clause", "cov_2_6", occurrences)

    def check_rule_breaks(self) -> None:
        after_op: list[_Occurrence] = []
        after_goal: list[_Occurrence] = []
        for _, (_, op, body) in self.rules:
            after_op.append((self.newline_follows(op), RULE_OP_BREAK_MESSAGE, op.span))
            goals = _body_goals(body)
            if len(goals) < 2:  # noqa: PLR2004
                continue
            for _, comma in goals:
                if comma is not None:
                    ok = self.newline_follows(comma)
                    after_goal.append((ok, SUBGOAL_BREAK_MESSAGE, comma.span))
        self._yes_no("newline_after_rule_op", "cov_2_7", after_op)
        self._yes_no("newline_after_subgoal", "cov_2_7", after_goal)

    def _repeat_cut_occurrences(self) -> list[_Occurrence]:
        occurrences: list[_Occurrence] = []
        for _, (_, _, body) in self.rules:
            depth: int | None = None
            for goal, _ in _body_goals(body):
                if _is_atom(goal, "repeat"):
                    depth = self.lines.depth(_first_token(goal).span.line_start)
                elif _is_atom(goal, "!"):
                    depth = None
                elif depth is not None:
                    first = _first_token(goal)
                    if not first.has_newline_before:
                        continue
                    ok = self.lines.depth(first.span.line_start) > depth
                    message = "Goal between repeat and cut is not indented deeper than repeat"
                    occurrences.append((ok, message, _span(goal)))
        return occurrences

    def check_repeat_cut(self) -> None:
        self._yes_no("indent_between_repeat_cut", "cov_2_14", self._repeat_cut_occurrences())

    def check_trailing_whitespace(self) -> None:
        occurrences: list[_Occurrence] = []
        for number, text in enumerate(self.lines.lines, 1):
            stripped = text.rstrip(" \t")
            if len(stripped) < len(text):
                span = self.lines.span(number, len(stripped) + 1, len(text) + 1)
                occurrences.append((False, "Trailing whitespace", span))
        setting = self.options.no_trailing_whitespace
        if setting == INFER:
            self.observe("no_trailing_whitespace", not occurrences)
        else:
            self._yes_no("no_trailing_whitespace", "style.trailing_whitespace", occurrences)


def check_style(
    cst: CstNode, source_lines: Sequence[str], opts: StyleOptions, *, file: str = ""
) -> tuple[list[Diagnostic], InferredOptions]:
    """Check the layout of a parsed file.

    Returns one diagnostic per violation, ordered by position, and the options
    with every ``"infer"`` slot resolved from what the file shows.
    """
    return _StyleChecker(cst, source_lines, opts, file).run()


def check_repeat_cut_indent(
    cst: CstNode, opts: StyleOptions, *, file: str = ""
) -> list[Diagnostic]:
    """Check only that goals between ``repeat`` and ``!`` are indented deeper."""
    if opts.indent_between_repeat_cut != Check(True):  # noqa: FBT003
        return []
    checker = _StyleChecker(cst, split_lines(cst.serialize()), opts, file)
    checker.check_repeat_cut()
    return sort_diagnostics(checker.diagnostics)


def _merge_setting(name: str, left: Setting[Any], right: Setting[Any]) -> Setting[Any]:
    if not isinstance(left, Check):
        return right if left == INFER else left
    if not isinstance(right, Check):
        return left if right == INFER else right
    if name in COUNT_OPTIONS:
        return Check(max(left.value, right.value))
    if name in YES_NO_OPTIONS:
        return Check(left.value and right.value)
    if left.value == right.value:
        return left
    if isinstance(left.value, int) and isinstance(right.value, int):
        return Check(math.gcd(left.value, right.value))
    return INFER


def merge_inferred(results: Iterable[StyleOptions]) -> StyleOptions:
    """Combine options inferred from several files into options all of them pass.

    Limits take the maximum, yes/no options hold only if they hold everywhere,
    and indentation units combine to their greatest common divisor; files that
    indent with tabs and files that indent with spaces leave indent unresolved.
    """
    merged: dict[str, Setting[Any]] | None = None
    for options in results:
        current = dict(options.items())
        if merged is None:
            merged = current
            continue
        merged = {name: _merge_setting(name, merged[name], current[name]) for name in merged}
    return StyleOptions(**merged) if merged is not None else StyleOptions()
