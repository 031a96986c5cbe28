"""Naming rules checked against the abstract syntax tree."""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Final, Literal, get_args

from prolint import _quoting
from prolint.diagnostics import Diagnostic, make_diagnostic, sort_diagnostics
from prolint.lexer import SourceSpan
from prolint.style import INFER, OFF, Check, Setting
from prolint.terms import (
    AstNode,
    AstWithOrigin,
    Atom,
    Compound,
    Curly,
    Dict,
    Directive,
    Fact,
    Infix,
    List,
    Postfix,
    Prefix,
    Program,
    Rule,
    Term,
    Variable,
)

__all__ = [
    "DEFAULT_NAME_PATTERN",
    "NamingStyle",
    "QualityOptions",
    "WordStyle",
    "check_quality",
    "identifier_words",
]

NamingStyle = Literal["underscore", "camel_case", "consistent"]
WordStyle = Literal["underscore", "camel_case", "single_word", "mixed"]

DEFAULT_NAME_PATTERN: Final = r"^[a-z][A-Za-z0-9_]*$"

_CASE_CHANGE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_EMPTY_SPAN = SourceSpan(byte_start=0, byte_end=0, line_start=1, col_start=1, line_end=1, col_end=1)


@dataclass(frozen=True, kw_only=True)
class QualityOptions:
    """Settings of the naming rules.

    `predicate_name_pattern` is the regular expression every predicate name has
    to match when `naming_convention_3_12` is checked.
    """

    predicate_naming_style: Setting[NamingStyle] = Check("consistent")
    variable_naming_style: Setting[NamingStyle] = Check("consistent")
    naming_convention_3_12: Setting[bool] = OFF
    predicate_name_pattern: str = DEFAULT_NAME_PATTERN

    def __post_init__(self) -> None:
        """Reject unknown styles and patterns that do not compile."""
        for name in ("predicate_naming_style", "variable_naming_style"):
            setting = getattr(self, name)
            if setting == INFER:
                raise ValueError(f"Naming styles cannot be inferred in '{name}'")
            if isinstance(setting, Check) and setting.value not in get_args(NamingStyle):
                raise ValueError(f"Unknown naming style {setting.value!r} in '{name}'")
        if self.naming_convention_3_12 == INFER:
            raise ValueError("The naming convention cannot be inferred in 'naming_convention_3_12'")
        try:
            re.compile(self.predicate_name_pattern)
        except re.error as exc:
            raise ValueError(f"{exc} in 'predicate_name_pattern'") from None


def identifier_words(name: str) -> tuple[list[str], WordStyle]:
    """Split an identifier into words and classify how they are joined.

    Words are separated by ``_`` and by a lowercase letter or digit followed by
    an uppercase letter; leading underscores are ignored.

    >>> identifier_words("foo_bar")
    (['foo', 'bar'], 'underscore')
    >>> identifier_words("fooBar")
    (['foo', 'Bar'], 'camel_case')
    """
    stripped = name.lstrip("_")
    parts = [part for part in stripped.split("_") if part]
    words = [word for part in parts for word in _CASE_CHANGE.split(part) if word]
    case_change = len(words) > len(parts)
    if len(words) <= 1:
        return words, "single_word"
    if len(parts) == 1:
        return words, "camel_case"
    if not case_change and all(not part[0].isupper() for part in parts[1:]):
        return words, "underscore"
    return words, "mixed"


def _head_name(head: Term) -> str | None:
    match head:
        case Atom(name) | Compound(name, _):
            return name
        case Infix(":", _, _, right):
            return _head_name(right)
        case Infix(op, _, _, _) | Prefix(op, _, _) | Postfix(op, _, _):
            return op
    return None


def _walk(node: AstNode) -> Iterator[AstNode]:
    """Yield the nodes below `node` in source order."""
    stack: list[AstNode] = [node]
    while stack:
        current = stack.pop()
        yield current
        match current:
            case Program(clauses):
                children: tuple[AstNode, ...] = clauses
            case Rule(head, body):
                children = (head, *body)
            case Fact(head):
                children = (head,)
            case Directive(goal, _):
                children = (goal,)
            case Compound(_, args):
                children = args
            case Infix(_, _, left, right):
                children = (left, right)
            case Prefix(_, _, arg) | Postfix(_, _, arg) | Curly(arg):
                children = (arg,)
            case List(elements, tail):
                children = elements if tail is None else (*elements, tail)
            case Dict(tag, pairs):
                children = (tag, *(value for _, value in pairs))
            case _:
                children = ()
        stack.extend(reversed(children))


class _QualityChecker:
    def __init__(self, tree: AstWithOrigin, options: QualityOptions, file: str) -> None:
        self.tree = tree
        self.options = options
        self.file = file
        self.diagnostics: list[Diagnostic] = []

    def span(self, node: AstNode) -> SourceSpan:
        return self.tree.span_of(node) or _EMPTY_SPAN

    def predicates(self) -> dict[str, SourceSpan]:
        """First occurrence of every predicate name defined by a clause head."""
        found: dict[str, SourceSpan] = {}
        for clause in self.tree.ast.clauses:
            match clause:
                case Rule(head, _):
                    pass
                case Fact(Infix("-->", _, head, _)):
                    pass
                case Fact(head):
                    pass
                case _:
                    continue
            name = _head_name(head)
            if name is not None and name not in found:
                found[name] = self.span(head)
        return found

    def variables(self) -> dict[str, SourceSpan]:
        """First occurrence of every named variable that is not marked unused."""
        found: dict[str, SourceSpan] = {}
        for node in _walk(self.tree.ast):
            if isinstance(node, Variable) and not node.name.startswith("_"):
                found.setdefault(node.name, self.span(node))
        return found

    def check_naming(
        self, rule_id: str, kind: str, setting: Setting[NamingStyle], names: dict[str, SourceSpan]
    ) -> None:
        if not isinstance(setting, Check):
            return
        styles = {
            name: identifier_words(name)[1]
            for name in names
            if _IDENTIFIER.fullmatch(name) is not None
        }
        multi_word = {name: style for name, style in styles.items() if style != "single_word"}
        wanted = setting.value
        if wanted == "consistent":
            counts = Counter(s for s in multi_word.values() if s != "mixed")
            if counts["underscore"] and counts["underscore"] == counts["camel_case"]:
                for name in multi_word:
                    self.report(rule_id, f"No dominant naming style: {kind} {name!r}", names[name])
                return
            wanted = "underscore" if counts["underscore"] > counts["camel_case"] else "camel_case"
        for name, style in multi_word.items():
            if style == "mixed":
                message = f"{kind.capitalize()} {name!r} mixes underscores and case changes"
            elif style != wanted:
                message = f"{kind.capitalize()} {name!r} is {style}, expected {wanted}"
            else:
                continue
            self.report(rule_id, message, names[name])

    def check_convention(self, names: dict[str, SourceSpan]) -> None:
        if self.options.naming_convention_3_12 != Check(True):  # noqa: FBT003
            return
        pattern = re.compile(self.options.predicate_name_pattern)
        for name, span in names.items():
            if _quoting.is_symbol_atom(name) or name in _quoting.SOLO_ATOMS:
                continue
            if pattern.search(name) is None:
                message = f"Predicate {name!r} does not match {pattern.pattern}"
                self.report("cov_3_12", message, span)

    def report(self, rule_id: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(make_diagnostic(rule_id, message, span, file=self.file))

    def run(self) -> list[Diagnostic]:
        predicates = self.predicates()
        options = self.options
        self.check_naming("cov_3_1", "predicate", options.predicate_naming_style, predicates)
        self.check_naming("cov_3_4", "variable", options.variable_naming_style, self.variables())
        self.check_convention(predicates)
        return sort_diagnostics(self.diagnostics)


def check_quality(
    tree: AstWithOrigin, opts: QualityOptions, *, file: str = ""
) -> list[Diagnostic]:
    """Check predicate and variable names of a parsed file.

    Every distinct name is reported at most once per rule, at its first
    occurrence. Variables starting with ``_`` are exempt.
    """
    return _QualityChecker(tree, opts, file).run()
