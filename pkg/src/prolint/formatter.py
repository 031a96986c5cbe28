"""Pretty printing of abstract syntax trees.

The printer emits the fewest parentheses the operator table allows and lays
out rules according to the style options. Comments, a shebang line and blank
lines between clauses are carried over from the original concrete tree as
`Trivia`.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace

from prolint import _quoting
from prolint.dialect import DialectOptions
from prolint.lexer import LayoutItem, PrologSyntaxError, Token, tokenize
from prolint.operators import (
    ARGUMENT_PRIORITY,
    MAX_PRIORITY,
    OpDef,
    OpError,
    OperatorTable,
    default_table,
    scan_op_directives,
)
from prolint.parser import OPERATOR_ATOM_PRIORITY, CstNode, parse_program, parse_source
from prolint.style import INFER, Check, StyleOptions
from prolint.terms import (
    Atom,
    Clause,
    Compound,
    Curly,
    Dict,
    Directive,
    Fact,
    Float,
    Infix,
    Integer,
    List,
    Postfix,
    Prefix,
    Program,
    Rule,
    String,
    Term,
    Variable,
    atom_text,
    cst_to_ast,
)

__all__ = [
    "ClauseTrivia",
    "SerializeError",
    "Trivia",
    "ast_to_cst",
    "collect_trivia",
    "format_source",
    "format_text",
]

_logger = logging.getLogger(__name__)

# Symbolic operators binding tighter than this are printed without spaces.
_TIGHT_BELOW = 500
_COMMENTS = frozenset({"line_comment", "block_comment"})
# Nodes whose direct comma children are argument separators.
_SEPARATED = frozenset({"arg_list", "dict"})
_BOM = "\ufeff"


class SerializeError(ValueError):
    """An abstract tree that cannot be printed as equivalent source text."""


@dataclass(frozen=True, slots=True)
class ClauseTrivia:
    """Comments that precede a clause and whether a blank line separates it.

    `comma_spacing` tells, for each argument separator of the clause in source
    order, whether layout follows it.
    """

    blank_before: bool = False
    comments: tuple[str, ...] = ()
    comma_spacing: tuple[bool, ...] = ()


@dataclass(frozen=True)
class Trivia:
    """Everything besides clauses that formatting keeps."""

    bom: bool = False
    shebang: str | None = None
    clauses: tuple[ClauseTrivia, ...] = ()
    trailing: ClauseTrivia = field(default_factory=ClauseTrivia)

    def for_clause(self, index: int) -> ClauseTrivia:
        """Return the trivia of the `index`-th valid clause."""
        return self.clauses[index] if index < len(self.clauses) else ClauseTrivia()


def _comment_text(item: LayoutItem) -> str:
    return item.text.rstrip(" \t") if item.kind == "line_comment" else item.text


def _trivia_of(tokens: Sequence[Token]) -> ClauseTrivia:
    newlines = 0
    for item in tokens[0].layout_before:
        if item.kind in _COMMENTS:
            break
        newlines += item.kind == "newline"
    comments = tuple(
        _comment_text(item)
        for token in tokens
        for item in token.layout_before
        if item.kind in _COMMENTS
    )
    return ClauseTrivia(blank_before=newlines >= 2, comments=comments)  # noqa: PLR2004


def _comma_spacing(clause: CstNode) -> tuple[bool, ...]:
    separators = {
        id(child)
        for node in clause.nodes()
        if node.label in _SEPARATED
        for child in node.children
        if isinstance(child, Token) and child.kind == "comma"
    }
    return tuple(
        bool(following.layout_before)
        for token, following in itertools.pairwise(clause.tokens())
        if id(token) in separators
    )


def collect_trivia(cst: CstNode) -> Trivia:
    """Gather the comments, shebang, byte-order mark and blank lines of `cst`.

    Comments inside a clause are attached to that clause; invalid clauses
    contribute nothing.
    """
    first = cst.first_token()
    head = first.layout_before if first is not None else ()
    shebang = next((item.text.rstrip("\r") for item in head if item.kind == "shebang"), None)
    clauses: list[ClauseTrivia] = []
    trailing = ClauseTrivia()
    for child in cst.children:
        if isinstance(child, Token):
            trailing = _trivia_of([child])
        elif child.label != "invalid_clause":
            trivia = _trivia_of(list(child.tokens()))
            clauses.append(replace(trivia, comma_spacing=_comma_spacing(child)))
    return Trivia(
        bom=any(item.kind == "bom" for item in head),
        shebang=shebang,
        clauses=tuple(clauses),
        trailing=trailing,
    )


@dataclass(frozen=True, slots=True)
class _Layout:
    indent: str
    keep_comma_spacing: bool
    break_after_rule_op: bool
    break_after_subgoal: bool
    indent_repeat: bool

    @classmethod
    def from_style(cls, style: StyleOptions) -> _Layout:
        for name, setting in style.items():
            if setting == INFER:
                raise SerializeError(f"Style option {name!r} must be concrete, not 'infer'")
        indent = style.indent.value if isinstance(style.indent, Check) else 4
        return cls(
            indent=" " * indent if isinstance(indent, int) else "\t",
            keep_comma_spacing=style.space_after_arglist_comma == Check(False),  # noqa: FBT003
            break_after_rule_op=style.newline_after_rule_op != Check(False),  # noqa: FBT003
            break_after_subgoal=style.newline_after_subgoal != Check(False),  # noqa: FBT003
            indent_repeat=style.indent_between_repeat_cut != Check(False),  # noqa: FBT003
        )


def _glue(*parts: str) -> str:
    """Concatenate, keeping adjacent symbol characters from fusing into one token."""
    text = ""
    for part in parts:
        symbols = _quoting.SYMBOL_CHARS
        if text and part and text[-1] in symbols and part[0] in symbols:
            text += " "
        text += part
    return text


def _name_text(name: str) -> str:
    """Render an atom so that it lexes as one name token."""
    if name in ("[]", "{}"):
        return _quoting.quote_text(name, "'")
    return _quoting.quote_atom(name)


def _is_atom(term: Term, name: str) -> bool:
    return isinstance(term, Atom) and term.name == name


class _Printer:
    def __init__(self, table: OperatorTable, layout: _Layout) -> None:
        self.table = table
        self.layout = layout
        self.comma_spacing: Iterator[bool] = iter(())

    def separator(self) -> str:
        """Return the next argument separator, spaced as in the source when kept."""
        if self.layout.keep_comma_spacing and not next(self.comma_spacing, True):
            return ","
        return ", "

    def _op(self, term: Term) -> OpDef | None:
        match term:
            case Infix(op=op):
                return self.table.infix_op(op)
            case Prefix(op=op):
                return self.table.prefix_op(op)
            case Postfix(op=op):
                return self.table.postfix_op(op)
        return None

    def priority(self, term: Term) -> int:
        if isinstance(term, Atom):
            return OPERATOR_ATOM_PRIORITY if self.table.is_op(term.name) else 0
        op = self._op(term)
        return op.priority if op is not None else 0

    def term(self, term: Term, max_priority: int, *, bare: bool = False) -> str:
        """Print `term` where priority `max_priority` is allowed.

        Operator atoms stay bare only where `bare` says the term is a whole
        argument or list element; anywhere else they are parenthesized.
        """
        if isinstance(term, Atom) and (bare or not self.table.is_op(term.name)):
            return atom_text(term)
        if self.priority(term) > max_priority:
            inner = atom_text(term) if isinstance(term, Atom) else self._term(term)
            return f"({inner})"
        return self._term(term)

    def _term(self, term: Term) -> str:  # noqa: C901, PLR0911
        match term:
            case Atom():
                return atom_text(term)
            case Variable(name):
                if not name or not (name[0] == "_" or name[0].isupper()):
                    raise SerializeError(f"Invalid variable name {name!r}")
                return name
            case Integer(value, _, text):
                return text or str(value)
            case Float(value, _, text):
                return text or repr(value)
            case String(text, quote):
                return _quoting.quote_text(text, '"' if quote == "double" else "`")
            case Compound(functor, args):
                return self.compound(functor, args)
            case Infix(op, _, left, right):
                return self.infix(op, left, right)
            case Prefix(op, _, arg):
                definition = self.table.prefix_op(op)
                if definition is None:
                    return self.compound(op, (arg,))
                return f"{_name_text(op)} {self.term(arg, definition.right_max)}"
            case Postfix(op, _, arg):
                definition = self.table.postfix_op(op)
                if definition is None:
                    return self.compound(op, (arg,))
                left = self.term(arg, definition.left_max)
                if _quoting.is_symbol_atom(op) and definition.priority < _TIGHT_BELOW:
                    return _glue(left, _name_text(op))
                return f"{left} {_name_text(op)}"
            case List(elements, tail):
                items = self.arguments(elements)
                if tail is not None:
                    items = f"{items}|{self.term(tail, ARGUMENT_PRIORITY, bare=True)}"
                return f"[{items}]"
            case Curly(inner):
                return "{" + self.term(inner, MAX_PRIORITY) + "}"
            case Dict(tag, pairs):
                return self.dict(tag, pairs)
        raise SerializeError(f"Cannot print {term!r}")

    def arguments(self, args: Sequence[Term]) -> str:
        text = ""
        for index, arg in enumerate(args):
            if index:
                text += self.separator()
            text += self.term(arg, ARGUMENT_PRIORITY, bare=True)
        return text

    def compound(self, functor: str, args: Sequence[Term]) -> str:
        return f"{_name_text(functor)}({self.arguments(args)})"

    def infix(self, op: str, left: Term, right: Term) -> str:
        definition = self.table.infix_op(op)
        if definition is None:
            return self.compound(op, (left, right))
        left_text = self.term(left, definition.left_max)
        right_text = self.term(right, definition.right_max)
        if op == ",":
            return f"{left_text}, {right_text}"
        if op == "|":
            return f"{left_text} | {right_text}"
        if _quoting.is_symbol_atom(op) and definition.priority < _TIGHT_BELOW:
            return _glue(left_text, op, right_text)
        return f"{left_text} {_name_text(op)} {right_text}"

    def dict(self, tag: Term, pairs: Sequence[tuple[Term, Term]]) -> str:
        match tag:
            case Variable():
                tag_text = self._term(tag)
            case Atom(name) if _quoting.is_letter_digit_atom(name):
                tag_text = name
            case Atom(name):
                tag_text = _quoting.quote_text(name, "'")
            case _:
                raise SerializeError(f"Invalid dict tag {tag!r}")
        items = ""
        for index, (key, value) in enumerate(pairs):
            if not isinstance(key, Atom | Integer):
                raise SerializeError(f"Invalid dict key {key!r}")
            if index:
                items += self.separator()
            key_text = _name_text(key.name) if isinstance(key, Atom) else self._term(key)
            items += _glue(key_text, ":", self.term(value, ARGUMENT_PRIORITY, bare=True))
        return tag_text + "{" + items + "}"

    def rule(self, head: Term, body: Sequence[Term]) -> str:
        layout = self.layout
        text = f"{self.term(head, MAX_PRIORITY - 1)} :-"
        depth = 1
        for index, goal in enumerate(body):
            if len(body) == 1:
                priority = MAX_PRIORITY - 1
            else:
                priority = ARGUMENT_PRIORITY + 1 if index == len(body) - 1 else ARGUMENT_PRIORITY
            if index == 0:
                broken = layout.break_after_rule_op
            else:
                text += ","
                broken = layout.break_after_subgoal
            if layout.indent_repeat and _is_atom(goal, "!"):
                depth = 1
            text += f"\n{layout.indent * depth}" if broken else " "
            text += self.term(goal, priority)
            if layout.indent_repeat and _is_atom(goal, "repeat"):
                depth = 2
        return text

    def clause(self, clause: Clause) -> str:
        match clause:
            case Rule(head, body):
                text = self.rule(head, body)
            case Fact(head):
                text = self.term(head, MAX_PRIORITY)
            case Directive(goal, op):
                text = f"{op} {self.term(goal, MAX_PRIORITY - 1)}"
            case _:
                raise SerializeError(f"Not a clause: {clause!r}")
        if text[-1] in _quoting.SYMBOL_CHARS:
            return f"{text} ."
        return f"{text}."


def _replay_op_directives(
    text: str, table: OperatorTable, dialect: DialectOptions
) -> OperatorTable:
    try:
        tokens = tokenize(text, dialect)
    except PrologSyntaxError:
        return table
    for directive in scan_op_directives(tokens):
        try:
            table = directive.apply(table)
        except OpError as exc:
            _logger.debug("not replaying op directive: %s", exc)
    return table


def _emit(out: list[str], trivia: ClauseTrivia) -> None:
    if trivia.blank_before and any(part != _BOM for part in out):
        out.append("\n")
    out.extend(f"{comment}\n" for comment in trivia.comments)


def format_text(
    program: Program,
    style: StyleOptions,
    *,
    table: OperatorTable | None = None,
    dialect: DialectOptions | None = None,
    trivia: Trivia | None = None,
) -> str:
    """Print `program` as source text laid out according to `style`.

    `table` is the operator table in force before the first clause; op/3
    directives among the clauses update it as they are printed. Lines are
    never wrapped, so max_line_length and the rule size limits are not
    enforced here.
    """
    if dialect is None:
        dialect = DialectOptions.for_profile("swi")
    if table is None:
        table = default_table(dialect.profile, dicts=dialect.dicts)
    if trivia is None:
        trivia = Trivia()
    printer = _Printer(table, _Layout.from_style(style))
    out: list[str] = []
    if trivia.bom:
        out.append(_BOM)
    if trivia.shebang is not None:
        out.append(f"{trivia.shebang}\n")
    for index, clause in enumerate(program.clauses):
        clause_trivia = trivia.for_clause(index)
        _emit(out, clause_trivia)
        printer.comma_spacing = iter(clause_trivia.comma_spacing)
        text = printer.clause(clause)
        out.append(f"{text}\n")
        if isinstance(clause, Directive):
            printer.table = _replay_op_directives(text, printer.table, dialect)
    if trivia.trailing.comments:
        _emit(out, trivia.trailing)
    return "".join(out)


def ast_to_cst(
    program: Program,
    style: StyleOptions,
    *,
    table: OperatorTable | None = None,
    dialect: DialectOptions | None = None,
    trivia: Trivia | None = None,
) -> CstNode:
    """Print `program` and parse the result back into a concrete tree.

    Raises SerializeError when the printed text does not parse.
    """
    if dialect is None:
        dialect = DialectOptions.for_profile("swi")
    if table is None:
        table = default_table(dialect.profile, dicts=dialect.dicts)
    text = format_text(program, style, table=table, dialect=dialect, trivia=trivia)
    try:
        outcome = parse_program(tokenize(text, dialect), table, dialect)
    except PrologSyntaxError as exc:
        raise SerializeError(f"Printed text does not tokenize: {exc.message}") from exc
    if outcome.errors:
        raise SerializeError(f"Printed text does not parse: {outcome.errors[0].message}")
    return outcome.cst


def format_source(
    source: str,
    style: StyleOptions,
    dialect: DialectOptions,
    *,
    table: OperatorTable | None = None,
) -> str:
    """Reformat `source`, keeping its comments.

    Raises the first lex or parse error of `source`, and SerializeError if the
    result would not read back as the same abstract tree.
    """
    if table is None:
        table = default_table(dialect.profile, dicts=dialect.dicts)
    outcome = parse_source(source, dialect, table=table)
    if outcome.errors:
        raise outcome.errors[0]
    program = cst_to_ast(outcome.cst).ast
    text = format_text(
        program,
        style,
        table=table.extended(outcome.deduced_ops),
        dialect=dialect,
        trivia=collect_trivia(outcome.cst),
    )
    reread = parse_source(text, dialect, table=table)
    if reread.errors or cst_to_ast(reread.cst).ast != program:
        raise SerializeError("Formatting would change the meaning of the program")
    return text
