"""Operator precedence parser producing a lossless concrete syntax tree.

The docstring of each ``_parse_*`` method contains an EBNF-inspired grammar of
what it accepts. ``priority`` threads through every method: a term is only
accepted when its own priority does not exceed the bound handed down.
"""

from __future__ import annotations

import functools
import logging
import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Literal

from prolint import _quoting
from prolint._recursion import deep_recursion
from prolint.dialect import DialectOptions
from prolint.lexer import ParseTimeout, PrologSyntaxError, SourceSpan, Token, tokenize
from prolint.operators import (
    ARGUMENT_PRIORITY,
    MAX_PRIORITY,
    OpDef,
    OpError,
    OperatorTable,
    default_table,
    scan_op_directives,
)

__all__ = [
    "CstNode",
    "ParseError",
    "ParseOutcome",
    "parse_dict",
    "parse_program",
    "parse_source",
    "parse_term",
]

_logger = logging.getLogger(__name__)

CstLabel = Literal[
    "prolog_text",
    "clause",
    "directive",
    "invalid_clause",
    "atom",
    "variable",
    "number",
    "negative_number",
    "string",
    "compound",
    "arg_list",
    "infix",
    "prefix",
    "postfix",
    "list",
    "curly",
    "dict",
    "dict_pair",
    "paren",
]

# Priority of an operator atom standing where an operand is expected.
OPERATOR_ATOM_PRIORITY = MAX_PRIORITY + 1
# Priority given to hypothesized operators when deducing definitions.
DEDUCED_PRIORITY = 200

_NUMBERS = frozenset({"integer", "float", "char_code_constant"})
_CLOSERS = frozenset({"close_paren", "close_list", "close_curly"})
_STOPPERS = _CLOSERS | {"end", "eof", "comma", "bar"}


@dataclass(frozen=True, slots=True)
class CstNode:
    """A node of the concrete syntax tree.

    Leaves are tokens, which carry their preceding layout, so concatenating the
    leaves in order reproduces the consumed source exactly. Operator nodes keep
    the definition they were parsed under in `op`.
    """

    label: CstLabel
    children: tuple[CstNode | Token, ...]
    priority: int = 0
    op: OpDef | None = None

    def tokens(self) -> Iterator[Token]:
        """Yield every token below this node in source order."""
        stack: list[CstNode | Token] = [self]
        while stack:
            item = stack.pop()
            if isinstance(item, Token):
                yield item
            else:
                stack.extend(reversed(item.children))

    def nodes(self) -> Iterator[CstNode]:
        """Yield this node and every node below it, parents first."""
        stack: list[CstNode] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(c for c in reversed(node.children) if isinstance(c, CstNode))

    def serialize(self) -> str:
        """Return the source text covered by this node, layout included."""
        return "".join(token.source_text for token in self.tokens())

    def first_token(self) -> Token | None:
        """Return the first token below this node."""
        return next(self.tokens(), None)

    def last_token(self) -> Token | None:
        """Return the last token below this node."""
        node: CstNode | Token = self
        while isinstance(node, CstNode):
            if not node.children:
                return None
            node = node.children[-1]
        return node

    @property
    def span(self) -> SourceSpan | None:
        """The span from the first to the last token, layout excluded."""
        first, last = self.first_token(), self.last_token()
        if first is None or last is None:
            return None
        return first.span.cover(last.span)


class ParseError(PrologSyntaxError):
    """A clause that does not form a valid term."""

    def __init__(
        self, message: str, *, source: str, span: SourceSpan, expected: str = "", index: int = 0
    ) -> None:
        """Record what was expected in addition to the location."""
        super().__init__(message, source=source, span=span)
        self.expected = expected
        self.index = index


@dataclass(frozen=True)
class ParseOutcome:
    """The result of parsing a whole program."""

    cst: CstNode
    table_final: OperatorTable
    deduced_ops: list[OpDef] = field(default_factory=list)
    errors: list[ParseError] = field(default_factory=list)

    @property
    def clauses(self) -> list[CstNode]:
        """The clause, directive and invalid_clause nodes in source order."""
        return [c for c in self.cst.children if isinstance(c, CstNode)]


def atom_value(token: Token) -> str:
    """Return the atom a name token denotes, decoding quotes."""
    if token.text.startswith("'"):
        return _quoting.decode_quoted(token.text)
    return token.text


class _Parser:
    def __init__(
        self,
        tokens: Sequence[Token],
        table: OperatorTable,
        dialect: DialectOptions,
        *,
        source: str | None = None,
    ) -> None:
        self.tokens = tokens
        self.table = table
        self.dialect = dialect
        self.position = 0
        self._source = source
        self.argument_priority = (
            MAX_PRIORITY if dialect.allow_arg_precedence_geq_1000 else ARGUMENT_PRIORITY
        )

    @functools.cached_property
    def source(self) -> str:
        if self._source is not None:
            return self._source
        return "".join(token.source_text for token in self.tokens)

    def peek(self, offset: int = 0) -> Token | None:
        index = self.position + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def check(self, kind: str, *, offset: int = 0) -> bool:
        token = self.peek(offset)
        return token is not None and token.kind == kind

    def read(self) -> Token:
        token = self.tokens[self.position]
        self.position += 1
        return token

    def raise_syntax_error(self, message: str, *, expected: str = "") -> ParseError:
        index = min(self.position, len(self.tokens) - 1)
        span = self.tokens[index].span if self.tokens else _EMPTY_SPAN
        return ParseError(
            message, source=self.source, span=span, expected=expected, index=self.position
        )

    def expect(self, kind: str, *, expected: str) -> Token:
        if not self.check(kind):
            token = self.peek()
            found = "end of input" if token is None or token.kind == "eof" else repr(token.text)
            raise self.raise_syntax_error(f"Expected {expected}, found {found}", expected=expected)
        return self.read()

    def parse(self, max_priority: int, *, arg_mode: bool = False) -> CstNode:
        """
        term = primary (infix_op term | postfix_op)*
        """
        left = self._parse_primary(max_priority, arg_mode=arg_mode)
        if left.priority > max_priority:
            token = left.first_token()
            text = token.text if token is not None else ""
            raise self.raise_syntax_error(
                f"Operator {text!r} used as an operand needs parentheses",
                expected=f"term of priority <= {max_priority}",
            )
        return self._parse_operators(left, max_priority, arg_mode=arg_mode)

    def _operator_name(self, token: Token, *, arg_mode: bool) -> str | None:
        if token.kind == "name":
            return atom_value(token)
        if arg_mode:
            return None
        if token.kind == "comma":
            return ","
        if token.kind == "bar":
            return "|"
        return None

    def _parse_operators(self, left: CstNode, max_priority: int, *, arg_mode: bool) -> CstNode:
        while (token := self.peek()) is not None:
            name = self._operator_name(token, arg_mode=arg_mode)
            if name is None:
                return left
            op = self.table.infix_op(name)
            if op is not None and op.priority <= max_priority and left.priority <= op.left_max:
                self.read()
                right = self.parse(op.right_max, arg_mode=arg_mode)
                left = CstNode("infix", (left, token, right), op.priority, op)
                continue
            op = self.table.postfix_op(name)
            if op is not None and op.priority <= max_priority and left.priority <= op.left_max:
                self.read()
                left = CstNode("postfix", (left, token), op.priority, op)
                continue
            return left
        return left

    def _parse_primary(self, max_priority: int, *, arg_mode: bool) -> CstNode:
        """
        primary = negative_number | compound | dict | prefix_op term | atom
                | VARIABLE | NUMBER | STRING | paren | list | curly
        """
        token = self.peek()
        if token is None or token.kind in ("end", "eof"):
            raise self.raise_syntax_error("Unexpected end of clause", expected="term")
        kind = token.kind
        following = self.peek(1)
        if kind == "name":
            if following is not None and following.kind == "open_ct":
                return self._parse_compound()
            if following is not None and following.kind == "dict_open":
                return self._parse_dict()
            if (
                token.text == "-"
                and following is not None
                and following.kind in _NUMBERS
                and not following.layout_before
            ):
                return CstNode("negative_number", (self.read(), self.read()))
            prefix = self._parse_prefix(token, max_priority, arg_mode=arg_mode)
            if prefix is not None:
                return prefix
            return self._parse_atom(arg_mode=arg_mode)
        if kind == "variable":
            if following is not None and following.kind == "dict_open":
                return self._parse_dict()
            return CstNode("variable", (self.read(),))
        if kind in _NUMBERS:
            return CstNode("number", (self.read(),))
        if kind in ("double_quoted", "back_quoted"):
            return CstNode("string", (self.read(),))
        if kind in ("open_paren", "open_ct"):
            return self._parse_paren()
        if kind == "open_list":
            return self._parse_list()
        if kind == "open_curly":
            return self._parse_curly()
        raise self.raise_syntax_error(f"Unexpected {token.text!r}", expected="term")

    def _parse_prefix(self, token: Token, max_priority: int, *, arg_mode: bool) -> CstNode | None:
        """
        prefix_term = PREFIX_OP term
        """
        op = self.table.prefix_op(atom_value(token))
        if op is None or op.priority > max_priority or self._atom_follows():
            return None
        start = self.position
        self.read()
        try:
            operand = self.parse(op.right_max, arg_mode=arg_mode)
        except ParseError as exc:
            # Only an operand that fails at its first token makes this an atom.
            if exc.index != start + 1:
                raise
            self.position = start
            return None
        return CstNode("prefix", (token, operand), op.priority, op)

    def _atom_follows(self) -> bool:
        """Whether the prefix operator at the current position can only be an atom."""
        following = self.peek(1)
        if following is None or following.kind in _STOPPERS:
            return True
        if following.kind != "name" or self.check("open_ct", offset=2):
            return False
        name = atom_value(following)
        return (
            self.table.infix_op(name) is not None or self.table.postfix_op(name) is not None
        ) and self.table.prefix_op(name) is None

    def _parse_atom(self, *, arg_mode: bool) -> CstNode:
        token = self.read()
        priority = 0
        if self.table.is_op(atom_value(token)) and not self.dialect.allow_operator_as_operand:
            following = self.peek()
            enclosed = following is not None and (
                following.kind in _CLOSERS or (arg_mode and following.kind in ("comma", "bar"))
            )
            priority = 0 if enclosed else OPERATOR_ATOM_PRIORITY
        return CstNode("atom", (token,), priority)

    def _parse_arguments(self) -> CstNode:
        """
        arg_list = arg ("," arg)*
        """
        items: list[CstNode | Token] = [self.parse(self.argument_priority, arg_mode=True)]
        while self.check("comma"):
            items.append(self.read())
            items.append(self.parse(self.argument_priority, arg_mode=True))
        return CstNode("arg_list", tuple(items))

    def _parse_compound(self) -> CstNode:
        """
        compound = NAME OPEN_CT arg_list? CLOSE_PAREN
        """
        name = self.read()
        open_ct = self.read()
        if self.check("close_paren"):
            if not self.dialect.allow_compounds_with_zero_arguments:
                raise self.raise_syntax_error(
                    "Compound term without arguments", expected="argument"
                )
            arguments = CstNode("arg_list", ())
        else:
            arguments = self._parse_arguments()
        close = self.expect("close_paren", expected="',' or ')' after argument")
        return CstNode("compound", (name, open_ct, arguments, close))

    def _parse_paren(self) -> CstNode:
        """
        paren = "(" term ")"
        """
        open_paren = self.read()
        inner = self.parse(MAX_PRIORITY)
        close = self.expect("close_paren", expected="')'")
        return CstNode("paren", (open_paren, inner, close))

    def _parse_list(self) -> CstNode:
        """
        list = "[" "]" | "[" arg_list ("|" arg)? "]"
        """
        open_list = self.read()
        if self.check("close_list"):
            return CstNode("atom", (open_list, self.read()))
        children: list[CstNode | Token] = [open_list, self._parse_arguments()]
        if self.check("bar"):
            children.append(self.read())
            children.append(self.parse(self.argument_priority, arg_mode=True))
        children.append(self.expect("close_list", expected="',', '|' or ']' in list"))
        return CstNode("list", tuple(children))

    def _parse_curly(self) -> CstNode:
        """
        curly = "{" "}" | "{" term "}"
        """
        open_curly = self.read()
        if self.check("close_curly"):
            return CstNode("atom", (open_curly, self.read()))
        inner = self.parse(MAX_PRIORITY)
        close = self.expect("close_curly", expected="'}'")
        return CstNode("curly", (open_curly, inner, close))

    def _parse_dict(self) -> CstNode:
        """
        dict = (NAME | VARIABLE) DICT_OPEN (dict_pair ("," dict_pair)*)? "}"
        """
        children: list[CstNode | Token] = [self.read(), self.read()]
        if not self.check("close_curly"):
            children.append(self._parse_dict_pair())
            while self.check("comma"):
                children.append(self.read())
                children.append(self._parse_dict_pair())
        children.append(self.expect("close_curly", expected="',' or '}' in dict"))
        return CstNode("dict", tuple(children))

    def _parse_dict_pair(self) -> CstNode:
        """
        dict_pair = (NAME | INTEGER) ":" arg
        """
        key = self.peek()
        if key is None or key.kind not in ("name", "integer"):
            raise self.raise_syntax_error("Expected dict key", expected="atom or integer key")
        self.read()
        colon = self.peek()
        if colon is None or colon.kind != "name" or colon.text != ":":
            raise self.raise_syntax_error("Expected ':' after dict key", expected="':'")
        self.read()
        value = self.parse(self.argument_priority, arg_mode=True)
        return CstNode("dict_pair", (key, colon, value))

    def parse_clause(self) -> CstNode:
        """
        clause = term END
        """
        term = self.parse(MAX_PRIORITY)
        end = self.expect("end", expected="operator or end of clause")
        first = term.children[0] if term.label == "prefix" else None
        directive = isinstance(first, Token) and atom_value(first) in (":-", "?-")
        return CstNode("directive" if directive else "clause", (term, end), term.priority)


_EMPTY_SPAN = SourceSpan(byte_start=0, byte_end=0, line_start=1, col_start=1, line_end=1, col_end=1)


def _clause_end(tokens: Sequence[Token], start: int) -> int:
    """Index just past the end token that closes the clause starting at `start`."""
    for index in range(start, len(tokens)):
        if tokens[index].kind == "end":
            return index + 1
        if tokens[index].kind == "eof":
            return index
    return len(tokens)


class _ProgramParser:
    def __init__(
        self,
        tokens: Sequence[Token],
        table: OperatorTable,
        dialect: DialectOptions,
        *,
        deadline: float | None,
        clock: Callable[[], float],
    ) -> None:
        self.tokens = tokens
        self.table = table
        self.dialect = dialect
        self.deadline = deadline
        self.clock = clock
        self.source = "".join(token.source_text for token in tokens)
        self.deduced: list[OpDef] = []
        self.errors: list[ParseError] = []

    def _parser(self, table: OperatorTable, position: int) -> _Parser:
        parser = _Parser(self.tokens, table, self.dialect, source=self.source)
        parser.position = position
        return parser

    def run(self) -> ParseOutcome:
        children: list[CstNode | Token] = []
        position = 0
        while position < len(self.tokens):
            if self.tokens[position].kind == "eof":
                children.append(self.tokens[position])
                break
            if self.deadline is not None and self.clock() >= self.deadline:
                raise ParseTimeout("deadline passed while parsing")
            clause, position = self._clause(position)
            children.append(clause)
        return ParseOutcome(
            cst=CstNode("prolog_text", tuple(children)),
            table_final=self.table,
            deduced_ops=self.deduced,
            errors=self.errors,
        )

    def _clause(self, start: int) -> tuple[CstNode, int]:
        parser = self._parser(self.table, start)
        try:
            clause = parser.parse_clause()
        except ParseError as exc:
            deduced = self._deduce(start) if self.dialect.deduce_operators else None
            if deduced is None:
                self.errors.append(exc)
                end = _clause_end(self.tokens, start)
                return CstNode("invalid_clause", tuple(self.tokens[start:end])), end
            clause, parser = deduced
        if clause.label == "directive":
            self._apply_directives(self.tokens[start : parser.position])
        return clause, parser.position

    def _deduce(self, start: int) -> tuple[CstNode, _Parser] | None:
        """Find one missing prefix or postfix operator that makes the clause parse."""
        end = _clause_end(self.tokens, start)
        seen: set[str] = set()
        for token in self.tokens[start:end]:
            name = atom_value(token) if token.kind == "name" else None
            if name is None or name in seen or self.table.is_op(name):
                continue
            seen.add(name)
            for specifier in ("fy", "yf"):
                op = OpDef(name, DEDUCED_PRIORITY, specifier)  # type: ignore[arg-type]
                parser = self._parser(self.table.with_op(op), start)
                try:
                    clause = parser.parse_clause()
                except ParseError:
                    continue
                _logger.debug("deduced operator %s", op)
                self.deduced.append(op)
                self.table = parser.table
                return clause, parser
        return None

    def _apply_directives(self, tokens: Sequence[Token]) -> None:
        for directive in scan_op_directives(tokens):
            try:
                self.table = directive.apply(self.table)
            except OpError as exc:
                _logger.warning(
                    "line %d: ignoring op directive: %s", directive.span.line_start, exc
                )


def parse_program(
    tokens: Sequence[Token],
    table: OperatorTable,
    dialect: DialectOptions,
    *,
    deadline: float | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> ParseOutcome:
    """Parse a token stream into clauses.

    op/3 calls in directives take effect from the next clause on. A clause that
    does not parse is kept verbatim as an ``invalid_clause`` node and its error
    is collected, so one bad clause never hides the rest of the file. When
    `deadline` (a `clock` reading) passes, ParseTimeout is raised.
    """
    with deep_recursion():
        return _ProgramParser(tokens, table, dialect, deadline=deadline, clock=clock).run()


def parse_source(
    source: str,
    dialect: DialectOptions,
    *,
    table: OperatorTable | None = None,
    deadline: float | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> ParseOutcome:
    """Tokenize and parse `source`, starting from the default operator table."""
    if table is None:
        table = default_table(dialect.profile, dicts=dialect.dicts)
    tokens = tokenize(source, dialect, deadline=deadline, clock=clock)
    return parse_program(tokens, table, dialect, deadline=deadline, clock=clock)


def parse_term(
    tokens: Sequence[Token],
    max_priority: int,
    table: OperatorTable,
    dialect: DialectOptions,
) -> tuple[CstNode, Sequence[Token]]:
    """Parse one term of priority at most `max_priority`.

    Returns the term and the tokens that follow it.
    """
    if not 0 <= max_priority <= MAX_PRIORITY:
        raise ValueError(f"max_priority must be within 0..{MAX_PRIORITY}, got {max_priority}")
    parser = _Parser(tokens, table, dialect)
    with deep_recursion():
        node = parser.parse(max_priority)
    return node, tokens[parser.position :]


def parse_dict(
    tokens: Sequence[Token], table: OperatorTable, dialect: DialectOptions
) -> CstNode:
    """Parse a dict such as ``point{a: 1}`` at the start of `tokens`."""
    parser = _Parser(tokens, table, dialect)
    if len(tokens) < 2 or tokens[1].kind != "dict_open":  # noqa: PLR2004
        raise parser.raise_syntax_error("Expected a dict", expected="tag followed by '{'")
    return parser._parse_dict()  # noqa: SLF001
