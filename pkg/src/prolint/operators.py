"""Operator tables and the op/3 directive."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Literal, get_args

from prolint import _quoting
from prolint.dialect import Profile
from prolint.lexer import SourceSpan, Token

__all__ = [
    "OpDef",
    "OpDirective",
    "OpError",
    "OperatorTable",
    "Specifier",
    "apply_op_directive",
    "default_table",
    "scan_op_directives",
]

_logger = logging.getLogger(__name__)

Specifier = Literal["xfx", "xfy", "yfx", "fy", "fx", "xf", "yf"]
OpKind = Literal["prefix", "infix", "postfix"]

MAX_PRIORITY = 1200
ARGUMENT_PRIORITY = 999

_PREFIX: frozenset[str] = frozenset({"fy", "fx"})
_POSTFIX: frozenset[str] = frozenset({"xf", "yf"})

_ISO_OPERATORS: tuple[tuple[int, Specifier, tuple[str, ...]], ...] = (
    (1200, "xfx", (":-", "-->")),
    (1200, "fx", (":-", "?-")),
    (1100, "xfy", (";",)),
    (1050, "xfy", ("->",)),
    (1000, "xfy", (",",)),
    (900, "fy", ("\\+",)),
    (
        700,
        "xfx",
        (
            "=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=",
            "=..", "is", "=:=", "=\\=", "<", ">", "=<", ">=",
        ),
    ),
    (500, "yfx", ("+", "-", "/\\", "\\/")),
    (400, "yfx", ("*", "/", "//", "rem", "mod", "<<", ">>")),
    (200, "xfx", ("**",)),
    (200, "xfy", ("^", ":")),
    (200, "fy", ("-", "+", "\\")),
)  # fmt: skip

_SWI_OPERATORS: tuple[tuple[int, Specifier, tuple[str, ...]], ...] = (
    (1150, "fx", (
        "dynamic", "discontiguous", "initialization", "meta_predicate",
        "module_transparent", "multifile", "public", "thread_local", "table",
    )),
    (1100, "xfy", ("|",)),
    (1050, "xfy", ("*->",)),
    (990, "xfx", (":=",)),
    (700, "xfx", ("as", ">:<", ":<", "=@=", "\\=@=")),
    (500, "yfx", ("xor",)),
    (400, "yfx", ("div", "rdiv")),
    (1, "fx", ("$",)),
)  # fmt: skip


def _kind(specifier: str) -> OpKind:
    if specifier in _PREFIX:
        return "prefix"
    if specifier in _POSTFIX:
        return "postfix"
    return "infix"


class OpError(ValueError):
    """An op/3 directive that cannot be applied.

    Like other validation errors in this package, the error carries an optional
    `context` naming what was being defined.
    """

    context: str | None = None
    message: str

    def __init__(self, cause: str | Exception, *, context: str | None = None) -> None:
        """Wrap `cause`, nesting the context of another OpError if given one."""
        if isinstance(cause, OpError):
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


@dataclass(frozen=True, slots=True)
class OpDef:
    """One operator definition."""

    name: str
    priority: int
    specifier: Specifier

    @property
    def kind(self) -> OpKind:
        """Whether this is a prefix, infix or postfix operator."""
        return _kind(self.specifier)

    @property
    def left_max(self) -> int:
        """Highest priority accepted for the left argument (infix and postfix)."""
        return self.priority if self.specifier[0] == "y" else self.priority - 1

    @property
    def right_max(self) -> int:
        """Highest priority accepted for the right argument (infix and prefix)."""
        return self.priority if self.specifier[-1] == "y" else self.priority - 1


@dataclass(frozen=True, eq=True)
class OperatorTable:
    """An immutable snapshot of operator definitions.

    A name holds at most one prefix definition and at most one infix or postfix
    definition. Updates return new tables; the dictionaries must not be mutated.
    """

    prefix: dict[str, OpDef] = field(default_factory=dict)
    infix_postfix: dict[str, OpDef] = field(default_factory=dict)

    def prefix_op(self, name: str) -> OpDef | None:
        """Return the prefix definition of `name`, if any."""
        return self.prefix.get(name)

    def infix_op(self, name: str) -> OpDef | None:
        """Return the infix definition of `name`, if any."""
        op = self.infix_postfix.get(name)
        return op if op is not None and op.kind == "infix" else None

    def postfix_op(self, name: str) -> OpDef | None:
        """Return the postfix definition of `name`, if any."""
        op = self.infix_postfix.get(name)
        return op if op is not None and op.kind == "postfix" else None

    def is_op(self, name: str) -> bool:
        """Whether `name` has any operator definition."""
        return name in self.prefix or name in self.infix_postfix

    def lookup(self, name: str) -> tuple[OpDef, ...]:
        """Return every definition of `name`, prefix first."""
        return tuple(
            op for op in (self.prefix.get(name), self.infix_postfix.get(name)) if op is not None
        )

    def __iter__(self) -> Iterator[OpDef]:
        """Iterate over all definitions, ordered by name and kind."""
        ops = [*self.prefix.values(), *self.infix_postfix.values()]
        return iter(sorted(ops, key=lambda op: (op.name, op.kind)))

    def with_op(self, op: OpDef) -> OperatorTable:
        """Return a copy of the table with `op` added or replaced."""
        if op.kind == "prefix":
            return OperatorTable({**self.prefix, op.name: op}, self.infix_postfix)
        existing = self.infix_postfix.get(op.name)
        if existing is not None and existing.kind != op.kind:
            raise OpError(
                f"Cannot define {op.name!r} as {op.kind}, it is already {existing.kind}",
                context=op.name,
            )
        return OperatorTable(self.prefix, {**self.infix_postfix, op.name: op})

    def without(self, name: str, specifier: Specifier) -> OperatorTable:
        """Return a copy with the definition in the slot of `specifier` removed."""
        if specifier in _PREFIX:
            prefix = dict(self.prefix)
            prefix.pop(name, None)
            return OperatorTable(prefix, self.infix_postfix)
        infix_postfix = dict(self.infix_postfix)
        existing = infix_postfix.get(name)
        if existing is not None and existing.kind == _kind(specifier):
            del infix_postfix[name]
        return OperatorTable(self.prefix, infix_postfix)

    def extended(self, ops: Iterable[OpDef]) -> OperatorTable:
        """Return a copy with every definition in `ops` added."""
        table = self
        for op in ops:
            table = table.with_op(op)
        return table


def _expand(rows: Iterable[tuple[int, Specifier, tuple[str, ...]]]) -> Iterator[OpDef]:
    for priority, specifier, names in rows:
        for name in names:
            yield OpDef(name, priority, specifier)


def default_table(profile: Profile = "iso", *, dicts: bool = False) -> OperatorTable:
    """Return the predefined operators of `profile`.

    The swi profile adds the operators SWI-Prolog predefines; the ``.`` operator
    used for dict field access is only present when `dicts` is set.
    """
    table = OperatorTable().extended(_expand(_ISO_OPERATORS))
    if profile == "swi":
        table = table.extended(_expand(_SWI_OPERATORS))
        if dicts:
            table = table.with_op(OpDef(".", 100, "yfx"))
    return table


def _check_name(name: str, specifier: str, priority: int) -> None:
    if name == ",":
        raise OpError("The comma operator cannot be modified", context=name)
    if name in ("[]", "{}"):
        raise OpError("Block operators are not supported", context=name)
    bar_allowed = _kind(specifier) == "infix" and priority > ARGUMENT_PRIORITY + 1
    if name == "|" and priority != 0 and not bar_allowed:
        raise OpError("'|' can only be an infix operator with priority >= 1001", context=name)


def apply_op_directive(
    table: OperatorTable, priority: int, specifier: str, names: str | Sequence[str]
) -> OperatorTable:
    """Apply ``op(priority, specifier, names)`` to `table` and return the result.

    Priority 0 removes the definition in the slot the specifier selects. The
    input table is left untouched.
    """
    if not 0 <= priority <= MAX_PRIORITY:
        raise OpError(f"Priority {priority} is outside 0..{MAX_PRIORITY}")
    if specifier not in get_args(Specifier):
        raise OpError(f"Invalid operator specifier {specifier!r}")
    spec: Specifier = specifier  # type: ignore[assignment]
    for name in [names] if isinstance(names, str) else names:
        _check_name(name, spec, priority)
        if priority == 0:
            table = table.without(name, spec)
        else:
            table = table.with_op(OpDef(name, priority, spec))
    return table


@dataclass(frozen=True, slots=True)
class OpDirective:
    """An ``op(P, Spec, Names)`` call found in a directive."""

    priority: int
    specifier: str
    names: tuple[str, ...]
    span: SourceSpan

    def apply(self, table: OperatorTable) -> OperatorTable:
        """Apply this directive to `table`."""
        return apply_op_directive(table, self.priority, self.specifier, self.names)


def _atom_value(token: Token) -> str | None:
    if token.kind != "name":
        return None
    if token.text.startswith("'"):
        return _quoting.decode_quoted(token.text)
    return token.text


def _match_names(tokens: Sequence[Token], pos: int) -> tuple[tuple[str, ...], int] | None:
    """Match a single atom or a list of atoms starting at `pos`."""
    if pos >= len(tokens):
        return None
    single = _atom_value(tokens[pos])
    if single is not None:
        return (single,), pos + 1
    if tokens[pos].kind != "open_list":
        return None
    names: list[str] = []
    pos += 1
    while pos < len(tokens):
        name = _atom_value(tokens[pos])
        if name is None:
            return None
        names.append(name)
        pos += 1
        if pos < len(tokens) and tokens[pos].kind == "close_list":
            return tuple(names), pos + 1
        if pos >= len(tokens) or tokens[pos].kind != "comma":
            return None
        pos += 1
    return None


def _match_op_call(tokens: Sequence[Token], pos: int) -> OpDirective | None:
    """Match ``op ( INTEGER , NAME , NAMES )`` starting at `pos`."""
    window = tokens[pos : pos + 6]
    if len(window) < 6 or [t.kind for t in window[1:5]] != [  # noqa: PLR2004
        "open_ct",
        "integer",
        "comma",
        "name",
    ]:
        return None
    if window[5].kind != "comma" or not window[2].text.isdigit():
        return None
    names = _match_names(tokens, pos + 6)
    if names is None:
        return None
    found, end = names
    if end >= len(tokens) or tokens[end].kind != "close_paren":
        return None
    return OpDirective(
        priority=int(window[2].text),
        specifier=window[4].text,
        names=found,
        span=tokens[pos].span.cover(tokens[end].span),
    )


def _clauses(tokens: Sequence[Token]) -> Iterator[Sequence[Token]]:
    start = 0
    for index, token in enumerate(tokens):
        if token.kind == "end":
            yield tokens[start:index]
            start = index + 1
    if start < len(tokens):
        yield tokens[start:]


def scan_op_directives(tokens: Sequence[Token]) -> list[OpDirective]:
    """Find the op/3 calls inside directive clauses without parsing them.

    A directive is a clause whose first token is ``:-``; its op/3 calls may sit
    anywhere inside it, including a module export list.
    """
    found: list[OpDirective] = []
    for clause in _clauses(tokens):
        if not clause or clause[0].kind != "name" or clause[0].text != ":-":
            continue
        for index, token in enumerate(clause):
            if token.kind == "name" and token.text == "op":
                directive = _match_op_call(clause, index)
                if directive is not None:
                    _logger.debug("found op directive %s", directive)
                    found.append(directive)
    return found
