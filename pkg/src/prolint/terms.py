"""Abstract syntax trees and the conversion from concrete syntax trees.

The abstract tree drops all layout and parentheses. Each top-level term becomes
a rule, a fact or a directive; a rule body is the list of its subgoals, obtained
by flattening only the top-level right-nested ``,``/2 chain.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Literal

from prolint import _quoting
from prolint._recursion import deep_recursion
from prolint.lexer import SourceSpan, Token
from prolint.operators import Specifier
from prolint.parser import CstNode, atom_value

__all__ = [
    "Atom",
    "AstNode",
    "AstWithOrigin",
    "Clause",
    "Compound",
    "Curly",
    "Dict",
    "Directive",
    "Fact",
    "Float",
    "Infix",
    "Integer",
    "List",
    "Postfix",
    "Prefix",
    "Program",
    "Rule",
    "String",
    "Term",
    "Variable",
    "atom_text",
    "cst_to_ast",
    "dump",
    "render_term",
]

IntegerNotation = Literal["decimal", "char_code", "hex", "octal", "binary", "digit_groups"]
FloatNotation = Literal["decimal", "exponent"]
QuoteKind = Literal["double", "back"]


@dataclass(frozen=True, slots=True)
class Atom:
    """An atom, by value; quoting is not part of the tree.

    `brackets` marks the empty pair ``[]`` or ``{}``. SWI-Prolog keeps these
    apart from the quoted atoms '[]' and '{}', so the tree does too.
    """

    name: str
    brackets: bool = False


@dataclass(frozen=True, slots=True)
class Variable:
    """A variable, anonymous when the name is ``_``."""

    name: str


@dataclass(frozen=True, slots=True)
class Integer:
    """An integer literal.

    The notation is part of the value so that reformatting keeps ``0'a`` or
    ``0xff`` as written; the verbatim text does not take part in comparisons.
    """

    value: int
    notation: IntegerNotation = "decimal"
    text: str = field(default="", compare=False)


@dataclass(frozen=True, slots=True)
class Float:
    """A floating point literal."""

    value: float
    notation: FloatNotation = "decimal"
    text: str = field(default="", compare=False)


@dataclass(frozen=True, slots=True)
class String:
    """A double-quoted or back-quoted text, by value."""

    text: str
    quote: QuoteKind = "double"


@dataclass(frozen=True, slots=True)
class Compound:
    """A compound term in functional notation."""

    functor: str
    args: tuple[Term, ...]


@dataclass(frozen=True, slots=True)
class Infix:
    """A term written with an infix operator."""

    op: str
    specifier: Specifier
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Prefix:
    """A term written with a prefix operator."""

    op: str
    specifier: Specifier
    arg: Term


@dataclass(frozen=True, slots=True)
class Postfix:
    """A term written with a postfix operator."""

    op: str
    specifier: Specifier
    arg: Term


@dataclass(frozen=True, slots=True)
class List:
    """A list with an optional tail after ``|``."""

    elements: tuple[Term, ...]
    tail: Term | None = None


@dataclass(frozen=True, slots=True)
class Curly:
    """A ``{}``/1 term."""

    term: Term


@dataclass(frozen=True, slots=True)
class Dict:
    """A dict such as ``point{x: 1}``."""

    tag: Term
    pairs: tuple[tuple[Term, Term], ...]


Term = (
    Atom | Variable | Integer | Float | String | Compound
    | Infix | Prefix | Postfix | List | Curly | Dict
)


@dataclass(frozen=True, slots=True)
class Rule:
    """``Head :- Body`` with the body flattened into subgoals."""

    head: Term
    body: tuple[Term, ...]


@dataclass(frozen=True, slots=True)
class Fact:
    """A clause that is not a rule; DCG rules are facts of ``-->``/2."""

    head: Term


@dataclass(frozen=True, slots=True)
class Directive:
    """``:- Goal`` (or ``?- Goal``)."""

    goal: Term
    op: Literal[":-", "?-"] = ":-"


Clause = Rule | Fact | Directive


@dataclass(frozen=True, slots=True)
class Program:
    """All valid clauses of a source text, in order."""

    clauses: tuple[Clause, ...]


AstNode = Program | Clause | Term


@dataclass(frozen=True)
class AstWithOrigin:
    """An abstract tree together with the source span of every node."""

    ast: Program
    origin: dict[int, SourceSpan] = field(default_factory=dict, compare=False)

    def span_of(self, node: AstNode) -> SourceSpan | None:
        """Return the span of the concrete subtree `node` came from."""
        return self.origin.get(id(node))


def _integer(text: str) -> Integer:
    if text.startswith("0'"):
        return Integer(_quoting.char_code_value(text), "char_code", text)
    prefix = text[:2]
    if prefix == "0x":
        return Integer(int(text[2:], 16), "hex", text)
    if prefix == "0o":
        return Integer(int(text[2:], 8), "octal", text)
    if prefix == "0b":
        return Integer(int(text[2:], 2), "binary", text)
    if "_" in text:
        return Integer(int(text.replace("_", "")), "digit_groups", text)
    return Integer(int(text), "decimal", text)


def _number(token: Token, *, negative: bool = False) -> Integer | Float:
    sign = "-" if negative else ""
    if token.kind == "float":
        notation: FloatNotation = "decimal" if "." in token.text else "exponent"
        return Float(float(sign + token.text.replace("_", "")), notation, sign + token.text)
    number = _integer(token.text)
    if not negative:
        return number
    return Integer(-number.value, number.notation, sign + token.text)


class _Converter:
    def __init__(self) -> None:
        self.origin: dict[int, SourceSpan] = {}

    def _record[N: AstNode](self, node: N, cst: CstNode) -> N:
        span = cst.span
        if span is not None:
            self.origin[id(node)] = span
        return node

    def program(self, cst: CstNode) -> Program:
        clauses = [
            self.clause(child)
            for child in cst.children
            if isinstance(child, CstNode) and child.label != "invalid_clause"
        ]
        return self._record(Program(tuple(clauses)), cst)

    def clause(self, cst: CstNode) -> Clause:
        term = self.term(cst.children[0])
        if isinstance(term, Prefix) and term.op in (":-", "?-"):
            kind: Literal[":-", "?-"] = ":-" if term.op == ":-" else "?-"
            return self._record(Directive(term.arg, kind), cst)
        if isinstance(term, Infix) and term.op == ":-":
            return self._record(Rule(term.left, flatten_conjunction(term.right)), cst)
        return self._record(Fact(term), cst)

    def term(self, item: CstNode | Token) -> Term:
        cst = _unwrap(item)
        return self._record(self._term(cst), cst)

    def _term(self, cst: CstNode) -> Term:  # noqa: C901, PLR0911
        children = cst.children
        first = children[0]
        match cst.label:
            case "atom":
                assert isinstance(first, Token)
                if first.kind == "open_list":
                    return Atom("[]", brackets=True)
                if first.kind == "open_curly":
                    return Atom("{}", brackets=True)
                return Atom(atom_value(first))
            case "variable":
                assert isinstance(first, Token)
                return Variable(first.text)
            case "number":
                assert isinstance(first, Token)
                return _number(first)
            case "negative_number":
                number = children[1]
                assert isinstance(number, Token)
                return _number(number, negative=True)
            case "string":
                assert isinstance(first, Token)
                quote: QuoteKind = "double" if first.kind == "double_quoted" else "back"
                return String(_quoting.decode_quoted(first.text), quote)
            case "compound":
                assert isinstance(first, Token)
                args = children[2]
                assert isinstance(args, CstNode)
                return Compound(atom_value(first), self._arguments(args))
            case "infix":
                op = children[1]
                assert isinstance(op, Token)
                return Infix(
                    _operator_name(op),
                    _specifier(cst),
                    self.term(children[0]),
                    self.term(children[2]),
                )
            case "prefix":
                assert isinstance(first, Token)
                return Prefix(atom_value(first), _specifier(cst), self.term(children[1]))
            case "postfix":
                op = children[1]
                assert isinstance(op, Token)
                return Postfix(atom_value(op), _specifier(cst), self.term(children[0]))
            case "list":
                items = children[1]
                assert isinstance(items, CstNode)
                tail = self.term(children[3]) if len(children) == 5 else None  # noqa: PLR2004
                return List(self._arguments(items), tail)
            case "curly":
                return Curly(self.term(children[1]))
            case "dict":
                pairs = tuple(
                    self._pair(child)
                    for child in children
                    if isinstance(child, CstNode) and child.label == "dict_pair"
                )
                assert isinstance(first, Token)
                if first.kind == "variable":
                    return Dict(Variable(first.text), pairs)
                return Dict(Atom(atom_value(first)), pairs)
        raise ValueError(f"Cannot convert a {cst.label} node to a term")

    def _arguments(self, cst: CstNode) -> tuple[Term, ...]:
        return tuple(self.term(child) for child in cst.children if isinstance(child, CstNode))

    def _pair(self, cst: CstNode) -> tuple[Term, Term]:
        key = cst.children[0]
        assert isinstance(key, Token)
        key_term: Term = _integer(key.text) if key.kind == "integer" else Atom(atom_value(key))
        return key_term, self.term(cst.children[2])


def _specifier(cst: CstNode) -> Specifier:
    if cst.op is None:
        raise ValueError(f"The {cst.label} node carries no operator definition")
    return cst.op.specifier


def _operator_name(token: Token) -> str:
    if token.kind == "comma":
        return ","
    if token.kind == "bar":
        return "|"
    return atom_value(token)


def _unwrap(item: CstNode | Token) -> CstNode:
    """Strip parentheses, which the abstract tree does not keep."""
    if not isinstance(item, CstNode):
        raise TypeError(f"Expected a term node, got token {item.text!r}")
    while item.label == "paren":
        inner = item.children[1]
        assert isinstance(inner, CstNode)
        item = inner
    return item


def flatten_conjunction(body: Term) -> tuple[Term, ...]:
    """Split a rule body along its top-level right-nested ``,``/2 chain."""
    goals: list[Term] = []
    while isinstance(body, Infix) and body.op == ",":
        goals.append(body.left)
        body = body.right
    goals.append(body)
    return tuple(goals)


def cst_to_ast(cst: CstNode) -> AstWithOrigin:
    """Convert a ``prolog_text`` tree into its abstract tree.

    Invalid clauses are left out. The returned origin map gives, for every
    node, the span of the concrete subtree it came from.
    """
    converter = _Converter()
    with deep_recursion():
        program = converter.program(cst)
    return AstWithOrigin(program, converter.origin)


def atom_text(atom: Atom) -> str:
    """Return source text that reads back as `atom`, quoting only where needed."""
    if atom.brackets:
        return atom.name
    if atom.name in ("[]", "{}"):
        return _quoting.quote_text(atom.name, "'")
    return _quoting.quote_atom(atom.name)


def _render_items(items: tuple[AstNode, ...]) -> str:
    return "[" + ", ".join(render_term(item) for item in items) + "]"


def render_term(node: AstNode) -> str:  # noqa: C901, PLR0911, PLR0912
    """Render `node` on one line in the shape ``prolog([rule(..., [...])])``."""
    match node:
        case Program(clauses):
            return f"prolog({_render_items(clauses)})"
        case Rule(head, body):
            return f"rule({render_term(head)}, {_render_items(body)})"
        case Fact(head):
            return f"fact({render_term(head)})"
        case Directive(goal, _):
            return f"directive({render_term(goal)})"
        case Atom():
            return f"atom({atom_text(node)})"
        case Variable(name):
            return f"variable({_quoting.quote_atom(name)})"
        case Integer(value, _):
            return f"integer({value})"
        case Float(value, _):
            return f"float({value!r})"
        case String(text, quote):
            return f"string({_quoting.quote_text(text, '"' if quote == 'double' else '`')})"
        case Compound(functor, args):
            return f"compound(atom({_quoting.quote_atom(functor)}), {_render_items(args)})"
        case Infix(op, specifier, left, right):
            op_text = _quoting.quote_atom(op)
            return f"infix({op_text}, {specifier}, {render_term(left)}, {render_term(right)})"
        case Prefix(op, specifier, arg):
            return f"prefix({_quoting.quote_atom(op)}, {specifier}, {render_term(arg)})"
        case Postfix(op, specifier, arg):
            return f"postfix({_quoting.quote_atom(op)}, {specifier}, {render_term(arg)})"
        case List(elements, None):
            return f"list({_render_items(elements)})"
        case List(elements, tail):
            assert tail is not None
            return f"list({_render_items(elements)}, {render_term(tail)})"
        case Curly(term):
            return f"curly({render_term(term)})"
        case Dict(tag, pairs):
            rendered = ", ".join(f"pair({render_term(k)}, {render_term(v)})" for k, v in pairs)
            return f"dict({render_term(tag)}, [{rendered}])"
    raise TypeError(f"Not an AST node: {node!r}")


def _describe(node: AstNode) -> tuple[str, tuple[AstNode, ...]]:  # noqa: PLR0911
    """Return the one-line label of `node` and the children listed below it."""
    match node:
        case Program(clauses):
            return "prolog", clauses
        case Rule(head, _):
            return "rule", (head,)
        case Fact(head):
            return "fact", (head,)
        case Directive(goal, op):
            return f"directive {op}", (goal,)
        case Atom():
            return f"atom {atom_text(node)}", ()
        case Variable(name):
            return f"variable {name}", ()
        case Integer(value, notation, text):
            return f"integer {value} ({notation}{', ' + text if text else ''})", ()
        case Float(value, notation, _):
            return f"float {value!r} ({notation})", ()
        case String(text, quote):
            return f"string {_quoting.quote_text(text, '"' if quote == 'double' else '`')}", ()
        case Compound(functor, args):
            return f"compound {_quoting.quote_atom(functor)}/{len(args)}", args
        case Infix(op, specifier, left, right):
            return f"infix {_quoting.quote_atom(op)} {specifier}", (left, right)
        case Prefix(op, specifier, arg) | Postfix(op, specifier, arg):
            return f"{type(node).__name__.lower()} {_quoting.quote_atom(op)} {specifier}", (arg,)
        case List(elements, tail):
            return ("list" if tail is None else "list with tail"), (
                elements if tail is None else (*elements, tail)
            )
        case Curly(term):
            return "curly", (term,)
        case Dict(tag, pairs):
            return "dict", (tag, *(Compound(":", pair) for pair in pairs))
    raise TypeError(f"Not an AST node: {node!r}")


def _dump_lines(node: AstNode, depth: int) -> Iterator[str]:
    label, children = _describe(node)
    yield "  " * depth + label
    for child in children:
        yield from _dump_lines(child, depth + 1)
    if isinstance(node, Rule):
        yield "  " * (depth + 1) + "body"
        for goal in node.body:
            yield from _dump_lines(goal, depth + 2)


def dump(node: AstNode) -> str:
    """Render `node` as an indented tree, one node per line, two spaces per level."""
    with deep_recursion():
        return "\n".join(_dump_lines(node, 0)) + "\n"
