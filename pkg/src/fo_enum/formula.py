"""First-order formulas: AST, parser, pretty printer and size metrics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

# r = 2**size must stay a machine-sized integer
MAX_RADIUS_EXPONENT = 62


class FormulaError(ValueError):
    """Raised on malformed query text or signature violations."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


class RadiusOverflowError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for name, arity in self.relations:
            if name in seen:
                raise ValueError(f"duplicate relation {name!r}")
            if arity < 1:
                raise ValueError(f"relation {name!r} must have arity >= 1")
            seen.add(name)

    def arity(self, name: str) -> int | None:
        for rel, arity in self.relations:
            if rel == name:
                return arity
        return None

    def index(self, name: str) -> int:
        for i, (rel, _) in enumerate(self.relations):
            if rel == name:
                return i
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Node"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Node"


Node = Union[Atom, Eq, Not, And, Or, Exists, Forall]


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (Atom, Eq)):
        return ()
    if isinstance(node, (Not, Exists, Forall)):
        return (node.body,)
    return (node.left, node.right)


def walk(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children(current)))


def node_size(node: Node) -> int:
    return sum(1 for _ in walk(node))


def quantifier_rank(node: Node) -> int:
    if isinstance(node, (Atom, Eq)):
        return 0
    if isinstance(node, (Exists, Forall)):
        return 1 + quantifier_rank(node.body)
    return max(quantifier_rank(c) for c in children(node))


def free_occurrences(node: Node, bound: frozenset[str] = frozenset()) -> list[str]:
    """Free variable occurrences in left-to-right textual order (with repeats)."""
    if isinstance(node, Atom):
        return [v for v in node.args if v not in bound]
    if isinstance(node, Eq):
        return [v for v in (node.left, node.right) if v not in bound]
    if isinstance(node, (Exists, Forall)):
        return free_occurrences(node.body, bound | {node.var})
    out: list[str] = []
    for child in children(node):
        out.extend(free_occurrences(child, bound))
    return out


def free_set(node: Node) -> frozenset[str]:
    return frozenset(free_occurrences(node))


@dataclass(frozen=True)
class Formula:
    root: Node
    free_vars: tuple[str, ...]
    signature: Signature = field(compare=False)

    @property
    def k(self) -> int:
        return len(self.free_vars)

    @property
    def size(self) -> int:
        return node_size(self.root)

    @property
    def quantifier_rank(self) -> int:
        return quantifier_rank(self.root)

    def with_head(self, head: tuple[str, ...] | list[str]) -> "Formula":
        """Reorder the answer coordinates; ``head`` must permute the free variables."""
        head = tuple(head)
        if sorted(head) != sorted(self.free_vars) or len(set(head)) != len(head):
            raise FormulaError(
                f"head {list(head)} is not a permutation of the free variables {list(self.free_vars)}"
            )
        return Formula(self.root, head, self.signature)

    def __str__(self) -> str:
        return pretty(self.root)


@dataclass(frozen=True)
class LocalityRadius:
    r: int
    overridden: bool = False


def free_variables(f: Formula) -> tuple[str, ...]:
    return f.free_vars


def locality_radius(f: Formula, override: int | None = None) -> LocalityRadius:
    if override is not None:
        if override < 1:
            raise ValueError("radius override must be >= 1")
        return LocalityRadius(override, True)
    if f.size > MAX_RADIUS_EXPONENT:
        raise RadiusOverflowError(
            f"2**{f.size} is too large for a locality radius; pass an explicit radius override"
        )
    return LocalityRadius(2 ** f.size, False)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[()!&|,=]))"
)
_VARIABLE = re.compile(r"[a-z][a-z0-9_]*\Z")
_KEYWORDS = {"exists", "forall"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        kind = "ident" if m.group("ident") else "sym"
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.bound: list[str] = []

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, text, pos = self.take()
        if text != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(text)
            raise FormulaError(f"expected {value!r}, found {found}", pos)

    def variable(self) -> str:
        kind, text, pos = self.take()
        if kind != "ident" or text in _KEYWORDS or not _VARIABLE.match(text):
            found = "end of input" if kind == "eof" else repr(text)
            raise FormulaError(f"expected a variable, found {found}", pos)
        return text

    def parse(self) -> Node:
        node = self.disjunction()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise FormulaError(f"unexpected token {text!r}", pos)
        return node

    def disjunction(self) -> Node:
        node = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> Node:
        node = self.unary()
        while self.peek()[1] == "&":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self) -> Node:
        kind, text, pos = self.peek()
        if text == "!" and kind == "sym":
            self.take()
            return Not(self.unary())
        if text == "(" and kind == "sym":
            self.take()
            node = self.disjunction()
            self.expect(")")
            return node
        if kind == "ident" and text in _KEYWORDS:
            self.take()
            var = self.variable()
            if var in self.bound:
                raise FormulaError(f"variable {var!r} is already bound in an enclosing scope", pos)
            self.bound.append(var)
            body = self.unary()
            self.bound.pop()
            return Exists(var, body) if text == "exists" else Forall(var, body)
        if kind == "ident":
            if self.tokens[self.i + 1][1] == "(":
                return self.atom()
            left = self.variable()
            self.expect("=")
            return Eq(left, self.variable())
        found = "end of input" if kind == "eof" else repr(text)
        raise FormulaError(f"expected a formula, found {found}", pos)

    def atom(self) -> Node:
        _, name, pos = self.take()
        arity = self.sig.arity(name)
        if arity is None:
            raise FormulaError(f"unknown relation {name!r}", pos)
        self.expect("(")
        args = [self.variable()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.variable())
        self.expect(")")
        if len(args) != arity:
            raise FormulaError(
                f"relation {name!r} has arity {arity} but is applied to {len(args)} arguments", pos
            )
        return Atom(name, tuple(args))


def _bound_vars(node: Node) -> set[str]:
    return {n.var for n in walk(node) if isinstance(n, (Exists, Forall))}


def parse_formula(text: str, sig: Signature) -> Formula:
    root = _Parser(text, sig).parse()
    order: list[str] = []
    for v in free_occurrences(root):
        if v not in order:
            order.append(v)
    clash = set(order) & _bound_vars(root)
    if clash:
        raise FormulaError(f"variable(s) {sorted(clash)} occur both free and bound")
    return Formula(root, tuple(order), sig)


# ---------------------------------------------------------------------------
# printing


def pretty(node: Node) -> str:
    if isinstance(node, Atom):
        return f"{node.relation}({','.join(node.args)})"
    if isinstance(node, Eq):
        return f"{node.left} = {node.right}"
    if isinstance(node, Not):
        return f"!{_operand(node.body)}"
    if isinstance(node, (Exists, Forall)):
        word = "exists" if isinstance(node, Exists) else "forall"
        return f"{word} {node.var} ({pretty(node.body)})"
    op = " & " if isinstance(node, And) else " | "
    return f"{_operand(node.left)}{op}{_operand(node.right)}"


def _operand(node: Node) -> str:
    if isinstance(node, (Atom, Not)):
        return pretty(node)
    return f"({pretty(node)})"
