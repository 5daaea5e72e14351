"""Relational structures, their Gaifman graph and the bounded-depth distance index.

Elements are stored as integers ``0..n-1``; the integer order *is* the linear
order of the domain (declaration order in the facts file).  The original
tokens are kept in ``Structure.names`` for printing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .formula import Signature


class StructureError(ValueError):
    pass


class IndexTooShallowError(ValueError):
    pass


@dataclass
class StepCounter:
    """Abstract work units, used to check the linear-preprocessing contract."""

    steps: int = 0

    def add(self, amount: int = 1) -> None:
        self.steps += amount


@dataclass
class Structure:
    signature: Signature
    names: list[str]
    facts: dict[str, tuple[tuple[int, ...], ...]]
    _index: dict[str, int] = field(default_factory=dict, repr=False)
    _incident: list[tuple[tuple[int, tuple[int, ...]], ...]] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not self._index:
            self._index = {name: i for i, name in enumerate(self.names)}
        if len(self._index) != len(self.names):
            raise StructureError("duplicate element ids")
        for rel, arity in self.signature.relations:
            self.facts.setdefault(rel, ())
        for rel, tuples in self.facts.items():
            arity = self.signature.arity(rel)
            if arity is None:
                raise StructureError(f"facts for undeclared relation {rel!r}")
            for t in tuples:
                if len(t) != arity:
                    raise StructureError(f"fact {rel}{t} has wrong arity")
                for a in t:
                    if not 0 <= a < len(self.names):
                        raise StructureError(f"fact {rel}{t} mentions an element outside the domain")

    @classmethod
    def from_tuples(
        cls,
        relations: Sequence[tuple[str, int]],
        names: Iterable[object],
        facts: dict[str, Iterable[Sequence[object]]],
    ) -> "Structure":
        """Build from element tokens; fact components are looked up by token."""
        names = [str(x) for x in names]
        index = {name: i for i, name in enumerate(names)}
        if len(index) != len(names):
            raise StructureError("duplicate element ids")
        converted = {}
        for rel, tuples in facts.items():
            rows = set()
            for t in tuples:
                try:
                    rows.add(tuple(index[str(x)] for x in t))
                except KeyError as exc:
                    raise StructureError(f"fact {rel}{tuple(t)} uses undeclared element {exc.args[0]}") from None
            converted[rel] = tuple(sorted(rows))
        return cls(Signature(tuple(relations)), names, converted, index)

    @property
    def n(self) -> int:
        return len(self.names)

    def element(self, name: str) -> int:
        return self._index[name]

    def label(self, t: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.names[a] for a in t)

    def incident(self) -> list[tuple[tuple[int, tuple[int, ...]], ...]]:
        """Per element, the facts ``(relation index, tuple)`` it occurs in (each once)."""
        if self._incident is None:
            inc: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(self.n)]
            for ri, (rel, _) in enumerate(self.signature.relations):
                for t in self.facts[rel]:
                    for a in set(t):
                        inc[a].append((ri, t))
            self._incident = [tuple(x) for x in inc]
        return self._incident

    def fact_count(self) -> int:
        return sum(len(v) for v in self.facts.values())


def parse_facts(text: str) -> Structure:
    """Parse the line-oriented facts format (``rel``, ``node``, ``fact`` lines)."""
    relations: list[tuple[str, int]] = []
    names: list[str] = []
    index: dict[str, int] = {}
    facts: dict[str, set[tuple[int, ...]]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        keyword, args = parts[0], parts[1:]
        where = f"line {lineno}"
        if keyword == "rel":
            if len(args) != 2:
                raise StructureError(f"{where}: expected 'rel NAME ARITY'")
            name, arity_text = args
            if name in facts:
                raise StructureError(f"{where}: duplicate relation declaration {name!r}")
            try:
                arity = int(arity_text)
            except ValueError:
                raise StructureError(f"{where}: arity must be an integer") from None
            if arity < 1:
                raise StructureError(f"{where}: arity must be >= 1")
            relations.append((name, arity))
            facts[name] = set()
        elif keyword == "node":
            if not args:
                raise StructureError(f"{where}: expected 'node ID...'")
            for token in args:
                if token in index:
                    raise StructureError(f"{where}: duplicate node {token!r}")
                index[token] = len(names)
                names.append(token)
        elif keyword == "fact":
            if not args:
                raise StructureError(f"{where}: expected 'fact NAME ID...'")
            name, ids = args[0], args[1:]
            if name not in facts:
                raise StructureError(f"{where}: undeclared relation {name!r}")
            arity = dict(relations)[name]
            if len(ids) != arity:
                raise StructureError(f"{where}: {name} has arity {arity}, got {len(ids)} ids")
            try:
                facts[name].add(tuple(index[token] for token in ids))
            except KeyError as exc:
                raise StructureError(f"{where}: undeclared element {exc.args[0]!r}") from None
        else:
            raise StructureError(f"{where}: unknown keyword {keyword!r}")
    return Structure(
        Signature(tuple(relations)),
        names,
        {rel: tuple(sorted(rows)) for rel, rows in facts.items()},
        index,
    )


def load_structure(path: str | Path) -> Structure:
    return parse_facts(Path(path).read_text(encoding="utf-8"))


def dump_facts(s: Structure) -> str:
    lines = [f"rel {name} {arity}" for name, arity in s.signature.relations]
    lines.extend(f"node {name}" for name in s.names)
    for rel, _ in s.signature.relations:
        for t in s.facts[rel]:
            lines.append(f"fact {rel} " + " ".join(s.label(t)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaifmanGraph:
    adjacency: tuple[tuple[int, ...], ...]
    max_degree: int

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a, nbrs in enumerate(self.adjacency) for b in nbrs if a < b]


def gaifman_graph(s: Structure, counter: StepCounter | None = None) -> GaifmanGraph:
    nbrs: list[set[int]] = [set() for _ in range(s.n)]
    work = 0
    for tuples in s.facts.values():
        for t in tuples:
            members = set(t)
            work += len(members) ** 2
            for a in members:
                nbrs[a].update(members)
    for a, row in enumerate(nbrs):
        row.discard(a)
    adjacency = tuple(tuple(sorted(row)) for row in nbrs)
    if counter is not None:
        counter.add(work + s.n)
    return GaifmanGraph(adjacency, max((len(row) for row in adjacency), default=0))


def check_degree_bound(g: GaifmanGraph, d: int) -> bool:
    return g.max_degree <= d


def ball_size_bound(d: int, radius: int) -> int:
    """Largest possible |N_radius(a)| in a graph of maximum degree ``d``."""
    if radius <= 0 or d == 0:
        return 1
    if d == 1:
        return 2
    total, frontier = 1, d
    for _ in range(radius):
        total += frontier
        frontier *= d - 1
    return total


class DistanceIndex:
    """Exact-distance layers around every element, truncated at ``depth``.

    ``flat[a]`` lists N_depth(a) layer by layer, each layer in domain order;
    ``offsets[a][i]`` is where layer ``i`` starts (a trailing entry closes the
    last non-empty layer).  Pairs farther apart than ``depth`` are absent.
    """

    def __init__(self, depth: int, flat: list[tuple[int, ...]], offsets: list[tuple[int, ...]]):
        self.depth = depth
        self.flat = flat
        self.offsets = offsets

    @property
    def n(self) -> int:
        return len(self.flat)

    def _end(self, a: int, l: int) -> int:
        off = self.offsets[a]
        return off[l + 1] if l + 1 < len(off) else off[-1]

    def layer(self, a: int, i: int) -> tuple[int, ...]:
        off = self.offsets[a]
        if i + 1 >= len(off):
            return ()
        return self.flat[a][off[i]:off[i + 1]]

    def layers(self, a: int, l: int) -> list[tuple[int, ...]]:
        self._check(l)
        off = self.offsets[a]
        top = min(l, len(off) - 2)
        return [self.flat[a][off[i]:off[i + 1]] for i in range(top + 1)]

    def ball_of(self, a: int, l: int) -> tuple[int, ...]:
        """N_l(a) in layer order (not sorted)."""
        self._check(l)
        return self.flat[a][: self._end(a, l)]

    def within(self, a: int, b: int, l: int) -> bool:
        """True iff delta(a, b) <= l."""
        return b in self.flat[a][: self._end(a, l)]

    def distance(self, a: int, b: int) -> int | None:
        off = self.offsets[a]
        row = self.flat[a]
        for i in range(len(off) - 1):
            if b in row[off[i]:off[i + 1]]:
                return i
        return None

    def _check(self, l: int) -> None:
        if l > self.depth:
            raise IndexTooShallowError(f"radius {l} exceeds the index depth {self.depth}")


def build_distance_index(
    g: GaifmanGraph, depth: int, counter: StepCounter | None = None
) -> DistanceIndex:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    adjacency = g.adjacency
    flat: list[tuple[int, ...]] = []
    offsets: list[tuple[int, ...]] = []
    work = 0
    for a in range(g.n):
        seen = {a}
        order = [a]
        off = [0, 1]
        frontier = [a]
        for _ in range(depth):
            nxt = []
            for u in frontier:
                for v in adjacency[u]:
                    work += 1
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            if not nxt:
                break
            nxt.sort()
            order.extend(nxt)
            off.append(len(order))
            frontier = nxt
        work += 1
        flat.append(tuple(order))
        offsets.append(tuple(off))
    if counter is not None:
        counter.add(work)
    return DistanceIndex(depth, flat, offsets)


def ball(ix: DistanceIndex, t: Sequence[int], l: int) -> list[int]:
    """N_l of a tuple: elements within distance l of some component, sorted."""
    out: set[int] = set()
    for a in t:
        out.update(ix.ball_of(a, l))
    return sorted(out)
