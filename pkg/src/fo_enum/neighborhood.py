"""Neighborhood extraction and canonical neighborhood types.

A canonical order of a centered ball lists the center first and then the
elements layer by layer (by distance from the center).  Among all such
orders we pick the one whose encoding is lexicographically least, where the
encoding is the sequence of per-position rows: the facts that become fully
placed when that position is filled, written over positions.  Because the
encoding of an ``l``-ball is a prefix of the encoding of every larger ball,
the least order of a large ball restricts to a least order of each smaller
ball, which is what makes the orders of different radii consistent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .structure import DistanceIndex, StepCounter, Structure, ball

Row = tuple[tuple[int, tuple[int, ...]], ...]
Encoding = tuple[tuple[int, ...], tuple[Row, ...]]


@dataclass(frozen=True)
class NeighborhoodSubstructure:
    elements: tuple[int, ...]
    facts: dict[str, tuple[tuple[int, ...], ...]]
    centers: tuple[int, ...]


def extract_neighborhood(
    s: Structure, ix: DistanceIndex, t: Sequence[int], l: int
) -> NeighborhoodSubstructure:
    elements = tuple(ball(ix, t, l))
    inside = set(elements)
    facts = {
        rel: tuple(f for f in s.facts[rel] if all(a in inside for a in f))
        for rel, _ in s.signature.relations
    }
    return NeighborhoodSubstructure(elements, facts, tuple(t))


def _layers_from_center(n: NeighborhoodSubstructure, s: Structure) -> list[list[int]]:
    """BFS layers inside the substructure, each in domain order."""
    (center,) = n.centers
    inside = set(n.elements)
    nbrs: dict[int, set[int]] = {a: set() for a in n.elements}
    for tuples in n.facts.values():
        for t in tuples:
            for a in t:
                nbrs[a].update(t)
    seen = {center}
    layers = [[center]]
    while True:
        nxt = sorted({v for u in layers[-1] for v in nbrs[u] if v not in seen and v in inside})
        if not nxt:
            break
        seen.update(nxt)
        layers.append(nxt)
    return layers


# ---------------------------------------------------------------------------
# canonical search


class _Canonizer:
    """Least-encoding search over distance-stratified orders.

    Branches only on candidates producing the minimal row at each position,
    prunes against the best encoding found so far, and uses automorphisms
    discovered from equal leaves to skip symmetric subtrees.
    """

    def __init__(self, layers: Sequence[Sequence[int]], incident: dict[int, Sequence[tuple[int, tuple[int, ...]]]]):
        self.layers = [list(layer) for layer in layers]
        self.incident = incident
        self.size = sum(len(layer) for layer in layers)
        self.layer_at: list[int] = []
        for i, layer in enumerate(self.layers):
            self.layer_at.extend([i] * len(layer))
        self.order: list[int] = []
        self.pos: dict[int, int] = {}
        self.rows: list[Row] = []
        self.best_rows: list[Row] | None = None
        self.best_order: list[int] | None = None
        self.generators: list[dict[int, int]] = []
        self.nodes = 0
        self.version = 0

    def _row(self, e: int) -> Row:
        self.pos[e] = len(self.order)
        out = []
        for rel, tup in self.incident[e]:
            ps = []
            for x in tup:
                q = self.pos.get(x)
                if q is None:
                    break
                ps.append(q)
            else:
                out.append((rel, tuple(ps)))
        del self.pos[e]
        out.sort()
        return tuple(out)

    def run(self) -> tuple[list[int], list[Row]]:
        self._search(0, False)
        assert self.best_order is not None and self.best_rows is not None
        return self.best_order, self.best_rows

    def _orbit_roots(self, prefix: list[int]) -> dict[int, int] | None:
        gens = [g for g in self.generators if all(g[x] == x for x in prefix)]
        if not gens:
            return None
        parent: dict[int, int] = {}

        def find(x: int) -> int:
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        for g in gens:
            for x, y in g.items():
                if x != y:
                    rx, ry = find(x), find(y)
                    if rx != ry:
                        parent[max(rx, ry)] = min(rx, ry)
        return {x: find(x) for x in parent}

    def _search(self, p: int, better: bool) -> int | None:
        """``better``: the current prefix rows are strictly below the best's prefix."""
        self.nodes += 1
        if p == self.size:
            if self.best_rows is None or better:
                self.best_rows = list(self.rows)
                self.best_order = list(self.order)
                self.version += 1
                return None
            # equal leaf: an automorphism fixing the common prefix
            assert self.best_order is not None
            gamma = dict(zip(self.best_order, self.order))
            self.generators.append(gamma)
            for q, (x, y) in enumerate(zip(self.best_order, self.order)):
                if x != y:
                    return q
            return None
        layer = self.layers[self.layer_at[p]]
        candidates = [c for c in layer if c not in self.pos]
        rows = [self._row(c) for c in candidates]
        least = min(rows)
        ties = [c for c, row in zip(candidates, rows) if row == least]
        explored: list[int] = []
        roots: dict[int, int] | None = None
        for c in ties:
            if better or self.best_rows is None:
                child_better = True
            else:
                target = self.best_rows[p]
                if least > target:
                    return None
                child_better = least < target
            if explored and self.generators:
                if roots is None:
                    roots = self._orbit_roots(self.order)
                if roots is not None:
                    rc = roots.get(c, c)
                    if any(roots.get(e, e) == rc for e in explored):
                        continue
            explored.append(c)
            self.pos[c] = p
            self.order.append(c)
            self.rows.append(least)
            n_gens, version = len(self.generators), self.version
            jump = self._search(p + 1, child_better)
            self.rows.pop()
            self.order.pop()
            del self.pos[c]
            if len(self.generators) != n_gens:
                roots = None
            if self.version != version:
                # the new best shares this prefix
                better = False
            if jump is not None and jump < p:
                return jump
        return None


def canonical_order(
    layers: Sequence[Sequence[int]],
    incident: dict[int, Sequence[tuple[int, tuple[int, ...]]]],
    counter: StepCounter | None = None,
) -> tuple[list[int], Encoding]:
    canon = _Canonizer(layers, incident)
    order, rows = canon.run()
    if counter is not None:
        counter.add(canon.nodes)
    sizes = tuple(len(layer) for layer in layers)
    return order, (sizes, tuple(rows))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalType:
    type_id: int
    radius: int
    encoding: Encoding = field(repr=False)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return self.encoding[0]

    @property
    def size(self) -> int:
        return sum(self.encoding[0])

    @property
    def layer_boundaries(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.encoding[0]:
            acc += n
            out.append(acc)
        return tuple(out)

    @property
    def canonical_encoding(self) -> bytes:
        return json.dumps(self.encoding, separators=(",", ":")).encode()

    def representative_facts(self) -> list[tuple[int, tuple[int, ...]]]:
        """Induced facts of the representative, over canonical positions."""
        return [fact for row in self.encoding[1] for fact in row]

    def position_layers(self) -> list[int]:
        out = []
        for i, n in enumerate(self.encoding[0]):
            out.extend([i] * n)
        return out

    def truncated_encoding(self, l: int) -> Encoding:
        sizes = self.encoding[0][: l + 1]
        return sizes, self.encoding[1][: sum(sizes)]


class TypeRegistry:
    """Realized types, numbered in first-seen order."""

    def __init__(self, radius: int):
        self.radius = radius
        self.types: list[CanonicalType] = []
        self._by_encoding: dict[Encoding, CanonicalType] = {}

    def intern(self, encoding: Encoding) -> CanonicalType:
        found = self._by_encoding.get(encoding)
        if found is None:
            found = CanonicalType(len(self.types), self.radius, encoding)
            self.types.append(found)
            self._by_encoding[encoding] = found
        return found

    def __len__(self) -> int:
        return len(self.types)


def _incident_within(n: NeighborhoodSubstructure, s: Structure) -> dict[int, list[tuple[int, tuple[int, ...]]]]:
    incident: dict[int, list[tuple[int, tuple[int, ...]]]] = {a: [] for a in n.elements}
    for ri, (rel, _) in enumerate(s.signature.relations):
        for t in n.facts[rel]:
            for a in set(t):
                incident[a].append((ri, t))
    return incident


def canonical_type(
    n: NeighborhoodSubstructure,
    registry: TypeRegistry,
    s: Structure,
) -> tuple[CanonicalType, list[int]]:
    """Type of a single-centered neighborhood plus one canonical order of it."""
    if len(n.centers) != 1:
        raise ValueError("canonical types are defined for single-centered neighborhoods")
    layers = _layers_from_center(n, s)
    order, encoding = canonical_order(layers, _incident_within(n, s))
    return registry.intern(encoding), order


@dataclass
class TypeIndex:
    radius: int
    registry: TypeRegistry
    type_of: list[int]
    pointers: list[tuple[int, ...]]
    buckets: dict[int, list[int]]

    def type(self, a: int) -> CanonicalType:
        return self.registry.types[self.type_of[a]]

    def bucket(self, type_id: int) -> list[int]:
        return self.buckets.get(type_id, [])

    def next_in_bucket(self, a: int) -> int | None:
        bucket = self.buckets[self.type_of[a]]
        i = self._rank[a]
        return bucket[i + 1] if i + 1 < len(bucket) else None

    def __post_init__(self) -> None:
        self._rank = {}
        for bucket in self.buckets.values():
            for i, a in enumerate(bucket):
                self._rank[a] = i


def build_type_index(
    s: Structure, ix: DistanceIndex, radius: int, counter: StepCounter | None = None
) -> TypeIndex:
    """Type every element at ``radius`` and bucket elements by type.

    Balls whose concretely ordered encoding (layers in domain order) was
    already seen reuse the canonical permutation found for the earlier ball:
    equal concrete encodings mean the position-wise map is an isomorphism.
    """
    if radius > ix.depth:
        ix.ball_of(0, radius)  # raises IndexTooShallowError
    registry = TypeRegistry(radius)
    incident = s.incident()
    cache: dict[tuple, tuple[int, tuple[int, ...]]] = {}
    type_of: list[int] = []
    pointers: list[tuple[int, ...]] = []
    work = 0
    for a in range(s.n):
        layers = ix.layers(a, radius)
        concrete = [x for layer in layers for x in layer]
        where = {x: i for i, x in enumerate(concrete)}
        facts = set()
        for x in concrete:
            for rel, tup in incident[x]:
                work += 1
                ps = []
                for y in tup:
                    q = where.get(y)
                    if q is None:
                        break
                    ps.append(q)
                else:
                    facts.add((rel, tuple(ps)))
        key = (tuple(len(layer) for layer in layers), tuple(sorted(facts)))
        work += len(concrete)
        hit = cache.get(key)
        if hit is None:
            local = {x: [f for f in incident[x] if all(y in where for y in f[1])] for x in concrete}
            order, encoding = canonical_order(layers, local, counter)
            ctype = registry.intern(encoding)
            perm = tuple(where[x] for x in order)
            hit = (ctype.type_id, perm)
            cache[key] = hit
        type_id, perm = hit
        type_of.append(type_id)
        pointers.append(tuple(concrete[i] for i in perm))
    buckets: dict[int, list[int]] = {}
    for a, t in enumerate(type_of):
        buckets.setdefault(t, []).append(a)
    if counter is not None:
        counter.add(work + s.n)
    return TypeIndex(radius, registry, type_of, pointers, buckets)


def apply_position_sequence(ti: TypeIndex, a: int, F: Sequence[int]) -> tuple[int, ...] | None:
    ptrs = ti.pointers[a]
    out = [a]
    for alpha in F:
        if not 0 <= alpha < len(ptrs):
            return None
        out.append(ptrs[alpha])
    return tuple(out)


def dump_type_index(ti: TypeIndex, s: Structure) -> str:
    lines = [f"# types radius={ti.radius} count={len(ti.registry)}"]
    for t in ti.registry.types:
        lines.append(f"type {t.type_id} size={t.size} layers={list(t.layer_sizes)}")
    for a in range(s.n):
        ptrs = " ".join(s.names[x] for x in ti.pointers[a])
        lines.append(f"elem {s.names[a]} type={ti.type_of[a]} ptrs=[{ptrs}]")
    for type_id in sorted(ti.buckets):
        members = " ".join(s.names[x] for x in ti.buckets[type_id])
        lines.append(f"bucket {type_id}: {members}")
    return "\n".join(lines) + "\n"
