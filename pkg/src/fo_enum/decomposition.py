"""The local normal form of a query over a fixed structure.

A query with ``k`` answer coordinates is split, per answer tuple, into the
connected components of the "within 2r" relation on its coordinates.  Each
component (a *class*) is described by its most significant coordinate (the
center) and the canonical positions of the remaining coordinates inside the
center's typed ball.  Two answer candidates with the same classes, the same
positions and the same center types have isomorphic (r-1)-neighborhoods, so
the query answers them the same way; the plan records which combinations of
center types are answers.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .evaluator import Evaluator
from .formula import Formula, LocalityRadius, locality_radius
from .neighborhood import CanonicalType, TypeIndex, apply_position_sequence, build_type_index
from .streams import ClassSpec, PartitionStream, class_thresholds
from .structure import (
    DistanceIndex,
    GaifmanGraph,
    StepCounter,
    Structure,
    build_distance_index,
    gaifman_graph,
)


@dataclass(frozen=True)
class PartitionClass:
    vars: tuple[int, ...]  # answer coordinates, increasing; vars[0] is the center
    F: tuple[int, ...]

    @property
    def center(self) -> int:
        return self.vars[0]


@dataclass(frozen=True)
class RPartition:
    classes: tuple[PartitionClass, ...]

    @property
    def m(self) -> int:
        return len(self.classes)

    def describe(self, names: Sequence[str]) -> str:
        parts = []
        for c in self.classes:
            members = ",".join(names[v] for v in c.vars)
            parts.append(f"{{{members}}} center={names[c.center]} F=({','.join(map(str, c.F))})")
        return " | ".join(parts)


@dataclass(frozen=True)
class DivCondition:
    partition: RPartition
    r: int


@dataclass
class PlanEntry:
    partition: RPartition
    sequences: list[tuple[int, ...]]


@dataclass
class DecompositionPlan:
    formula: Formula
    structure: Structure
    radius: LocalityRadius
    type_radius: int
    degree: int
    graph: GaifmanGraph
    ix: DistanceIndex
    ti: TypeIndex
    entries: list[PlanEntry]
    preprocess_steps: dict[str, int] = field(default_factory=dict)
    geometry: "TypeGeometry | None" = field(default=None, repr=False)

    @property
    def r(self) -> int:
        return self.radius.r

    @property
    def k(self) -> int:
        return self.formula.k

    @property
    def total_preprocess_steps(self) -> int:
        return sum(self.preprocess_steps.values())

    def stream_specs(self) -> Iterator[tuple[PlanEntry, tuple[int, ...], list[ClassSpec]]]:
        geo = TypeGeometry.for_plan(self)
        for entry in self.entries:
            for seq in entry.sequences:
                yield entry, seq, class_specs(entry.partition, seq, self.ti, geo, self.r, self.degree)


def type_radius_for(r: int, k: int) -> int:
    """Ball radius that contains every class member plus its (r-1)-ball."""
    return (2 * max(k, 1) - 1) * r


# ---------------------------------------------------------------------------
# per-type geometry


class TypeGeometry:
    """Distances inside each type's representative, as far as classes need them."""

    def __init__(self, ti: TypeIndex, r: int, k: int):
        self.ti = ti
        self.r = r
        self.k = k
        self._close: dict[int, dict[int, frozenset[int]]] = {}
        self._layers: dict[int, list[int]] = {}

    @classmethod
    def for_plan(cls, plan: DecompositionPlan) -> "TypeGeometry":
        if plan.geometry is None:
            plan.geometry = cls(plan.ti, plan.r, plan.k)
        return plan.geometry

    def layers(self, t: CanonicalType) -> list[int]:
        found = self._layers.get(t.type_id)
        if found is None:
            found = t.position_layers()
            self._layers[t.type_id] = found
        return found

    def close(self, t: CanonicalType) -> dict[int, frozenset[int]]:
        """For positions within 2r(k-1) of the center: positions within 2r of them."""
        found = self._close.get(t.type_id)
        if found is not None:
            return found
        layers = self.layers(t)
        adj: list[set[int]] = [set() for _ in range(t.size)]
        for _, positions in t.representative_facts():
            for p in positions:
                adj[p].update(positions)
        two_r = 2 * self.r
        reach = two_r * (self.k - 1)
        found = {}
        for src in range(t.size):
            if layers[src] > reach:
                continue
            dist = {src: 0}
            queue = deque([src])
            while queue:
                u = queue.popleft()
                if dist[u] == two_r:
                    continue
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            found[src] = frozenset(dist)
        self._close[t.type_id] = found
        return found

    def valid_sequences(self, t: CanonicalType, size: int) -> list[tuple[int, ...]]:
        """Position sequences F for a class of ``size`` coordinates centered in ``t``."""
        if size == 1:
            return [()]
        layers = self.layers(t)
        close = self.close(t)
        reach = 2 * self.r * (size - 1)
        pool = [p for p in range(t.size) if layers[p] <= reach]
        out = []
        for F in itertools.product(pool, repeat=size - 1):
            if _connected((0,) + F, close):
                out.append(F)
        return out

    def reach(self, t: CanonicalType, F: Sequence[int]) -> int:
        layers = self.layers(t)
        return max((layers[p] for p in F), default=0)


def _connected(points: Sequence[int], close: dict[int, frozenset[int]]) -> bool:
    distinct = list(dict.fromkeys(points))
    seen = {distinct[0]}
    stack = [distinct[0]]
    while stack:
        u = stack.pop()
        for v in distinct:
            if v not in seen and v in close[u]:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(distinct)


def class_specs(
    p: RPartition, seq: Sequence[int], ti: TypeIndex, geo: TypeGeometry, r: int, degree: int
) -> list[ClassSpec]:
    types = [ti.registry.types[t] for t in seq]
    reaches = [geo.reach(t, c.F) for t, c in zip(types, p.classes)]
    sizes = [len(c.vars) for c in p.classes]
    thresholds = class_thresholds(sizes, reaches, 2 * r, degree, len(ti.type_of))
    return [
        ClassSpec(c.vars, c.F, t.type_id, ti.bucket(t.type_id), reach, threshold)
        for c, t, reach, threshold in zip(p.classes, types, reaches, thresholds)
    ]


# ---------------------------------------------------------------------------
# partitions


def set_partitions(k: int) -> list[list[tuple[int, ...]]]:
    """All set partitions of range(k), blocks ordered by their least element."""
    out: list[list[tuple[int, ...]]] = []

    def rec(i: int, blocks: list[list[int]]) -> None:
        if i == k:
            out.append([tuple(b) for b in blocks])
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out


def _class_options(ti: TypeIndex, geo: TypeGeometry, size: int) -> dict[tuple[int, ...], list[int]]:
    """F -> realized types for which F is a valid position sequence."""
    options: dict[tuple[int, ...], list[int]] = {}
    for t in ti.registry.types:
        if not ti.bucket(t.type_id):
            continue
        for F in geo.valid_sequences(t, size):
            options.setdefault(F, []).append(t.type_id)
    return dict(sorted(options.items()))


def enumerate_partitions(f: Formula, ti: TypeIndex, r: int) -> list[RPartition]:
    if f.k < 1:
        raise ValueError("partitions need at least one answer coordinate")
    geo = TypeGeometry(ti, r, f.k)
    return [p for p, _ in _partitions_with_types(f.k, ti, geo)]


def _partitions_with_types(
    k: int, ti: TypeIndex, geo: TypeGeometry
) -> Iterator[tuple[RPartition, list[list[int]]]]:
    options_by_size: dict[int, dict[tuple[int, ...], list[int]]] = {}
    for blocks in set_partitions(k):
        per_block = []
        for b in blocks:
            if len(b) not in options_by_size:
                options_by_size[len(b)] = _class_options(ti, geo, len(b))
            per_block.append(list(options_by_size[len(b)].items()))
        for choice in itertools.product(*per_block):
            classes = tuple(PartitionClass(b, F) for b, (F, _) in zip(blocks, choice))
            yield RPartition(classes), [types for _, types in choice]


def div_holds(t: Sequence[int], p: RPartition, ix: DistanceIndex, ti: TypeIndex, r: int) -> bool:
    """Class members sit at their positions, classes are more than 2r apart,
    and each class is connected under the within-2r relation."""
    two_r = 2 * r
    groups = []
    for c in p.classes:
        values = tuple(t[v] for v in c.vars)
        if apply_position_sequence(ti, values[0], c.F) != values:
            return False
        groups.append(values)
    for i, a in enumerate(groups):
        for b in groups[i + 1:]:
            if any(ix.within(x, y, two_r) for x in a for y in b):
                return False
    for g in groups:
        distinct = list(dict.fromkeys(g))
        seen = {distinct[0]}
        stack = [distinct[0]]
        while stack:
            u = stack.pop()
            for v in distinct:
                if v not in seen and ix.within(u, v, two_r):
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(distinct):
            return False
    return True


def relevant_sequences(
    p: RPartition,
    f: Formula,
    s: Structure,
    ix: DistanceIndex,
    ti: TypeIndex,
    r: int,
    degree: int | None = None,
    evaluator: Evaluator | None = None,
    counter: StepCounter | None = None,
    candidates: Sequence[Sequence[int]] | None = None,
) -> list[tuple[int, ...]]:
    """Type sequences whose first witness tuple satisfies the query.

    All tuples realizing one (partition, sequence) pair agree on the query,
    so deciding it on the stream's first tuple decides it for all of them.
    """
    geo = TypeGeometry(ti, r, f.k)
    if degree is None:
        degree = max((len(ix.layer(a, 1)) for a in range(s.n)), default=0)
    if candidates is None:
        candidates = []
        for c in p.classes:
            candidates.append(
                [t.type_id for t in ti.registry.types
                 if ti.bucket(t.type_id) and c.F in set(geo.valid_sequences(t, len(c.vars)))]
            )
    ev = evaluator or Evaluator(s, counter)
    counter = counter or StepCounter()
    out = []
    for seq in itertools.product(*candidates):
        specs = class_specs(p, seq, ti, geo, r, degree)
        witness = PartitionStream(specs, f.k, ti, ix, 2 * r, counter).next()
        if witness is not None and ev.holds(f, witness):
            out.append(tuple(seq))
    return out


def build_plan(
    f: Formula,
    s: Structure,
    radius_override: int | None = None,
    degree: int | None = None,
) -> DecompositionPlan:
    """Run the whole precomputation: graph, distances, types, relevant sequences."""
    if f.k < 1:
        raise ValueError("sentences (k=0) are answered by the evaluator, not by a plan")
    radius = locality_radius(f, radius_override)
    r = radius.r
    depth = type_radius_for(r, f.k)
    steps: dict[str, int] = {}

    c = StepCounter()
    g = gaifman_graph(s, c)
    ix = build_distance_index(g, depth, c)
    steps["distances"] = c.steps

    c = StepCounter()
    ti = build_type_index(s, ix, depth, c)
    steps["types"] = c.steps

    if degree is None:
        degree = g.max_degree
    c = StepCounter()
    ev = Evaluator(s, c)
    geo = TypeGeometry(ti, r, f.k)
    entries = []
    for p, candidates in _partitions_with_types(f.k, ti, geo):
        c.add(1)
        seqs = relevant_sequences(p, f, s, ix, ti, r, degree, ev, c, candidates)
        if seqs:
            entries.append(PlanEntry(p, seqs))
    steps["relevance"] = c.steps

    return DecompositionPlan(f, s, radius, depth, degree, g, ix, ti, entries, steps, geo)


def plan_accepts(plan: DecompositionPlan, t: Sequence[int]) -> bool:
    """Membership in the plan's denotation, decided from Div and the type tests."""
    for entry in plan.entries:
        if div_holds(t, entry.partition, plan.ix, plan.ti, plan.r):
            centers = tuple(plan.ti.type_of[t[c.center]] for c in entry.partition.classes)
            if centers in entry.sequences:
                return True
    return False


def dump_plan(plan: DecompositionPlan) -> str:
    names = plan.formula.free_vars
    lines = [
        f"# query: {plan.formula}",
        f"# head: ({', '.join(names)})",
        f"# r={plan.r} overridden={str(plan.radius.overridden).lower()} "
        f"type_radius={plan.type_radius} degree={plan.degree}",
        f"# types={len(plan.ti.registry)} entries={len(plan.entries)} "
        f"streams={sum(len(e.sequences) for e in plan.entries)}",
    ]
    for i, entry in enumerate(plan.entries):
        lines.append(f"entry {i}: {entry.partition.describe(names)}")
        for seq in entry.sequences:
            lines.append("  types (" + ",".join(map(str, seq)) + ")")
    return "\n".join(lines) + "\n"
