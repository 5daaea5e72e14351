"""Brute-force oracles shared by the test modules.

Nothing here reuses the package's indices: distances come from networkx,
isomorphism from VF2, least encodings from trying every layered order.
"""

from __future__ import annotations

import itertools
import random
from typing import Sequence

import networkx as nx
from networkx.algorithms import isomorphism

from fo_enum.structure import Structure

PATH3 = """\
rel E 2
node 1
node 2
node 3
fact E 1 2
fact E 2 3
"""


def gaifman_nx(s: Structure) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(s.n))
    for tuples in s.facts.values():
        for t in tuples:
            for a, b in itertools.combinations(set(t), 2):
                g.add_edge(a, b)
    return g


def all_distances(s: Structure) -> dict[int, dict[int, int]]:
    return dict(nx.all_pairs_shortest_path_length(gaifman_nx(s)))


def brute_ball(s: Structure, t: Sequence[int], l: int) -> list[int]:
    dist = all_distances(s)
    return sorted(b for b in range(s.n) if any(dist[a].get(b, l + 1) <= l for a in t))


def induced_facts(s: Structure, elements) -> set[tuple[str, tuple[int, ...]]]:
    inside = set(elements)
    return {(rel, t) for rel, ts in s.facts.items() for t in ts if set(t) <= inside}


def _fact_graph(s: Structure, elements, center: int) -> nx.DiGraph:
    """Elements plus one node per fact, joined by position-labeled arcs."""
    g = nx.DiGraph()
    for a in elements:
        g.add_node(("e", a), kind="center" if a == center else "elem")
    for i, (rel, t) in enumerate(sorted(induced_facts(s, elements))):
        g.add_node(("f", i), kind="fact:" + rel)
        for pos, a in enumerate(t):
            g.add_edge(("f", i), ("e", a), pos=pos)
    return g


def ball_graphs(s: Structure, radius: int) -> list[nx.DiGraph]:
    dist = all_distances(s)
    out = []
    for a in range(s.n):
        members = sorted(b for b, d in dist[a].items() if d <= radius)
        out.append(_fact_graph(s, members, a))
    return out


def graphs_isomorphic(ga: nx.DiGraph, gb: nx.DiGraph) -> bool:
    if ga.number_of_nodes() != gb.number_of_nodes() or ga.number_of_edges() != gb.number_of_edges():
        return False
    matcher = isomorphism.DiGraphMatcher(
        ga, gb,
        node_match=lambda x, y: x["kind"] == y["kind"],
        edge_match=lambda x, y: x["pos"] == y["pos"],
    )
    return matcher.is_isomorphic()


def centered_isomorphic(s: Structure, a: int, b: int, radius: int) -> bool:
    ga = _fact_graph(s, brute_ball(s, [a], radius), a)
    gb = _fact_graph(s, brute_ball(s, [b], radius), b)
    return graphs_isomorphic(ga, gb)


def encode_order(s: Structure, order: Sequence[int]):
    """Rows of an explicit order: per position, the facts it completes, over positions."""
    rel_index = {rel: i for i, (rel, _) in enumerate(s.signature.relations)}
    where = {a: i for i, a in enumerate(order)}
    rows = []
    for i, _ in enumerate(order):
        row = []
        for rel, t in induced_facts(s, order):
            ps = tuple(where[x] for x in t)
            if max(ps) == i:
                row.append((rel_index[rel], ps))
        rows.append(tuple(sorted(row)))
    return tuple(rows)


def brute_least_encoding(s: Structure, a: int, radius: int):
    """Least encoding over every distance-stratified order of the ball (small balls only)."""
    dist = all_distances(s)[a]
    layers: dict[int, list[int]] = {}
    for b, d in dist.items():
        if d <= radius:
            layers.setdefault(d, []).append(b)
    per_layer = [list(itertools.permutations(sorted(layers[i]))) for i in sorted(layers)]
    best = None
    for choice in itertools.product(*per_layer):
        order = [x for part in choice for x in part]
        enc = encode_order(s, order)
        if best is None or enc < best:
            best = enc
    return best


def random_structure(
    rng: random.Random,
    n: int,
    d: int = 3,
    relations: Sequence[tuple[str, int]] = (("E", 2), ("C", 1)),
    attempts: int | None = None,
) -> Structure:
    """Random facts whose Gaifman graph keeps every degree at most ``d``."""
    nbrs: list[set[int]] = [set() for _ in range(n)]
    facts: dict[str, set[tuple[int, ...]]] = {rel: set() for rel, _ in relations}
    tries = attempts if attempts is not None else 3 * n
    for _ in range(tries):
        rel, arity = rng.choice(list(relations))
        t = tuple(rng.randrange(n) for _ in range(arity))
        ok = True
        for x in set(t):
            extra = set(t) - {x} - nbrs[x]
            if len(nbrs[x]) + len(extra) > d:
                ok = False
        if not ok:
            continue
        for x in set(t):
            nbrs[x] |= set(t) - {x}
        facts[rel].add(t)
    return Structure.from_tuples(list(relations), range(n), facts)
