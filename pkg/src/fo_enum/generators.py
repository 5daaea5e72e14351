"""Bounded-degree structure families for tests and benchmarks.

All generators are deterministic given their seed.  Graph edges become facts
of a binary relation ``E``, oriented from the smaller to the larger element
unless ``symmetric`` is set.  An optional unary relation ``C`` marks a seeded
subset of the elements.
"""

from __future__ import annotations

import random
from typing import Iterable

from .structure import Structure

FAMILIES = ("path", "cycle", "ladder", "random")

Edge = tuple[int, int]


def path_edges(n: int) -> list[Edge]:
    return [(i, i + 1) for i in range(n - 1)]


def cycle_edges(n: int) -> list[Edge]:
    if n < 3:
        return path_edges(n)
    return path_edges(n) + [(0, n - 1)]


def ladder_edges(n: int) -> list[Edge]:
    """Two rails 0..h-1 and h..2h-1 with rungs; degree 3 away from the ends."""
    h = n // 2
    edges = path_edges(h) + [(h + i, h + i + 1) for i in range(h - 1)]
    edges += [(i, h + i) for i in range(h)]
    if n % 2 and h:
        edges.append((h - 1, n - 1))  # odd leftover hangs off the end of the first rail
    return edges


def regular_edges(n: int, d: int, rng: random.Random, swaps: int | None = None) -> list[Edge]:
    """A degree-``d`` circulant graph scrambled by degree-preserving edge swaps.

    Every element ends up with degree at most ``d`` (exactly ``d`` when ``n``
    is even or ``d`` is even, and ``n > d``).
    """
    edges: set[Edge] = set()
    for i in range(n):
        for j in range(1, d // 2 + 1):
            a, b = i, (i + j) % n
            if a != b:
                edges.add((min(a, b), max(a, b)))
    if d % 2 and n % 2 == 0:
        for i in range(n // 2):
            edges.add((i, i + n // 2))
    edge_list = sorted(edges)
    present = set(edge_list)
    rounds = 4 * len(edge_list) if swaps is None else swaps
    for _ in range(rounds):
        if len(edge_list) < 2:
            break
        i, j = rng.randrange(len(edge_list)), rng.randrange(len(edge_list))
        (a, b), (c, e) = edge_list[i], edge_list[j]
        if rng.random() < 0.5:
            c, e = e, c
        # (a,b),(c,e) -> (a,c),(b,e)
        if len({a, b, c, e}) < 4:
            continue
        new1, new2 = (min(a, c), max(a, c)), (min(b, e), max(b, e))
        if new1 in present or new2 in present:
            continue
        present -= {edge_list[i], edge_list[j]}
        present |= {new1, new2}
        edge_list[i], edge_list[j] = new1, new2
    return sorted(present)


def sparse_edges(n: int, d: int, m: int, rng: random.Random) -> list[Edge]:
    """Up to ``m`` random edges, rejecting any that would push a degree past ``d``."""
    degree = [0] * n
    edges: set[Edge] = set()
    attempts = 0
    while len(edges) < m and attempts < 20 * (m + 1) and n > 1:
        attempts += 1
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b:
            continue
        edge = (min(a, b), max(a, b))
        if edge in edges or degree[a] >= d or degree[b] >= d:
            continue
        edges.add(edge)
        degree[a] += 1
        degree[b] += 1
    return sorted(edges)


def graph_structure(
    n: int,
    edges: Iterable[Edge],
    symmetric: bool = False,
    colored: Iterable[int] | None = None,
) -> Structure:
    relations: list[tuple[str, int]] = [("E", 2)]
    facts: dict[str, list[tuple[int, int]] | list[tuple[int]]] = {"E": []}
    for a, b in edges:
        facts["E"].append((a, b))
        if symmetric:
            facts["E"].append((b, a))
    if colored is not None:
        relations.append(("C", 1))
        facts["C"] = [(a,) for a in colored]
    return Structure.from_tuples(relations, range(n), facts)


def generate(
    family: str,
    n: int,
    seed: int = 0,
    degree: int = 3,
    symmetric: bool = False,
    color_fraction: float | None = None,
) -> Structure:
    rng = random.Random(seed)
    if family == "path":
        edges = path_edges(n)
    elif family == "cycle":
        edges = cycle_edges(n)
    elif family == "ladder":
        edges = ladder_edges(n)
    elif family == "random":
        edges = regular_edges(n, degree, rng)
    elif family == "sparse":
        edges = sparse_edges(n, degree, rng.randrange(n + 1), rng)
    else:
        raise ValueError(f"unknown family {family!r}")
    colored = None
    if color_fraction is not None:
        colored = [a for a in range(n) if rng.random() < color_fraction]
    return graph_structure(n, edges, symmetric, colored)
