"""Ordered answer stream for one partition and one type sequence.

Classes are visited in order of their centers.  Level ``i`` walks the bucket
of the i-th type and skips centers whose class would come within ``2r`` of an
already chosen class.  A bucket no larger than the number of elements that
other classes could possibly block is *small*; whenever a center is chosen,
the stream also checks that every later small class can still be filled.
Large buckets can always be completed, so together the two rules keep the
number of rejected candidates between two answers bounded by the plan alone.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

from .neighborhood import TypeIndex
from .structure import DistanceIndex, StepCounter, ball_size_bound


@dataclass(frozen=True)
class ClassSpec:
    slots: tuple[int, ...]  # answer coordinates of the class; slots[0] is the center
    F: tuple[int, ...]  # canonical positions of slots[1:] in the center's ball
    type_id: int
    bucket: Sequence[int]
    reach: int  # largest distance from the center to a class member
    threshold: int  # most centers the other classes can block

    @property
    def small(self) -> bool:
        return len(self.bucket) <= self.threshold


def class_thresholds(
    sizes: Sequence[int], reaches: Sequence[int], two_r: int, degree: int, n: int
) -> list[int]:
    total = sum(sizes)
    return [
        (total - size) * min(n, ball_size_bound(degree, reach + two_r))
        for size, reach in zip(sizes, reaches)
    ]


class PartitionStream:
    """Lexicographically ordered tuples for one (partition, type sequence)."""

    def __init__(
        self,
        specs: Sequence[ClassSpec],
        k: int,
        ti: TypeIndex,
        ix: DistanceIndex,
        two_r: int,
        counter: StepCounter,
    ):
        self.specs = tuple(specs)
        self.m = len(self.specs)
        self.k = k
        self.ti = ti
        self.ix = ix
        self.two_r = two_r
        self.counter = counter
        self.pos = [-1] * self.m
        self.members: list[tuple[int, ...] | None] = [None] * self.m
        self.started = False
        self.done = False
        self._small_later = [
            [j for j in range(i + 1, self.m) if self.specs[j].small] for i in range(self.m)
        ]
        self._small_choices: dict[int, list[tuple[int, ...]]] = {}

    # -- helpers -----------------------------------------------------------

    def _members_of(self, i: int, c: int) -> tuple[int, ...]:
        ptrs = self.ti.pointers[c]
        return (c,) + tuple(ptrs[alpha] for alpha in self.specs[i].F)

    def _conflict(self, a: tuple[int, ...], b: tuple[int, ...]) -> bool:
        within = self.ix.within
        two_r = self.two_r
        for p in set(a):
            for q in set(b):
                self.counter.steps += 1
                if within(p, q, two_r):
                    return True
        return False

    def _choices(self, j: int) -> list[tuple[int, ...]]:
        found = self._small_choices.get(j)
        if found is None:
            found = [self._members_of(j, c) for c in self.specs[j].bucket]
            self._small_choices[j] = found
        return found

    def _feasible(self, i: int, fixed: list[tuple[int, ...]]) -> bool:
        later = self._small_later[i]
        if not later:
            return True
        return self._fill(later, 0, fixed)

    def _fill(self, later: list[int], depth: int, fixed: list[tuple[int, ...]]) -> bool:
        if depth == len(later):
            return True
        for mem in self._choices(later[depth]):
            self.counter.steps += 1
            if any(self._conflict(mem, other) for other in fixed):
                continue
            fixed.append(mem)
            ok = self._fill(later, depth + 1, fixed)
            fixed.pop()
            if ok:
                return True
        return False

    def _advance(self, i: int) -> bool:
        bucket = self.specs[i].bucket
        p = self.pos[i]
        chosen = [mem for mem in self.members[:i] if mem is not None]
        while True:
            p += 1
            if p >= len(bucket):
                self.pos[i] = p
                return False
            self.counter.steps += 1
            mem = self._members_of(i, bucket[p])
            if any(self._conflict(mem, other) for other in chosen):
                continue
            if not self._feasible(i, chosen + [mem]):
                continue
            self.pos[i] = p
            self.members[i] = mem
            return True

    def _emit(self) -> tuple[int, ...]:
        out = [0] * self.k
        for spec, mem in zip(self.specs, self.members):
            assert mem is not None
            for slot, value in zip(spec.slots, mem):
                out[slot] = value
        return tuple(out)

    # -- public ------------------------------------------------------------

    def next(self) -> tuple[int, ...] | None:
        if self.done:
            return None
        if not self.started:
            self.started = True
            i = 0
            self.pos[0] = -1
        else:
            i = self.m - 1
        while True:
            if self._advance(i):
                if i == self.m - 1:
                    return self._emit()
                i += 1
                self.pos[i] = -1
            else:
                self.members[i] = None
                if i == 0:
                    self.done = True
                    return None
                i -= 1

    def step_bound(self) -> int:
        """Upper bound on probe steps for one call of ``next``."""
        k2 = self.k * self.k
        total = 0
        for i, spec in enumerate(self.specs):
            later = [len(self.specs[j].bucket) for j in self._small_later[i]]
            feas, prod = 0, 1
            for size in later:
                prod *= size
                feas += prod * (1 + k2)
            per_candidate = 1 + k2 + feas
            total += 2 * (spec.threshold + 1) * per_candidate
        return total

    def state(self) -> bytes:
        return struct.pack(f"<2q{self.m}q", int(self.started), int(self.done), *self.pos)
