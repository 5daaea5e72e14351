"""Enumeration phase: merged ordered streams, delay accounting, cursor state."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .decomposition import DecompositionPlan
from .streams import PartitionStream
from .structure import StepCounter

Answer = tuple[int, ...]


class MergeOrderError(RuntimeError):
    """An input stream was not strictly increasing."""


class CursorStateError(RuntimeError):
    pass


class OrderedMerge:
    """Merge of strictly increasing sources into their sorted union.

    The frontier is a fixed array with one slot per source.  Each emission
    costs one pass over the live heads (a three-way comparison per head after
    the first) plus one comparison against the previous output, which also
    catches sources that go backwards.  With ``dedup`` off, equal heads are
    emitted one after another instead of being collapsed.
    """

    def __init__(
        self,
        sources: Sequence[Callable[[], Answer | None]],
        dedup: bool = True,
        counter: StepCounter | None = None,
    ):
        self.sources = list(sources)
        self.capacity = len(self.sources)
        self.dedup = dedup
        self.counter = counter or StepCounter()
        self.heads: list[Answer | None] = [None] * self.capacity
        self.live = list(range(self.capacity))
        self.n_live = 0
        self.pending = [0] * self.capacity
        self.n_pending = 0
        self.last: Answer | None = None
        self.last_comparisons = 0
        self.primed = False

    def prime(self) -> None:
        self.primed = True
        self.n_pending = self.capacity
        for i in range(self.capacity):
            self.pending[i] = i
        self.n_live = self.capacity
        self._refill()

    def _refill(self) -> None:
        for j in range(self.n_pending):
            src = self.pending[j]
            self.heads[src] = self.sources[src]()
        self.n_pending = 0
        # compact exhausted sources out of the live prefix
        w = 0
        for j in range(self.n_live):
            src = self.live[j]
            if self.heads[src] is not None:
                self.live[w] = src
                w += 1
        self.n_live = w

    def next(self) -> Answer | None:
        if not self.primed:
            self.prime()
        else:
            self._refill()
        if self.n_live == 0:
            self.last_comparisons = 0
            return None
        comparisons = 0
        first = self.live[0]
        best = self.heads[first]
        self.pending[0] = first
        n_eq = 1
        for j in range(1, self.n_live):
            src = self.live[j]
            head = self.heads[src]
            comparisons += 1
            if head < best:
                best = head
                self.pending[0] = src
                n_eq = 1
            elif head == best and self.dedup:
                self.pending[n_eq] = src
                n_eq += 1
        if self.last is not None:
            comparisons += 1
            if best < self.last or (self.dedup and best == self.last):
                raise MergeOrderError(f"input stream not strictly increasing at {best!r}")
        self.n_pending = n_eq
        self.last = best
        self.last_comparisons = comparisons
        self.counter.add(comparisons)
        return best

    def __iter__(self) -> Iterator[Answer]:
        while True:
            item = self.next()
            if item is None:
                return
            yield item


def merge_streams(
    streams: Iterable[Iterable[Answer]], dedup: bool = True, counter: StepCounter | None = None
) -> OrderedMerge:
    """Merge in-order iterables; iterate the result to get the ordered union."""
    sources = []
    for stream in streams:
        it = iter(stream)
        sources.append(lambda it=it: next(it, None))
    return OrderedMerge(sources, dedup, counter)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DelayStats:
    emitted: int
    max_steps: int
    mean_steps: float
    open_steps: int
    tail_steps: int
    preprocess_steps: int

    def as_dict(self) -> dict[str, float | int]:
        return {
            "emitted": self.emitted,
            "max_steps": self.max_steps,
            "mean_steps": round(self.mean_steps, 3),
            "open_steps": self.open_steps,
            "tail_steps": self.tail_steps,
            "preprocess_steps": self.preprocess_steps,
        }


class EnumerationCursor:
    """Single-consumer cursor over the answers of a plan.

    Probe steps (bucket advances, distance checks, feasibility probes, merge
    comparisons, plus one for the call itself) are counted between
    consecutive answers; only their running maximum and sum are kept.
    """

    def __init__(self, plan: DecompositionPlan, dedup: bool = True):
        self.plan = plan
        self.counter = StepCounter()
        self.streams: list[PartitionStream] = []
        for _, _, specs in plan.stream_specs():
            self.streams.append(
                PartitionStream(specs, plan.k, plan.ti, plan.ix, 2 * plan.r, self.counter)
            )
        self.merge = OrderedMerge([st.next for st in self.streams], dedup, self.counter)
        self.merge.prime()
        self.open_steps = self.counter.steps
        self._mark = self.counter.steps
        self.emitted = 0
        self.max_steps = 0
        self.total_steps = 0
        self.tail_steps: int | None = None
        self.exhausted = False

    def next_answer(self) -> Answer | None:
        if self.exhausted:
            return None
        self.counter.add(1)
        answer = self.merge.next()
        delay = self.counter.steps - self._mark
        self._mark = self.counter.steps
        if answer is None:
            self.exhausted = True
            self.tail_steps = delay
            return None
        self.emitted += 1
        self.total_steps += delay
        if delay > self.max_steps:
            self.max_steps = delay
        return answer

    def __iter__(self) -> Iterator[Answer]:
        while True:
            answer = self.next_answer()
            if answer is None:
                return
            yield answer

    def step_bound(self) -> int:
        """Plan-derived bound on the probe steps of any single ``next_answer`` call."""
        return 1 + len(self.streams) + sum(st.step_bound() for st in self.streams)

    def state(self) -> bytes:
        """Fixed-width serialization of the mutable enumeration state."""
        k = self.plan.k
        parts = [st.state() for st in self.streams]
        m = self.merge
        zero = (0,) * k
        heads = b"".join(
            struct.pack(f"<q{k}q", int(h is not None), *(h if h is not None else zero))
            for h in m.heads
        )
        last = m.last if m.last is not None else zero
        fixed = struct.pack(
            f"<{4 + 2 * m.capacity}q{k}q",
            m.n_live, m.n_pending, self.emitted, self.counter.steps,
            *m.live, *m.pending, *last,
        )
        tail = struct.pack("<3q", self.max_steps, self.total_steps, int(self.exhausted))
        return b"".join(parts) + heads + fixed + tail


def open_cursor(plan: DecompositionPlan, dedup: bool = True) -> EnumerationCursor:
    return EnumerationCursor(plan, dedup)


def next_answer(c: EnumerationCursor) -> Answer | None:
    return c.next_answer()


def delay_stats(c: EnumerationCursor) -> DelayStats:
    if c.emitted == 0 and not c.exhausted:
        raise CursorStateError("no enumeration activity yet")
    mean = c.total_steps / c.emitted if c.emitted else 0.0
    return DelayStats(
        emitted=c.emitted,
        max_steps=c.max_steps,
        mean_steps=mean,
        open_steps=c.open_steps,
        tail_steps=c.tail_steps or 0,
        preprocess_steps=c.plan.total_preprocess_steps,
    )


def enumerate_answers(plan: DecompositionPlan, limit: int | None = None) -> list[Answer]:
    cursor = open_cursor(plan)
    out = []
    for answer in cursor:
        out.append(answer)
        if limit is not None and len(out) >= limit:
            break
    return out
