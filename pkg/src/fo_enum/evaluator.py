"""Naive Tarskian evaluation of first-order formulas.

This is the correctness oracle and the decision procedure used when the
precomputation tests whether a type sequence is relevant.  Quantifiers range
over the whole domain, so evaluation is exponential in the quantifier rank.
"""

from __future__ import annotations

import itertools
from typing import Mapping

from .formula import And, Atom, Eq, Exists, Forall, Formula, Node, Not, Or, free_set, walk
from .structure import StepCounter, Structure


class UnboundVariableError(KeyError):
    pass


class Evaluator:
    """Evaluates formulas over one structure, caching closed-off subformulas.

    Results of quantified subformulas are memoized on the values of their
    free variables, which keeps nested quantifiers from re-scanning the
    domain for assignments they have already decided.
    """

    def __init__(self, s: Structure, counter: StepCounter | None = None):
        self.s = s
        self.facts = {rel: frozenset(ts) for rel, ts in s.facts.items()}
        self.counter = counter
        # id -> (node, free vars); holding the node keeps its id from being reused
        self._free: dict[int, tuple[Node, tuple[str, ...]]] = {}
        self._memo: dict[tuple[int, tuple[int, ...]], bool] = {}

    def _free_of(self, node: Node) -> tuple[str, ...]:
        key = id(node)
        found = self._free.get(key)
        if found is None:
            found = (node, tuple(sorted(free_set(node))))
            self._free[key] = found
        return found[1]

    def prepare(self, f: Formula) -> None:
        for node in walk(f.root):
            self._free_of(node)

    def evaluate(self, f: Formula | Node, asg: Mapping[str, int]) -> bool:
        node = f.root if isinstance(f, Formula) else f
        missing = [v for v in self._free_of(node) if v not in asg]
        if missing:
            raise UnboundVariableError(f"unbound free variable(s): {', '.join(missing)}")
        return self._eval(node, dict(asg))

    def _eval(self, node: Node, asg: dict[str, int]) -> bool:
        if self.counter is not None:
            self.counter.steps += 1
        if isinstance(node, Atom):
            return tuple(asg[v] for v in node.args) in self.facts[node.relation]
        if isinstance(node, Eq):
            return asg[node.left] == asg[node.right]
        if isinstance(node, Not):
            return not self._eval(node.body, asg)
        if isinstance(node, And):
            return self._eval(node.left, asg) and self._eval(node.right, asg)
        if isinstance(node, Or):
            return self._eval(node.left, asg) or self._eval(node.right, asg)
        free = self._free_of(node)
        key = (id(node), tuple(asg[v] for v in free))
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        var, body = node.var, node.body
        saved = asg.get(var)
        want = isinstance(node, Exists)
        result = not want
        for a in range(self.s.n):
            asg[var] = a
            if self._eval(body, asg) == want:
                result = want
                break
        if saved is None:
            asg.pop(var, None)
        else:
            asg[var] = saved
        self._memo[key] = result
        return result

    def holds(self, f: Formula, t: tuple[int, ...]) -> bool:
        return self.evaluate(f, dict(zip(f.free_vars, t)))


def evaluate(s: Structure, f: Formula | Node, asg: Mapping[str, int]) -> bool:
    return Evaluator(s).evaluate(f, asg)


def brute_enumerate(s: Structure, f: Formula) -> list[tuple[int, ...]]:
    """All answers, in lexicographic domain order, by trying every tuple."""
    ev = Evaluator(s)
    return [t for t in itertools.product(range(s.n), repeat=f.k) if ev.holds(f, t)]
