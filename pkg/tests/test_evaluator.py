from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fo_enum.evaluator import UnboundVariableError, brute_enumerate, evaluate
from fo_enum.formula import And, Exists, Forall, Not, Or, parse_formula
from fo_enum.structure import parse_facts

from helpers import PATH3, random_structure


@pytest.fixture
def p3():
    return parse_facts(PATH3)


def test_atoms_and_quantifiers(p3):
    assert evaluate(p3, parse_formula("E(x,y)", p3.signature), {"x": 0, "y": 1})
    assert not evaluate(p3, parse_formula("E(x,y)", p3.signature), {"x": 1, "y": 0})
    f = parse_formula("exists x forall y (E(x,y))", p3.signature)
    assert not evaluate(p3, f, {})
    # brute force over the three witnesses
    assert not any(all((a, b) in p3.facts["E"] for b in range(3)) for a in range(3))


def test_identity(p3):
    f = parse_formula("x = x", p3.signature)
    assert all(evaluate(p3, f, {"x": a}) for a in range(3))


def test_unbound_variable(p3):
    with pytest.raises(UnboundVariableError):
        evaluate(p3, parse_formula("E(x,y)", p3.signature), {"x": 0})


def test_brute_enumerate_examples(p3):
    sig = p3.signature
    assert brute_enumerate(p3, parse_formula("E(x,y)", sig)) == [(0, 1), (1, 2)]
    assert brute_enumerate(p3, parse_formula("x = y", sig)) == [(0, 0), (1, 1), (2, 2)]
    neq = brute_enumerate(p3, parse_formula("!(x = y)", sig))
    assert neq == [t for t in itertools.product(range(3), repeat=2) if t[0] != t[1]]
    assert len(neq) == 6


def test_sentences_give_empty_tuple(p3):
    assert brute_enumerate(p3, parse_formula("exists x exists y (E(x,y))", p3.signature)) == [()]
    assert brute_enumerate(p3, parse_formula("exists x (E(x,x))", p3.signature)) == []


def test_quantifier_memo_does_not_leak_between_assignments(p3):
    f = parse_formula("exists y (E(x,y) & exists z (E(y,z)))", p3.signature)
    assert brute_enumerate(p3, f) == [(0,)]


QUERIES = [
    "E(x,y)",
    "C(x) | E(y,x)",
    "exists z (E(x,z) & !C(z))",
    "forall z (E(x,z) | z = y)",
    "!(x = y) & exists z (E(z,x))",
]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(QUERIES), st.sampled_from(QUERIES))
def test_connective_dualities(seed, qa, qb):
    s = random_structure(random.Random(seed), 6)
    a = parse_formula(qa, s.signature).root
    b = parse_formula(qb, s.signature).root
    for x, y in itertools.product(range(s.n), repeat=2):
        asg = {"x": x, "y": y}
        assert evaluate(s, Not(And(a, b)), asg) == evaluate(s, Or(Not(a), Not(b)), asg)
        assert evaluate(s, Not(Or(a, b)), asg) == evaluate(s, And(Not(a), Not(b)), asg)
        assert evaluate(s, Forall("w", a), asg) == evaluate(s, Not(Exists("w", Not(a))), asg)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(QUERIES))
def test_brute_enumerate_strictly_increasing(seed, q):
    s = random_structure(random.Random(seed), 7)
    out = brute_enumerate(s, parse_formula(q, s.signature))
    assert all(a < b for a, b in zip(out, out[1:]))
