from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fo_enum.formula import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    FormulaError,
    Not,
    Or,
    RadiusOverflowError,
    Signature,
    free_set,
    free_variables,
    locality_radius,
    node_size,
    parse_formula,
    pretty,
)

SIG = Signature((("E", 2), ("C", 1), ("T", 3)))


def test_single_atom():
    f = parse_formula("E(x,y)", SIG)
    assert f.root == Atom("E", ("x", "y"))
    assert f.free_vars == ("x", "y")
    assert f.size == 1
    assert f.k == 2


def test_size_counts_every_connective_and_quantifier():
    f = parse_formula("exists y (E(x,y) & !(x=y))", SIG)
    assert f.free_vars == ("x",)
    assert f.size == 5


def test_arity_mismatch_is_rejected():
    with pytest.raises(FormulaError, match="arity"):
        parse_formula("E(x,y,z)", SIG)


def test_unknown_relation():
    with pytest.raises(FormulaError, match="unknown relation"):
        parse_formula("R(x)", SIG)


def test_syntax_error_reports_position():
    with pytest.raises(FormulaError) as info:
        parse_formula("E(x,y) & ", SIG)
    assert info.value.position == 9


def test_shadowing_rejected():
    with pytest.raises(FormulaError, match="already bound"):
        parse_formula("exists y (exists y (E(x,y)))", SIG)
    with pytest.raises(FormulaError, match="free and bound"):
        parse_formula("C(y) & exists y (E(x,y))", SIG)


def test_uppercase_variables_rejected():
    with pytest.raises(FormulaError):
        parse_formula("X = y", SIG)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("E(x,y)", ("x", "y")),
        ("exists y E(x,y)", ("x",)),
        ("exists x exists y E(x,y)", ()),
        ("E(y,x) & C(z)", ("y", "x", "z")),
    ],
)
def test_free_variables_first_occurrence(text, expected):
    assert free_variables(parse_formula(text, SIG)) == expected


def test_precedence():
    f = parse_formula("!C(x) & C(y) | E(x,y)", SIG)
    assert f.root == Or(And(Not(Atom("C", ("x",))), Atom("C", ("y",))), Atom("E", ("x", "y")))


def test_head_reorders_coordinates():
    f = parse_formula("E(x,y)", SIG).with_head(["y", "x"])
    assert f.free_vars == ("y", "x")
    with pytest.raises(FormulaError):
        parse_formula("E(x,y)", SIG).with_head(["x"])


def test_locality_radius():
    assert locality_radius(parse_formula("E(x,y)", SIG)).r == 2
    f = parse_formula("exists y (E(x,y) & !(x=y))", SIG)
    assert locality_radius(f).r == 32
    assert not locality_radius(f).overridden
    lr = locality_radius(f, override=1)
    assert (lr.r, lr.overridden) == (1, True)
    with pytest.raises(ValueError):
        locality_radius(f, override=0)


def test_radius_overflow_asks_for_override():
    text = " & ".join(["C(x)"] * 40)  # 79 nodes
    f = parse_formula(text, SIG)
    with pytest.raises(RadiusOverflowError, match="override"):
        locality_radius(f)
    assert locality_radius(f, override=3).r == 3


def test_signature_rejects_duplicates_and_zero_arity():
    with pytest.raises(ValueError):
        Signature((("E", 2), ("E", 1)))
    with pytest.raises(ValueError):
        Signature((("P", 0),))


# -- properties ---------------------------------------------------------------

VARS = ["x", "y", "z", "w"]


def formulas():
    var = st.sampled_from(VARS)
    leaves = st.one_of(
        st.builds(lambda a, b: Atom("E", (a, b)), var, var),
        st.builds(lambda a: Atom("C", (a,)), var),
        st.builds(lambda a, b, c: Atom("T", (a, b, c)), var, var, var),
        st.builds(Eq, var, var),
    )

    def extend(children):
        return st.one_of(
            st.builds(Not, children),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Exists, var, children),
            st.builds(Forall, var, children),
        )

    return st.recursive(leaves, extend, max_leaves=8)


def _well_scoped(node, bound=frozenset()) -> bool:
    if isinstance(node, (Exists, Forall)):
        if node.var in bound:
            return False
        return _well_scoped(node.body, bound | {node.var})
    if isinstance(node, Not):
        return _well_scoped(node.body, bound)
    if isinstance(node, (And, Or)):
        return _well_scoped(node.left, bound) and _well_scoped(node.right, bound)
    return True


def _bound(node) -> set[str]:
    out = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, (Exists, Forall)):
            out.add(n.var)
            stack.append(n.body)
        elif isinstance(n, Not):
            stack.append(n.body)
        elif isinstance(n, (And, Or)):
            stack.extend([n.left, n.right])
    return out


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_pretty_print_round_trip(node):
    if not _well_scoped(node) or free_set(node) & _bound(node):
        with pytest.raises(FormulaError):
            parse_formula(pretty(node), SIG)
        return
    f = parse_formula(pretty(node), SIG)
    assert f.root == node
    assert set(f.free_vars) == free_set(node)


@settings(max_examples=200, deadline=None)
@given(formulas(), formulas())
def test_size_strictly_monotone(a, b):
    base = node_size(a)
    assert node_size(Not(a)) == base + 1
    assert node_size(And(a, b)) > base
    assert node_size(Or(b, a)) > base
    assert node_size(Exists("v", a)) == base + 1
