import time

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qssr.errors import BudgetExceeded
from qssr.groebner import (Budget, MonomialOrder, eliminate, groebner, normal_form,
                           radical_equal, radical_membership)
from qssr.matrix import PolyMatrix, generic_rank, rank_at_point
from qssr.poly import Polynomial, Ring

from oracles import sym

R = Ring.build(states=["x", "y", "z"], parameters=["k"])
NAMES = R.names
MM = Ring.build(states=["s", "c"], parameters=["e0", "k1", "km1", "k2"])
H1 = MM.parse("-k1*e0*s + (k1*s + km1)*c")
H2 = MM.parse("k1*e0*s - (k1*s + km1 + k2)*c")


def spoly(f, g, order):
    key = order.descending_key()
    lf, lg = min(f.terms, key=key), min(g.terms, key=key)
    lcm = tuple(max(a, b) for a, b in zip(lf, lg))
    mf = Polynomial(f.ring, {tuple(a - b for a, b in zip(lcm, lf)): 1 / f.terms[lf]})
    mg = Polynomial(g.ring, {tuple(a - b for a, b in zip(lcm, lg)): 1 / g.terms[lg]})
    return mf * f - mg * g


def sympy_basis(gens, order):
    G = sp.groebner([sym(g, NAMES) for g in gens], *sp.symbols(" ".join(NAMES)), order=order, domain="QQ")
    return {sp.expand(e) for e in G.exprs}


def test_trivial_and_hand_examples():
    lex = MonomialOrder("lex")
    assert [str(g) for g in groebner([R.parse("x")], lex)] == ["x"]
    G = groebner([R.parse("x^2"), R.parse("x*y")], lex)
    assert sorted(str(g) for g in G) == ["x*y", "x^2"]
    assert normal_form(spoly(G.generators[0], G.generators[1], lex), G).is_zero


def test_normal_form_examples():
    G = groebner([R.parse("x")])
    assert normal_form(R.parse("x"), G).is_zero
    assert normal_form(R.one, G) == R.one
    G2 = groebner([H2])
    r = normal_form(H1 + H2, G2)
    assert not r.is_zero
    assert normal_form(r - H1, G2).is_zero


polys = st.builds(
    lambda terms: Polynomial(R, {e: c for e, c in terms}),
    st.lists(st.tuples(st.tuples(*[st.integers(0, 2)] * 4), st.integers(-3, 3).filter(bool)),
             min_size=1, max_size=3))


@settings(max_examples=25, deadline=None)
@given(st.lists(polys, min_size=1, max_size=3), st.sampled_from(["grevlex", "lex"]))
def test_buchberger_properties(gens, kind):
    gens = [g for g in gens if not g.is_zero]
    if not gens:
        return
    order = MonomialOrder(kind)
    G = groebner(gens, order)
    for f in G:
        for g in G:
            if f is not g:
                assert G.normal_form(spoly(f, g, order)).is_zero
    for g in gens:
        assert G.contains(g)
    for f in G:
        assert groebner(gens + [f], order).generators == G.generators
    assert [str(g) for g in groebner(G.generators, order)] == [str(g) for g in G]
    assert {sp.expand(sym(g, NAMES)) for g in G} == sympy_basis(gens, kind)


def test_block_order_eliminates():
    order = MonomialOrder("block", 2)
    key = order.descending_key()
    with_x = (1, 0, 0, 0)
    free = (0, 0, 5, 5)
    assert key(with_x) < key(free)


def test_eliminate_examples():
    assert eliminate([R.parse("x - k")], ["k"]) == []
    out = eliminate([R.parse("x - k"), R.parse("x^2 - 1")], ["k"])
    assert [str(p) for p in out] == ["k^2 - 1"]
    gens = [R.parse("x*y - 1"), R.parse("y - z^2")]
    full = groebner(gens)
    for p in eliminate(gens, ["x", "z"]):
        assert full.contains(p)
        assert not p.involves(["y"])


def test_radical_membership_examples():
    x, y = R.gen("x"), R.gen("y")
    assert radical_membership(x, [x ** 2])
    assert not radical_membership(y, [x])
    at_zero = [H1.subs({"e0": 0}), H2.subs({"e0": 0})]
    c = MM.gen("c")
    lie_c = at_zero[1]
    assert radical_membership(lie_c, [c])
    for g in at_zero:
        assert radical_membership(g, at_zero)
    assert radical_equal([x * y], [y * x ** 3])


def test_budget_exceeded_is_reported():
    gens = [R.parse("x^3 - y*z*k + 1"), R.parse("y^3 - x*z + k^2"), R.parse("z^3 - x*y*k - 2")]
    with pytest.raises(BudgetExceeded) as info:
        groebner(gens, MonomialOrder("lex"), Budget(steps=20))
    assert info.value.code == "ideal.infeasible"
    t0 = time.perf_counter()
    with pytest.raises(BudgetExceeded):
        groebner(gens, MonomialOrder("lex"), Budget(seconds=0.05))
    assert time.perf_counter() - t0 < 5


def test_generic_rank_examples():
    assert generic_rank(PolyMatrix.identity(MM, 2)) == 2
    M = PolyMatrix([[MM.gen("c")]], MM)
    assert generic_rank(M) == 1
    assert rank_at_point(M, {"c": 0}) == 0
    D = PolyMatrix([[MM.parse("-(k1*s + km1 + k2)")]], MM)
    assert generic_rank(D) == 1
    for pt in [{"s": 0, "k1": 0, "km1": 0, "k2": 1}, {"s": 3, "k1": 2, "km1": 0, "k2": 1}]:
        assert rank_at_point(D, pt) == 1
