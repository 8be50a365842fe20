import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qssr.errors import ConservationError, ModelSyntaxError
from qssr.network import (ConservationLaw, apply_conservation, available_models, conservation_laws,
                          load_model, mass_action_odes, parse_model, parse_network)

from oracles import sym


def test_parse_mm_scheme():
    net = parse_network("E + S <-> C @ k1, km1\nC <-> E + P @ k2, km2")
    assert net.species == ("E", "S", "C", "P")
    assert len(net.reactions) == 2
    assert all(r.backward is not None for r in net.reactions)


def test_parse_degradation_and_stoichiometry():
    net = parse_network("A -> @ k5")
    assert net.species == ("A",)
    assert net.reactions[0].products == ()
    net = parse_network("2 Y -> B + B @ k1")
    r = net.reactions[0]
    assert dict(r.reactants) == {"Y": 2}
    assert dict(r.products) == {"B": 2}
    odes = mass_action_odes(net)
    assert odes.field_dict()["B"] == odes.ring.parse("2*k1*Y^2")
    assert odes.field_dict()["Y"] == odes.ring.parse("-2*k1*Y^2")


@pytest.mark.parametrize("text, line", [
    ("A -> B @ k\nA -> B k2", 2),
    ("A -> B @ k\nB -> A @ k", 2),
    ("A -> B @ k\nA => B @ k2", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ModelSyntaxError) as info:
        parse_network(text)
    assert info.value.line == line


def test_model_file_errors():
    with pytest.raises(ModelSyntaxError):
        parse_model("species: a\nparameters: k\n")
    with pytest.raises(ModelSyntaxError):
        parse_model("species: a\nodes:\n  a' = k*a\nreactions:\n  a -> @ k\n")
    with pytest.raises(ModelSyntaxError) as info:
        parse_model("species: a, b\nparameters: k\nodes:\n  a' = k*b\n  b' = q\n").full_system()
    assert info.value.line == 5


def test_single_reaction():
    odes = mass_action_odes(parse_network("A -> B @ k"))
    assert [str(h) for h in odes.rhs] == ["-A*k", "A*k"]


def test_mm_reduces_to_standard_form():
    odes = load_model("mm_irrev").system()
    ring = odes.ring
    assert odes.states == ("s", "c")
    assert odes.field_dict()["s"] == ring.parse("-k1*e0*s + (k1*s + km1)*c")
    assert odes.field_dict()["c"] == ring.parse("k1*e0*s - (k1*s + km1 + k2)*c")


def test_bimolecular_system():
    odes = load_model("bimolecular_rev").system()
    ring = odes.ring
    l, c = odes.field_dict()["l"], odes.field_dict()["c"]
    assert l == ring.parse("-k1*l*(l + a) + km1*c")
    assert c == ring.parse("k1*l*(l + a) - (km1 + k2)*c + km2*(b - l - c)")


def test_conservation_examples():
    laws = conservation_laws(parse_network("A <-> B @ k1, k2"))
    assert [law.weights for law in laws] == [(("A", 1), ("B", 1))]
    assert conservation_laws(parse_network("A -> @ k")) == []
    net = load_model("coop3").network
    laws = conservation_laws(net)
    assert len(laws) == 2
    basis = sp.Matrix([[law.weight(s) for s in net.species] for law in laws])
    e0 = sp.Matrix([[1 if s.startswith("c") else 0 for s in net.species]])
    s0 = sp.Matrix([[{"s": 1, "p": 1, "c0": 0}.get(s, int(s[1:]) if s.startswith("c") else 0)
                     for s in net.species]])
    for row in (e0, s0):
        assert basis.col_join(row).rank() == 2


def test_apply_conservation_examples():
    net = parse_network("A <-> B @ k1, k2")
    odes = mass_action_odes(net)
    red = apply_conservation(odes, [ConservationLaw((("A", 1), ("B", 1)), "T")], ["B"])
    assert red.states == ("A",)
    assert red.rhs[0] == red.ring.parse("-k1*A + k2*(T - A)")
    coop = load_model("coop2").system()
    assert coop.states == ("s", "c1", "c2")
    with pytest.raises(ConservationError):
        apply_conservation(odes, [ConservationLaw((("A", 2), ("B", 2)), "T")], ["B"])


@pytest.mark.parametrize("name", available_models())
def test_conservation_laws_are_first_integrals(name):
    model = load_model(name)
    full = model.full_system()
    for law in model.laws():
        theta = sum((w * full.ring.gen(s) for s, w in law.weights), full.ring.zero)
        assert full.lie(theta).is_zero
    if model.network is not None:
        for law in conservation_laws(model.network):
            theta = sum((w * full.ring.gen(s) for s, w in law.weights), full.ring.zero)
            assert full.lie(theta).is_zero


@pytest.mark.parametrize("name", ["mm_rev", "coop2", "coop3", "competitive", "bimolecular_rev"])
def test_reexpansion_matches_full_field(name):
    model = load_model(name)
    full, red = model.full_system(), model.system()
    back = {s: p.to_ring(full.ring) for s, p in red.substitutions}
    rf = red.field_dict()
    for s, h in zip(full.states, full.rhs):
        if s in rf:
            assert h.subs(back).to_ring(red.ring) == rf[s]


species_names = ["A", "B", "C", "D"]
side = st.dictionaries(st.sampled_from(species_names), st.integers(1, 2), max_size=2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(side, side), min_size=1, max_size=4))
def test_mass_action_matches_brute_force(reactions):
    lines = []
    for i, (lhs, rhs) in enumerate(reactions):
        fmt = lambda d: " + ".join(f"{n} {s}" for s, n in sorted(d.items()))
        lines.append(f"{fmt(lhs)} -> {fmt(rhs)} @ k{i}")
    if not any(lhs or rhs for lhs, rhs in reactions):
        return
    try:
        net = parse_network("\n".join(lines))
    except ModelSyntaxError:
        # a reaction without any species on either side
        return
    odes = mass_action_odes(net)
    names = odes.ring.names
    X = {s: sp.Symbol(s) for s in names}
    expected = {s: 0 for s in net.species}
    for i, (lhs, rhs) in enumerate(reactions):
        rate = X[f"k{i}"]
        for s, n in lhs.items():
            rate *= X[s] ** n
        for s in net.species:
            expected[s] += (rhs.get(s, 0) - lhs.get(s, 0)) * rate
    for s, h in zip(odes.states, odes.rhs):
        assert sp.expand(sym(h, names) - expected[s]) == 0
