import random
from math import factorial

import pytest
from hypothesis import given

from germlab import wreath
from germlab.groups import GeneratorDef, Group, GroupSpec
from germlab.level_quotients import (
    WitnessRejected,
    is_level_transitive,
    kernel_ball,
    level_permutation,
    properness_witness_check,
    quotient_group,
    section_formula_check,
    standard_witness,
    vertex_stabilizer_gens,
)
from germlab.tree_words import Ray, index_word, word_index

from conftest import closure_order, machines, words

SIGMA_GROUP = GroupSpec(2, {"s": GeneratorDef((1, 0), ((), ()))})
ONE_RAY = Ray((), (1,))


def test_level_permutation_examples(groups):
    G = groups("K()")
    assert level_permutation(G.identity, 3) == tuple(range(8))
    assert level_permutation(Group(SIGMA_GROUP).gen("s"), 1) == (1, 0)
    # oracle: apply on all four words; adding order 00 -> 10 -> 01 -> 11
    perm = level_permutation(G.gen("a1"), 2)
    for w in words(2, 2):
        assert index_word(perm[word_index(w, 2)], 2, 2) == wreath.apply(G.gen("a1"), w)
    cycle = [(0, 0)]
    for _ in range(3):
        cycle.append(wreath.apply(G.gen("a1"), cycle[-1]))
    assert cycle == [(0, 0), (1, 0), (0, 1), (1, 1)]


@given(machines(max_degree=2, max_states=3), machines(max_degree=2, max_states=3))
def test_level_permutation_is_a_homomorphism(m1, m2):
    g, h = wreath.Element(wreath.minimize(m1)), wreath.Element(wreath.minimize(m2))
    for n in (1, 3, 6):
        pg, ph = level_permutation(g, n), level_permutation(h, n)
        assert level_permutation(g * h, n) == tuple(pg[ph[i]] for i in range(len(ph)))


def test_quotient_examples(groups):
    assert quotient_group(groups("K()"), 4).order() == 16
    assert quotient_group(SIGMA_GROUP, 3).order() == 2
    q = quotient_group(groups("K(1)"), 3)
    assert 2**7 % q.order() == 0
    assert q.order() == closure_order(list(q.generators.values()))


@pytest.mark.parametrize("ref", ["K()", "K(1)", "K(01)", "K(00,1)", "grigorchuk", "M(2)"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_quotient_matches_closure(groups, ref, n):
    G = groups(ref)
    q = quotient_group(G, n)
    assert q.order() == closure_order(list(q.generators.values()))
    bound = factorial(G.degree) ** sum(G.degree**i for i in range(n))
    assert bound % q.order() == 0


def test_quotient_order_ignores_generator_order(groups):
    spec = groups("K(00,1)").spec
    rev = GroupSpec(spec.degree, dict(reversed(list(spec.generators.items()))))
    assert quotient_group(rev, 3).order() == quotient_group(spec, 3).order()


def test_quotient_membership(groups):
    G = groups("K(1)")
    q = quotient_group(G, 4)
    rng = random.Random(3)
    for _ in range(20):
        g = G.identity
        for _ in range(6):
            g = g * rng.choice(G.symbols)
        assert q.contains(level_permutation(g, 4))
    assert not q.contains((1, 0) + tuple(range(2, 16)))


def test_transitivity(groups):
    assert is_level_transitive(groups("K()"), 5)
    assert not is_level_transitive(SIGMA_GROUP, 2)
    assert is_level_transitive(groups("M(3)"), 3)
    # oracle: orbit of the all-zero vertex
    q = quotient_group(groups("K()"), 5)
    assert len(q.orbit((0,) * 5)) == 32


def test_quotient_cap(groups):
    with pytest.raises(wreath.CapExceeded):
        quotient_group(groups("K(1)"), 12, cap=1000)


def test_stabilizer_examples(groups):
    G = groups("K()")
    s = vertex_stabilizer_gens(G, (1,))
    assert s.schreier_generators == [wreath.power(G.gen("a1"), 2)]
    assert vertex_stabilizer_gens(SIGMA_GROUP, (0,)).schreier_generators == []
    for ref, v in (("K(1)", (1, 1)), ("K(00,1)", (1, 1, 1)), ("M(3)", (2, 1))):
        s = vertex_stabilizer_gens(groups(ref), v)
        assert s.schreier_generators
        for g in s.schreier_generators:
            assert wreath.apply(g, v) == v


def test_stabilizer_generates_stabilizer(groups):
    # oracle: the Schreier generators' level permutations generate the full point stabilizer
    G = groups("K(1)")
    v = (1, 1, 0)
    s = vertex_stabilizer_gens(G, v)
    q = quotient_group(G, 3)
    stab = closure_order([level_permutation(g, 3) for g in s.schreier_generators])
    assert stab * len(s.orbit) == q.order()


def test_kernel_ball(groups):
    for z in (ONE_RAY, Ray((0,), (1, 0))):
        assert kernel_ball(groups("K()"), z, 3, 4) == [groups("K()").identity]
    assert kernel_ball(groups("K(1)"), ONE_RAY, 2, 0) == [groups("K(1)").identity]
    G = groups("K(00,1)")
    found = kernel_ball(G, ONE_RAY, 2, 3)
    a1, b1, b2 = G.gen("a1"), G.gen("b1"), G.gen("b2")
    assert b2 in found and a1 * b2 * a1 in found and b1 * a1 * b1 in found
    members = {g.machine for g in found}
    for g in found:
        assert g.inverse().machine in members
        for h in found:
            p = g * h
            assert wreath.apply(p, (1, 1)) == (1, 1) and wreath.section(p, (1, 1)).machine.is_identity()


@pytest.mark.parametrize("level", [5, 6, 7, 8])
def test_standard_witnesses(groups, level):
    G = groups("K(1)")
    g, h, probe = standard_witness(G, level)
    w = properness_witness_check(G, ONE_RAY, level, g, h, probe)
    assert wreath.apply(wreath.conjugate(g, h) * g.inverse(), w.commutator_evidence) != w.commutator_evidence
    E = G.element
    assert w.g_section.element == E("(a1 a2)^-1 a2 (a1 a2)")
    assert [x for x in w.g_section.slots] == [G.gen("a1"), G.identity]
    if level % 2:
        assert w.conjugate_section.slots == [E("a2 a1 a2^-1"), G.identity]
    else:
        assert w.conjugate_section.slots == [E("(a2 a1)^2 a1 (a2 a1)^-2"), G.identity]
    # acceptance does not depend on where we probe
    for depth in range(level):
        again = properness_witness_check(G, ONE_RAY, level, g, h, depth)
        assert again.commutator_evidence == w.commutator_evidence


def test_witness_rejections(groups):
    G = groups("K(1)")
    g, h, _ = standard_witness(G, 5)
    with pytest.raises(WitnessRejected) as exc:
        properness_witness_check(G, ONE_RAY, 5, G.identity, h)
    assert exc.value.clause == "c"
    with pytest.raises(WitnessRejected) as exc:
        properness_witness_check(G, ONE_RAY, 5, G.gen("a1"), h)
    assert exc.value.clause == "a"
    with pytest.raises(WitnessRejected) as exc:
        properness_witness_check(G, ONE_RAY, 5, g, G.gen("a1"))
    assert exc.value.clause == "b"


def test_section_formulas():
    rep = section_formula_check(8, 5)
    assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]
