import random
from itertools import product

import pytest
from hypothesis import given

from germlab import wreath
from germlab.activity import activity_counts, classify_activity, growth_consistent

from conftest import machines, random_table

BUILTINS = ["K()", "K(1)", "K(01)", "K(00,1)", "K(11,0)", "K(1,110)", "M(2)", "M(3)", "M(4)", "grigorchuk"]


def enumerate_counts(g, levels):
    """Oracle: walk every word and test its section directly."""
    m = g.machine
    out = []
    for n in range(1, levels + 1):
        out.append(sum(1 for u in product(range(m.degree), repeat=n) if not wreath.section(g, u).machine.is_identity()))
    return out


def test_examples(groups):
    assert activity_counts(groups("K(1)").identity, 5) == [0] * 5
    M = groups("M(3)")
    assert activity_counts(M.gen("m1"), 10) == [1] * 10
    assert activity_counts(M.gen("m3"), 10) == [2 * n + 1 for n in range(1, 11)]
    assert classify_activity(groups("K(1)").gen("a1")).classification == "bounded"
    p = classify_activity(M.gen("m3"))
    assert (p.classification, p.degree) == ("polynomial", 1)


def test_exponential_synthetic():
    # one state, both sections equal to itself: two cycles in one component
    g = wreath.element_from_table(2, [[1, 0]], [[0, 0]])
    p = classify_activity(g, 10)
    assert p.classification == "exponential"
    assert p.counts == [2**n for n in range(1, 11)]
    assert growth_consistent(p)


def test_quadratic_synthetic():
    # a chain of three self-looping states gives degree 2
    g = wreath.element_from_table(2, [[0, 1], [0, 1], [1, 0], [0, 1]], [[0, 1], [1, 2], [2, 3], [3, 3]])
    p = classify_activity(g, 12)
    assert (p.classification, p.degree) == ("polynomial", 2)
    assert growth_consistent(p)


@pytest.mark.parametrize("ref", BUILTINS)
def test_structure_agrees_with_enumeration(groups, ref):
    for g in groups(ref).gens.values():
        p = classify_activity(g, 10)
        direct = enumerate_counts(g, 6 if g.degree == 2 else 4)
        assert p.counts[: len(direct)] == direct
        assert growth_consistent(p)


@given(machines(max_states=5))
def test_counts_bounded_by_branching(m):
    g = wreath.Element(wreath.minimize(m))
    c = activity_counts(g, 8)
    for a, b in zip(c, c[1:]):
        assert b <= m.degree * a
    assert classify_activity(wreath.minimize(g)).to_dict() == classify_activity(g).to_dict()


def test_subadditive_on_random_pairs():
    rng = random.Random(11)
    for _ in range(40):
        g = wreath.element_from_table(2, *random_table(rng, 2, 3))
        h = wreath.element_from_table(2, *random_table(rng, 2, 3))
        gh, tg, th = enumerate_counts(g * h, 6), enumerate_counts(g, 6), enumerate_counts(h, 6)
        assert all(x <= y + z for x, y, z in zip(gh, tg, th))


@given(machines(max_states=4))
def test_classification_consistent_on_random_machines(m):
    p = classify_activity(m, 14)
    assert growth_consistent(p) or p.classification == "polynomial" and p.degree >= 2
