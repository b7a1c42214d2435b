import random
from itertools import product

import pytest
from hypothesis import settings, strategies as st

from germlab import wreath
from germlab.groups import group, word_action

settings.register_profile("germlab", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("germlab")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def groups():
    cache = {}

    def get(ref):
        if ref not in cache:
            cache[ref] = group("builtin:" + ref)
        return cache[ref]

    return get


def random_table(rng: random.Random, degree: int, states: int):
    perms = []
    for _ in range(states):
        p = list(range(degree))
        rng.shuffle(p)
        perms.append(p)
    succs = [[rng.randrange(states) for _ in range(degree)] for _ in range(states)]
    return perms, succs


@st.composite
def machines(draw, max_degree=3, max_states=4):
    degree = draw(st.integers(2, max_degree))
    states = draw(st.integers(1, max_states))
    seed = draw(st.integers(0, 2**32 - 1))
    perms, succs = random_table(random.Random(seed), degree, states)
    return wreath.raw_machine(degree, perms, succs)


def words(degree, length):
    return [tuple(w) for w in product(range(degree), repeat=length)]


def naive_apply(spec, letters, w):
    """Evaluate a generator word letter by letter straight from the presentation."""
    out = []
    for a in w:
        b, letters = word_action(spec, letters, a)
        out.append(b)
    return tuple(out)


def closure_order(perms):
    """Size of the permutation group generated by ``perms`` by brute-force closure."""
    n = len(perms[0])
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for p in perms:
                y = tuple(p[x[i]] for i in range(n))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(seen)
