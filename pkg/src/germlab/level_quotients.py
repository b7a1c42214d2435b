"""Finite level quotients, vertex stabilizers, kernel balls and properness witnesses.

Everything here lives at a fixed level n of the tree: a group element
induces a permutation of the d**n vertices (indexed lexicographically), and
the group generated by the generator permutations is the level-n quotient.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from sympy.combinatorics import Permutation, PermutationGroup

from . import wreath
from .groups import Group, GroupSpec
from .tree_words import Alphabet, Ray, Word, format_word, index_word, ray_prefix, word_index
from .wreath import Element, Perm, apply, check_level, state_at


def level_permutation(g: Element, n: int, force: bool = False) -> Perm:
    return wreath.level_permutation(g, n, force)


def _as_group(spec: GroupSpec | Group) -> Group:
    return spec if isinstance(spec, Group) else Group(spec)


@dataclass
class LevelPermGroup:
    level: int
    degree: int
    generators: dict[str, Perm]
    chain: PermutationGroup

    def order(self) -> int:
        return int(self.chain.order())

    def contains(self, perm: Perm) -> bool:
        return self.chain.contains(Permutation(list(perm)))

    @property
    def base(self) -> list[int]:
        return list(self.chain.base)

    def orbit(self, vertex: Word) -> list[Word]:
        start = word_index(vertex, self.degree)
        return [index_word(i, self.level, self.degree) for i in _orbit(start, list(self.generators.values()))]


def _orbit(start: int, perms: list[Perm]) -> list[int]:
    seen = {start}
    out = [start]
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for p in perms:
            y = p[x]
            if y not in seen:
                seen.add(y)
                out.append(y)
                queue.append(y)
    return out


def quotient_group(spec: GroupSpec | Group, n: int, cap: int = wreath.LEVEL_CAP) -> LevelPermGroup:
    """The image of the group in Sym(V_n), with a stabilizer chain for order and membership."""
    G = _as_group(spec)
    d = G.degree
    if d**n > cap:
        raise wreath.CapExceeded(f"level {n} has {d**n} vertices, above the cap {cap}")
    gens = {name: level_permutation(g, n, force=True) for name, g in G.gens.items()}
    size = d**n
    perms = [Permutation(list(p)) for p in gens.values()] or [Permutation(list(range(size)))]
    chain = PermutationGroup(perms)
    chain.schreier_sims()
    return LevelPermGroup(n, d, gens, chain)


def is_level_transitive(spec: GroupSpec | Group, n: int, cap: int = wreath.LEVEL_CAP) -> bool:
    G = _as_group(spec)
    d = G.degree
    if d**n > cap:
        raise wreath.CapExceeded(f"level {n} has {d**n} vertices, above the cap {cap}")
    perms = [level_permutation(g, n, force=True) for g in G.gens.values()]
    return len(_orbit(0, perms)) == d**n


@dataclass
class StabilizerData:
    vertex: Word
    orbit: list[Word]
    coset_reps: dict[Word, Element]
    schreier_generators: list[Element]


def vertex_stabilizer_gens(spec: GroupSpec | Group, vertex: Word, cap: int = wreath.LEVEL_CAP) -> StabilizerData:
    """Schreier generators ``u_{s(x)}^-1 s u_x`` of the stabilizer of ``vertex``.

    ``u_x`` is the coset representative found by breadth-first traversal of
    the orbit, with ``u_x(vertex) = x``.
    """
    G = _as_group(spec)
    vertex = tuple(vertex)
    n = len(vertex)
    check_level(G.degree, n)
    if G.degree**n > cap:
        raise wreath.CapExceeded(f"level {n} has {G.degree**n} vertices, above the cap {cap}")
    reps: dict[Word, Element] = {vertex: G.identity}
    order = [vertex]
    queue = deque([vertex])
    while queue:
        x = queue.popleft()
        for s in G.gens.values():
            y = apply(s, x)
            if y not in reps:
                reps[y] = s * reps[x]
                order.append(y)
                queue.append(y)
    out: list[Element] = []
    seen = set()
    for x in order:
        for s in G.gens.values():
            y = apply(s, x)
            gen = reps[y].inverse() * s * reps[x]
            if gen.machine.is_identity() or gen.machine in seen:
                continue
            seen.add(gen.machine)
            out.append(gen)
    return StabilizerData(vertex, order, reps, out)


def acts_trivially_below(g: Element, vertex: Word) -> bool:
    """Whether ``g`` fixes ``vertex`` and is the identity on the cylinder below it."""
    m = g.machine
    return apply(m, vertex) == tuple(vertex) and state_at(m, vertex) == m.identity_state


def kernel_ball(spec: GroupSpec | Group, z: Ray, level: int, word_bound: int) -> list[Element]:
    """Ball elements acting as the identity on the cylinder over the first ``level`` letters of ``z``."""
    G = _as_group(spec)
    prefix = ray_prefix(z, level)
    return [g for g in G.ball(word_bound) if acts_trivially_below(g, prefix)]


class WitnessRejected(ValueError):
    def __init__(self, clause: str, message: str):
        super().__init__(f"clause ({clause}) failed: {message}")
        self.clause = clause


@dataclass
class SectionView:
    """A section at a vertex together with its one-level wreath form."""

    depth: int
    vertex: Word
    element: Element
    perm: Perm
    slots: list[Element]

    def display(self) -> str:
        inner = ", ".join(x.label for x in self.slots)
        trivial = all(i == p for i, p in enumerate(self.perm))
        return f"({inner})" if trivial else f"({inner}){list(self.perm)}"


def section_view(g: Element, vertex: Word) -> SectionView:
    sec = wreath.section(g, vertex)
    nf = wreath.level_normal_form(sec, 1)
    return SectionView(len(vertex), tuple(vertex), sec, nf.perm, nf.tuple_display())


@dataclass
class PropernessWitness:
    level: int
    g: Element
    h: Element
    commutator_evidence: Word
    probe_vertex: Word
    g_section: SectionView
    conjugate_section: SectionView
    views: dict[int, tuple[SectionView, SectionView]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.g.degree
        return {
            "level": self.level,
            "clauses": {"a": True, "b": True, "c": True},
            "commutator_moves": format_word(self.commutator_evidence, d),
            "probe_vertex": format_word(self.probe_vertex, d),
            "g_section": self.g_section.display(),
            "conjugate_section": self.conjugate_section.display(),
            "depths": {
                str(k): {"g_section": a.display(), "conjugate_section": b.display()}
                for k, (a, b) in sorted(self.views.items())
            },
        }


def properness_witness_check(
    spec: GroupSpec | Group,
    z: Ray,
    level: int,
    g: Element,
    h: Element,
    probe_depth: int | None = None,
    extra_depths: tuple[int, ...] = (),
) -> PropernessWitness:
    """Check that ``g`` is trivial near ``z`` at this level but fails to commute with ``h``.

    (a) ``g`` is the identity on the cylinder at ``z[:level]``; (b) ``h``
    fixes that vertex; (c) ``h^-1 g h g^-1`` moves some word.  Sections of
    ``g`` and of ``h^-1 g h`` are recorded at the probe vertex and at any
    extra depths asked for.
    """
    prefix = ray_prefix(z, level)
    if not acts_trivially_below(g, prefix):
        raise WitnessRejected("a", f"g is not the identity on the cylinder at {format_word(prefix, g.degree)}")
    if apply(h, prefix) != prefix:
        raise WitnessRejected("b", f"h does not fix {format_word(prefix, g.degree)}")
    conj = wreath.conjugate(g, h)
    comm = conj * g.inverse()
    moved = wreath.moved_word(comm)
    if moved is None:
        raise WitnessRejected("c", "h^-1 g h g^-1 is the identity, so g commutes with h")
    if probe_depth is None:
        probe_depth = max(level - 1, 0)
    views = {}
    for k in sorted({probe_depth, *extra_depths}):
        v = ray_prefix(z, k)
        views[k] = (section_view(g, v), section_view(conj, v))
    gv, cv = views[probe_depth]
    return PropernessWitness(level, g, h, moved, ray_prefix(z, probe_depth), gv, cv, views)


def standard_witness(G: Group, level: int) -> tuple[Element, Element, int]:
    """The explicit pair for K(1) along ``1^inf`` at a level above 4, and its probe depth.

    Odd levels use the conjugate of ``a2^(2^((l-1)/2))`` by ``(a1a2)^(2^(l-1))``
    and probe at depth ``l-1``; even levels shift everything down by one.
    """
    if level <= 4:
        raise ValueError("the explicit witnesses start at level 5")
    shift = 1 if level % 2 else 2
    half = (level - shift) // 2
    a1a2 = G.element("a1 a2")
    conj = wreath.power(a1a2, 2 ** (level - shift))
    g = conj.inverse() * wreath.power(G.gen("a2"), 2**half) * conj
    h = wreath.power(a1a2, -(2**level))
    return g, h, level - shift


def section_formula_check(level_max: int = 8, doubled_max: int = 5) -> dict:
    """Recompute the K(1) section identities along ``1^inf``; each entry records pass/fail."""
    from .groups import build_Kv

    G = Group(build_Kv("1"))
    E = G.element
    one = G.identity
    a1a2, a2a1, a2 = E("a1 a2"), E("a2 a1"), G.gen("a2")
    checks: list[dict] = []

    def record(name: str, ok: bool) -> None:
        checks.append({"check": name, "passed": bool(ok)})

    def form(g: Element, n: int) -> tuple[Perm, list[Element]]:
        nf = wreath.level_normal_form(g, n)
        return nf.perm, nf.tuple_display()

    record("a1a2 = (a2a1, 1) sigma", form(a1a2, 1) == ((1, 0), [a2a1, one]))
    record("a2a1 = (a2, a1) sigma", form(a2a1, 1) == ((1, 0), [a2, G.gen("a1")]))
    record("(a1a2)^2 = (a2a1, a2a1)", form(a1a2**2, 1) == ((0, 1), [a2a1, a2a1]))
    record("(a2a1)^2 = (a2a1, a1a2)", form(a2a1**2, 1) == ((0, 1), [a2a1, a1a2]))
    record(
        "(a1a2)^4 = (a2a1, a1a2, a2a1, a1a2) at level 2",
        form(a1a2**4, 2) == ((0, 1, 2, 3), [a2a1, a1a2, a2a1, a1a2]),
    )
    for level in range(1, level_max + 1):
        p = wreath.power(a1a2, 2**level)
        trivial = all(i == x for i, x in enumerate(level_permutation(p, level)))
        want = a2a1 if level % 2 else a1a2
        record(f"(a1a2)^(2^{level}) trivial on level {level}, section at 1^{level}", trivial and wreath.section(p, (1,) * level) == want)
    for level in range(1, doubled_max + 1):
        p = wreath.power(a2, 2**level)
        record(f"a2^(2^{level}) section at 1^{2 * level} is a2", wreath.section(p, (1,) * (2 * level)) == a2)
    conj = a1a2.inverse() * a2 * a1a2
    record("(a1a2)^-1 a2 (a1a2) = (a1, 1)", form(conj, 1) == ((0, 1), [G.gen("a1"), one]))
    return {"group": "K(1)", "passed": all(c["passed"] for c in checks), "checks": checks}
