"""Exact algebra of finite-state tree automorphisms.

A tree automorphism is stored as a minimal Mealy machine: each state has a
root permutation and one successor per letter, the successor at letter ``a``
being the section at ``a``.  The action is

    apply(g, a t) = perm_g(a) apply(g|_a, t)

and products act rightmost-first, ``apply(g h, w) = apply(g, apply(h, w))``.

Every machine reaching user code is minimized (Moore partition refinement on
``(perm, successor classes)``) and relabelled in breadth-first order from the
initial state, so two automorphisms are equal exactly when their machines are
identical.  Canonical machines are interned.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .tree_words import Alphabet, Ray, Word, index_word, word_index

Perm = tuple[int, ...]

LEVEL_CAP = 2**20


class CapExceeded(RuntimeError):
    """A hard resource cap (vertex count, state count) was hit."""


def perm_compose(p: Perm, q: Perm) -> Perm:
    """``p o q``: apply ``q`` first."""
    return tuple(p[x] for x in q)


def perm_inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def check_perm(p: Sequence[int], degree: int) -> Perm:
    p = tuple(p)
    if len(p) != degree or sorted(p) != list(range(degree)):
        raise ValueError(f"permutation {list(p)} is not a bijection of 0..{degree - 1}")
    return p


class Machine:
    """A canonical (minimal, BFS-labelled) automaton; state 0 is initial."""

    __slots__ = ("degree", "perms", "succs", "_hash", "__weakref__")

    def __init__(self, degree: int, perms: tuple[Perm, ...], succs: tuple[tuple[int, ...], ...]):
        self.degree = degree
        self.perms = perms
        self.succs = succs
        self._hash = hash((degree, perms, succs))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Machine):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.degree == other.degree
            and self.perms == other.perms
            and self.succs == other.succs
        )

    def __len__(self):
        return len(self.perms)

    def __repr__(self):
        rows = ", ".join(f"{i}:{list(p)}->{list(s)}" for i, (p, s) in enumerate(zip(self.perms, self.succs)))
        return f"Machine(d={self.degree}; {rows})"

    @property
    def identity_state(self) -> int | None:
        """Index of the state acting trivially, if the machine has one."""
        triv = tuple(range(self.degree))
        for i, (p, s) in enumerate(zip(self.perms, self.succs)):
            if p == triv and all(t == i for t in s):
                return i
        return None

    def is_identity(self) -> bool:
        return len(self.perms) == 1 and self.identity_state == 0

    def to_table(self) -> list[dict]:
        return [{"perm": list(p), "succ": list(s)} for p, s in zip(self.perms, self.succs)]


_INTERN: dict[Machine, Machine] = {}


def intern(m: Machine) -> Machine:
    return _INTERN.setdefault(m, m)


def canonical_machine(
    degree: int,
    perms: Sequence[Sequence[int]],
    succs: Sequence[Sequence[int]],
    initial: int = 0,
) -> Machine:
    """Minimize and canonically relabel an arbitrary automaton table."""
    # reachable part
    index = {initial: 0}
    order = [initial]
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        for t in succs[s]:
            if t not in index:
                index[t] = len(order)
                order.append(t)
    n = len(order)
    lperm = [tuple(perms[s]) for s in order]
    lsucc = [tuple(index[t] for t in succs[s]) for s in order]

    # Moore refinement
    first: dict[Perm, int] = {}
    cls = [first.setdefault(p, len(first)) for p in lperm]
    count = len(first)
    while True:
        sig: dict[tuple, int] = {}
        new = [sig.setdefault((cls[s], tuple(cls[t] for t in lsucc[s])), len(sig)) for s in range(n)]
        if len(sig) == count:
            break
        cls, count = new, len(sig)

    # BFS relabel of the quotient from the initial class
    rep: dict[int, int] = {}
    for s in range(n):
        rep.setdefault(cls[s], s)
    label = {cls[0]: 0}
    queue = [cls[0]]
    j = 0
    while j < len(queue):
        c = queue[j]
        j += 1
        for t in lsucc[rep[c]]:
            ct = cls[t]
            if ct not in label:
                label[ct] = len(queue)
                queue.append(ct)
    out_perms = tuple(lperm[rep[c]] for c in queue)
    out_succs = tuple(tuple(label[cls[t]] for t in lsucc[rep[c]]) for c in queue)
    return intern(Machine(degree, out_perms, out_succs))


def identity_machine(degree: int) -> Machine:
    return intern(Machine(degree, (tuple(range(degree)),), ((0,) * degree,)))


@lru_cache(maxsize=None)
def submachine(m: Machine, state: int) -> Machine:
    if state == 0:
        return m
    return canonical_machine(m.degree, m.perms, m.succs, state)


@lru_cache(maxsize=200_000)
def machine_product(m1: Machine, m2: Machine) -> Machine:
    if m1.degree != m2.degree:
        raise ValueError(f"alphabet mismatch: degree {m1.degree} vs {m2.degree}")
    if m1.is_identity():
        return m2
    if m2.is_identity():
        return m1
    d = m1.degree
    index = {(0, 0): 0}
    pairs = [(0, 0)]
    perms, succs = [], []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        i += 1
        pp, qp = m1.perms[p], m2.perms[q]
        perms.append(tuple(pp[qp[x]] for x in range(d)))
        row = []
        for x in range(d):
            nxt = (m1.succs[p][qp[x]], m2.succs[q][x])
            if nxt not in index:
                index[nxt] = len(pairs)
                pairs.append(nxt)
            row.append(index[nxt])
        succs.append(tuple(row))
    assert len(pairs) <= len(m1) * len(m2)
    return canonical_machine(d, perms, succs)


@lru_cache(maxsize=100_000)
def machine_inverse(m: Machine) -> Machine:
    invs = [perm_inverse(p) for p in m.perms]
    succs = [tuple(m.succs[s][invs[s][x]] for x in range(m.degree)) for s in range(len(m))]
    return canonical_machine(m.degree, invs, succs)


# ---------------------------------------------------------------------------
# Formal words: tuples of (base, exponent) where base is a generator name, a
# nested word (rendered in parentheses) or a Section marker.


@dataclass(frozen=True)
class SectionOf:
    word: tuple
    vertex: Word
    degree: int


def _fmt_base(base) -> str:
    if isinstance(base, str):
        return base
    if isinstance(base, SectionOf):
        from .tree_words import format_word

        return f"({format_expr(base.word)})|_{format_word(base.vertex, base.degree) or 'e'}"
    return f"({format_expr(base)})"


def format_expr(word: tuple) -> str:
    """Render a formal word; the empty word is ``1``."""
    if not word:
        return "1"
    parts = []
    for base, e in word:
        s = _fmt_base(base)
        parts.append(s if e == 1 else f"{s}^{e}")
    return " ".join(parts)


def expr_mul(u: tuple, v: tuple) -> tuple:
    out = list(u)
    for base, e in v:
        if out and out[-1][0] == base:
            e += out.pop()[1]
            if e == 0:
                continue
        out.append((base, e))
    return tuple(out)


def expr_inv(u: tuple) -> tuple:
    return tuple((base, -e) for base, e in reversed(u))


def expr_pow(u: tuple, k: int) -> tuple:
    if k == 0 or not u:
        return ()
    if len(u) == 1:
        return ((u[0][0], u[0][1] * k),)
    if k == 1:
        return u
    if k == -1:
        return expr_inv(u)
    return ((u, k),)


def expr_expand(u: tuple, limit: int = 10_000) -> tuple[tuple[str, int], ...] | None:
    """Flatten to a sequence of (generator, +-1); None if longer than ``limit``."""
    out: list[tuple[str, int]] = []

    def rec(word, sign) -> bool:
        items = word if sign > 0 else tuple(reversed(word))
        for base, e in items:
            e *= sign
            if isinstance(base, SectionOf):
                return False
            for _ in range(abs(e)):
                if isinstance(base, str):
                    out.append((base, 1 if e > 0 else -1))
                elif not rec(base, 1 if e > 0 else -1):
                    return False
                if len(out) > limit:
                    return False
        return True

    if not rec(u, 1):
        return None
    return tuple(out)


def free_reduce(letters: Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    out: list[tuple[str, int]] = []
    for name, e in letters:
        if out and out[-1][0] == name and out[-1][1] == -e:
            out.pop()
        else:
            out.append((name, e))
    return tuple(out)


def letters_to_expr(letters: Sequence[tuple[str, int]]) -> tuple:
    word: tuple = ()
    for name, e in letters:
        word = expr_mul(word, ((name, e),))
    return word


# ---------------------------------------------------------------------------


class Element:
    """A group element: a formal word plus the canonical machine realizing it.

    Equality and hashing use the machine only; ``group`` (optional) is used
    to produce readable names for derived elements such as sections.
    """

    __slots__ = ("machine", "word", "group")

    def __init__(self, machine: Machine, word: tuple = (), group=None):
        self.machine = machine
        self.word = word
        self.group = group

    @property
    def degree(self) -> int:
        return self.machine.degree

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.machine == other.machine

    def __hash__(self):
        return hash(self.machine)

    def __repr__(self):
        return f"Element({self.label!r}, states={len(self.machine)})"

    def __str__(self):
        return self.label

    @property
    def label(self) -> str:
        if self.machine.is_identity():
            return "1"
        return format_expr(self.word)

    def __mul__(self, other: Element) -> Element:
        return compose(self, other)

    def __pow__(self, k: int) -> Element:
        return power(self, k)

    def inverse(self) -> Element:
        return inverse(self)

    def __call__(self, word: Sequence[int]) -> Word:
        return apply(self, word)

    def named(self, word: tuple) -> Element:
        return Element(self.machine, word, self.group)


ElementLike = Union[Element, Machine]


def _as_machine(g: ElementLike) -> Machine:
    return g.machine if isinstance(g, Element) else g


def _group_of(*gs):
    for g in gs:
        if isinstance(g, Element) and g.group is not None:
            return g.group
    return None


def identity(degree: int, group=None) -> Element:
    return Element(identity_machine(degree), (), group)


def element_from_table(
    degree: int,
    perms: Sequence[Sequence[int]],
    succs: Sequence[Sequence[int]],
    initial: int = 0,
    word: tuple = (),
) -> Element:
    perms = [check_perm(p, degree) for p in perms]
    for row in succs:
        if len(row) != degree or any(not 0 <= t < len(perms) for t in row):
            raise ValueError(f"successor row {list(row)} does not resolve within the machine")
    return Element(canonical_machine(degree, perms, succs, initial), word)


def apply(g: ElementLike, w: Sequence[int]) -> Word:
    m = _as_machine(g)
    s = 0
    out = []
    for a in w:
        if not 0 <= a < m.degree:
            raise ValueError(f"letter {a} outside alphabet of size {m.degree}")
        out.append(m.perms[s][a])
        s = m.succs[s][a]
    return tuple(out)


def state_at(g: ElementLike, w: Sequence[int]) -> int:
    m = _as_machine(g)
    s = 0
    for a in w:
        if not 0 <= a < m.degree:
            raise ValueError(f"letter {a} outside alphabet of size {m.degree}")
        s = m.succs[s][a]
    return s


def section(g: Element, w: Sequence[int]) -> Element:
    """The section ``g|_w``."""
    w = tuple(w)
    s = state_at(g, w)
    m = submachine(g.machine, s)
    if not w:
        return g
    group = g.group
    if group is not None:
        return group.section_element(g, w, m)
    return Element(m, ((SectionOf(g.word, w, g.degree), 1),) if g.word else ())


def compose(g: Element, h: Element) -> Element:
    """The product ``g h`` (``h`` acts first)."""
    m = machine_product(g.machine, h.machine)
    return Element(m, expr_mul(g.word, h.word), _group_of(g, h))


def product(elements: Iterable[Element], degree: int) -> Element:
    out = identity(degree)
    for e in elements:
        out = compose(out, e)
    return out


def inverse(g: Element) -> Element:
    return Element(machine_inverse(g.machine), expr_inv(g.word), g.group)


def power(g: Element, k: int) -> Element:
    """``g**k`` by repeated squaring; every intermediate product is minimized."""
    word = expr_pow(g.word, k)
    base = g.machine if k >= 0 else machine_inverse(g.machine)
    k = abs(k)
    result = identity_machine(g.degree)
    while k:
        if k & 1:
            result = machine_product(result, base)
        k >>= 1
        if k:
            base = machine_product(base, base)
    return Element(result, word, g.group)


def commutator(g: Element, h: Element) -> Element:
    """``[g, h] = g^-1 h^-1 g h``."""
    return compose(compose(inverse(g), inverse(h)), compose(g, h))


def conjugate(g: Element, h: Element) -> Element:
    """``h^-1 g h``."""
    return compose(compose(inverse(h), g), h)


def moved_word(g: ElementLike) -> Word | None:
    """Shortest word moved by ``g`` (lexicographically least among those), or None."""
    m = _as_machine(g)
    d = m.degree
    seen = {0}
    queue = deque([(0, ())])
    while queue:
        s, path = queue.popleft()
        perm = m.perms[s]
        for a in range(d):
            if perm[a] != a:
                return path + (a,)
        for a in range(d):
            t = m.succs[s][a]
            if t not in seen:
                seen.add(t)
                queue.append((t, path + (a,)))
    return None


def is_identity(g: ElementLike) -> tuple[bool, Word | None]:
    """Decide ``g == 1``; when false also return the shortest moved word."""
    m = _as_machine(g)
    if m.is_identity():
        return True, None
    w = moved_word(m)
    assert w is not None
    return False, w


def equals(g: Element, h: Element) -> bool:
    if g.degree != h.degree:
        raise ValueError("elements act on trees of different degree")
    return g.machine == h.machine


def minimize(g: ElementLike) -> ElementLike:
    m = _as_machine(g)
    c = canonical_machine(m.degree, m.perms, m.succs, 0)
    if isinstance(g, Element):
        return Element(c, g.word, g.group)
    return c


def raw_machine(degree, perms, succs) -> Machine:
    """Wrap a table without minimizing (for tests of ``minimize``)."""
    return Machine(degree, tuple(tuple(p) for p in perms), tuple(tuple(s) for s in succs))


# ---------------------------------------------------------------------------
# level structure


def check_level(degree: int, n: int, force: bool = False) -> None:
    if n < 0:
        raise ValueError("level must be nonnegative")
    if degree**n > LEVEL_CAP and not force:
        raise CapExceeded(f"level {n} has {degree}^{n} vertices, above the cap {LEVEL_CAP}")


def level_permutation(g: ElementLike, n: int, force: bool = False) -> Perm:
    """Permutation of level-``n`` vertices, indexed lexicographically."""
    m = _as_machine(g)
    d = m.degree
    check_level(d, n, force)
    # perms of all states at increasing depth, bottom-up
    tables = [[(0,)] * len(m)]
    for depth in range(1, n + 1):
        prev = tables[-1]
        block = d ** (depth - 1)
        cur = []
        for s in range(len(m)):
            perm, succ = m.perms[s], m.succs[s]
            out = [0] * (block * d)
            for a in range(d):
                sub = prev[succ[a]]
                base_in, base_out = a * block, perm[a] * block
                for r in range(block):
                    out[base_in + r] = base_out + sub[r]
            cur.append(tuple(out))
        tables.append(cur)
    return tables[n][0]


@dataclass
class LevelNormalForm:
    level: int
    perm: Perm
    sections: dict[Word, Element]

    def is_trivial_perm(self) -> bool:
        return all(i == x for i, x in enumerate(self.perm))

    def tuple_display(self) -> list[Element]:
        """Sections ordered as in ``(g|_{p^-1(0)}, ..., g|_{p^-1(last)}) p``."""
        inv = perm_inverse(self.perm)
        degree = round(len(self.perm) ** (1 / self.level)) if self.level else 1
        return [self.sections[index_word(inv[j], self.level, degree)] for j in range(len(self.perm))]


def level_normal_form(g: Element, n: int, force: bool = False) -> LevelNormalForm:
    d = g.degree
    check_level(d, n, force)
    perm = level_permutation(g, n, force)
    sections = {}
    for u in Alphabet(d).words(n):
        sections[u] = section(g, u)
    return LevelNormalForm(n, perm, sections)


def fixed_letter_graph(m: Machine) -> list[list[tuple[int, int]]]:
    """For each state, the (letter, successor) pairs with the letter fixed."""
    return [[(a, m.succs[s][a]) for a in range(m.degree) if m.perms[s][a] == a] for s in range(len(m))]


def fixes_ray(g: ElementLike, z: Ray) -> bool:
    """Whether ``g`` fixes the infinite word ``z`` (exact)."""
    m = _as_machine(g)
    s = 0
    seen = set()
    i = 0
    while True:
        key = (s, z.phase(i))
        if key in seen:
            return True
        seen.add(key)
        a = z.letter(i)
        if m.perms[s][a] != a:
            return False
        s = m.succs[s][a]
        i += 1


def states_along_ray(g: ElementLike, z: Ray, n: int) -> list[int]:
    m = _as_machine(g)
    s = 0
    out = [0]
    for i in range(n):
        s = m.succs[s][z.letter(i)]
        out.append(s)
    return out


def fixed_rays(g: ElementLike, preperiod_bound: int, period_bound: int) -> set[Ray]:
    """All canonical rays with preperiod <= P and period <= Q fixed by ``g``.

    Walks the state graph restricted to fixed letters: a preperiod path
    followed by a period path that returns to a previously seen
    (state, period-boundary) configuration.
    """
    m = _as_machine(g)
    graph = fixed_letter_graph(m)
    found: set[Ray] = set()

    def period_closes(start: int, period: Word) -> bool:
        s = start
        seen = set()
        while s not in seen:
            seen.add(s)
            for a in period:
                if m.perms[s][a] != a:
                    return False
                s = m.succs[s][a]
        return True

    def periods(start: int):
        stack = [(start, ())]
        while stack:
            s, word = stack.pop()
            if word and period_closes(start, word):
                yield word
            if len(word) < period_bound:
                for a, t in graph[s]:
                    stack.append((t, word + (a,)))

    def walk(s: int, pre: Word):
        for per in periods(s):
            z = Ray(pre, per)
            if len(z.preperiod) <= preperiod_bound and len(z.period) <= period_bound:
                found.add(z)
        if len(pre) < preperiod_bound:
            for a, t in graph[s]:
                walk(t, pre + (a,))

    walk(0, ())
    return found


def trivial_patch(m: Machine, state: int, avoid: Ray | None = None, max_length: int | None = None) -> Word | None:
    """Shortest (then least) word ``t`` with the state fixing ``t`` and trivial there.

    With ``avoid`` set, ``t`` must not be a prefix of that ray, so the
    cylinder below ``t`` misses it.
    """
    ident = m.identity_state
    if ident is None:
        return None
    if max_length is None:
        max_length = 2 * len(m) + 2
    graph = fixed_letter_graph(m)
    # configuration: (state, phase on avoid-ray or None once we left it)
    start = (state, 0 if avoid is not None else None)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (s, ph), path = queue.popleft()
        if s == ident and ph is None:
            return path
        if len(path) >= max_length:
            continue
        for a, t in graph[s]:
            if ph is not None and a == avoid.letter(ph):
                nph = avoid.phase(ph + 1)
            else:
                nph = None
            key = (t, nph)
            if key not in seen:
                seen.add(key)
                queue.append((key, path + (a,)))
    return None


def level_index(word: Sequence[int], degree: int) -> int:
    return word_index(word, degree)
