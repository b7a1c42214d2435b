"""Non-Hausdorff elements: certificates, their exact verification and search.

A certificate names an element ``g``, a fixed eventually periodic ray ``z``
and an affine patch schema.  At scale ``l`` the neighbourhood of ``z`` is the
cylinder ``W_l`` over the first ``n_l = a*l + b`` letters of ``z`` and the
patch is ``O_l``, the cylinder over that prefix followed by ``tail``.  The
certificate holds at scale ``l`` when ``g`` fixes the prefix, is nontrivial on
``W_l`` and is the identity on ``O_l``; all three are decided exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import wreath
from .groups import Group, GroupSpec, SpecError, resolve_group
from .tree_words import Ray, Word, format_word, parse_ray, parse_word, ray_prefix
from .wreath import Element, apply, fixed_rays, state_at, trivial_patch


@dataclass(frozen=True)
class PatchSchema:
    a: int
    b: int
    tail: Word

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("patch schema needs a >= 1 so that the neighbourhoods shrink")
        if self.a + self.b < 0:
            raise ValueError(f"prefix length at scale 1 is negative (a={self.a}, b={self.b})")
        if not self.tail:
            raise ValueError("patch tail must be nonempty")

    def prefix_length(self, level: int) -> int:
        return self.a * level + self.b


@dataclass
class NonHausdorffCertificate:
    group: Group
    g: Element
    z: Ray
    schema: PatchSchema
    depth: int = 30
    source: str = ""

    def patch(self, level: int) -> Word:
        return ray_prefix(self.z, self.schema.prefix_length(level)) + self.schema.tail

    def neighbourhood(self, level: int) -> Word:
        return ray_prefix(self.z, self.schema.prefix_length(level))


@dataclass
class LevelOutcome:
    level: int
    prefix_length: int
    fixed_prefix: bool
    germ_nontrivial: bool
    patch_trivial: bool

    @property
    def passed(self) -> bool:
        return self.fixed_prefix and self.germ_nontrivial and self.patch_trivial


@dataclass
class VerificationReport:
    levels: list[LevelOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.levels) and all(x.passed for x in self.levels)

    @property
    def verified_depth(self) -> int:
        n = 0
        for x in self.levels:
            if not x.passed:
                break
            n = x.level
        return n

    @property
    def first_failure(self) -> tuple[int, str] | None:
        for x in self.levels:
            if not x.fixed_prefix:
                return x.level, "fixed_prefix"
            if not x.germ_nontrivial:
                return x.level, "germ_nontrivial"
            if not x.patch_trivial:
                return x.level, "patch_trivial"
        return None

    def to_dict(self) -> dict:
        fail = self.first_failure
        return {
            "verdict": "pass" if self.passed else "fail",
            "verified_depth": self.verified_depth,
            "first_failure": None if fail is None else {"level": fail[0], "condition": fail[1]},
            "levels": [
                {
                    "level": x.level,
                    "prefix_length": x.prefix_length,
                    "fixed_prefix": x.fixed_prefix,
                    "germ_nontrivial": x.germ_nontrivial,
                    "patch_trivial": x.patch_trivial,
                }
                for x in self.levels
            ],
        }


def _check_schema(cert: NonHausdorffCertificate) -> None:
    d = cert.group.degree
    letters = cert.z.preperiod + cert.z.period + cert.schema.tail
    if max(letters) >= d:
        raise ValueError(f"certificate letters exceed alphabet of size {d}")
    for level in range(1, cert.depth + 1):
        n = cert.schema.prefix_length(level)
        if ray_prefix(cert.z.shift(n), len(cert.schema.tail)) == cert.schema.tail:
            raise ValueError(f"patch at scale {level} contains the ray itself")


def verify_certificate(cert: NonHausdorffCertificate, depth: int | None = None) -> VerificationReport:
    if depth is not None:
        cert = NonHausdorffCertificate(cert.group, cert.g, cert.z, cert.schema, depth, cert.source)
    _check_schema(cert)
    m = cert.g.machine
    ident = m.identity_state
    report = VerificationReport()
    for level in range(1, cert.depth + 1):
        n = cert.schema.prefix_length(level)
        p = ray_prefix(cert.z, n)
        fixed = apply(m, p) == p
        germ = state_at(m, p) != ident
        u = p + cert.schema.tail
        patch = apply(m, u) == u and state_at(m, u) == ident
        report.levels.append(LevelOutcome(level, n, fixed, germ, patch))
    return report


# ---------------------------------------------------------------------------
# the explicit constructions


def _flip(x: int) -> int:
    return 1 - x


def builtin_certificate(spec: GroupSpec | Group, which: str | int | None = None, depth: int = 30) -> NonHausdorffCertificate:
    """The explicit non-Hausdorff certificates of the K(w,v) and M(d) families.

    K(w,v) with |v| = 1 (needs |w| >= 2): ``a1`` at the constant ray on
    the letter of v.  K(w,v) with |v| >= 2: any ``a_i``, along the periodic
    pattern of v read backwards.  M(d), d >= 3: ``m_d`` at ``(d-1)^inf``.
    """
    G = spec if isinstance(spec, Group) else Group(spec)
    s = G.spec
    if s.family == "Kwv":
        y = [int(c) for c in s.params["w"]]
        x = [int(c) for c in s.params["v"]]
        k, n = len(y), len(x)
        if isinstance(which, str):
            if not which.startswith("a"):
                raise SpecError(f"no certificate construction for generator {which!r} of K(w,v)")
            which = int(which[1:])
        i = n if which is None else which
        if not 1 <= i <= n:
            raise SpecError(f"K(w,v) has generators a1..a{n}, got a{i}")
        if n == 1:
            if k < 2:
                raise SpecError("the |v| = 1 construction needs |w| >= 2 (it uses y_{k-1})")
            z = Ray((), (x[0],))
            schema = PatchSchema(1, -1, (_flip(x[0]), _flip(y[k - 2])))
            source = "lemma5.3"
        else:
            cycle = tuple(x[j] for j in range(n - 2, -1, -1)) + (x[n - 1],)
            tail = (_flip(x[n - 2]),)
            if i == n:
                z = Ray((), cycle)
                schema = PatchSchema(n, -n, tail)
            else:
                pre = tuple(x[j] for j in range(i - 2, -1, -1)) + (x[n - 1],)
                z = Ray(pre, cycle)
                schema = PatchSchema(n, i - n, tail)
            source = f"lemma5.5:a{i}"
        return NonHausdorffCertificate(G, G.gen(f"a{i}"), z, schema, depth, source)
    if s.family == "Md":
        d = s.params["d"]
        if d < 3:
            raise SpecError("no certificate construction for M(2); its Hausdorffness is an open question")
        if which not in (None, d, f"m{d}"):
            raise SpecError(f"the M(d) construction certifies m{d} only")
        z = Ray((), (d - 1,))
        return NonHausdorffCertificate(G, G.gen(f"m{d}"), z, PatchSchema(1, -1, (1, d - 1)), depth, "thm1.4")
    raise SpecError(f"no builtin certificate for family {s.family!r}")


def resolve_builtin_certificate(G: Group, name: str, depth: int = 30) -> NonHausdorffCertificate:
    """``lemma5.3``, ``lemma5.5:a<i>`` or ``thm1.4`` for the given group."""
    name = name.removeprefix("builtin:")
    fam = G.spec.family
    if name == "lemma5.3":
        if fam != "Kwv" or len(G.spec.params["v"]) != 1:
            raise SpecError("lemma5.3 applies to K(w,v) with |v| = 1")
        return builtin_certificate(G, "a1", depth)
    if name.startswith("lemma5.5"):
        if fam != "Kwv" or len(G.spec.params["v"]) < 2:
            raise SpecError("lemma5.5 applies to K(w,v) with |v| >= 2")
        _, _, gen = name.partition(":")
        return builtin_certificate(G, gen or None, depth)
    if name == "thm1.4":
        if fam != "Md":
            raise SpecError("thm1.4 applies to M(d)")
        return builtin_certificate(G, None, depth)
    raise SpecError(f"unknown builtin certificate {name!r}")


# ---------------------------------------------------------------------------
# documents


def certificate_document(cert: NonHausdorffCertificate) -> dict:
    d = cert.group.degree
    return {
        "group": f"builtin:{cert.group.spec.ref}" if cert.group.spec.ref != "custom" else "custom",
        "element": cert.group.name(cert.g),
        "ray": cert.z.format(d),
        "tail": format_word(cert.schema.tail, d),
        "prefix": {"a": cert.schema.a, "b": cert.schema.b},
        "depth": cert.depth,
    }


def load_certificate(doc: dict, G: Group | None = None) -> NonHausdorffCertificate:
    if G is None:
        G = Group(resolve_group(doc["group"]))
    d = G.degree
    try:
        schema = PatchSchema(int(doc["prefix"]["a"]), int(doc["prefix"]["b"]), parse_word(doc["tail"], d))
        return NonHausdorffCertificate(
            G, G.element(doc["element"]), parse_ray(doc["ray"], d), schema, int(doc.get("depth", 30))
        )
    except KeyError as exc:
        raise SpecError(f"certificate document lacks field {exc}") from exc


# ---------------------------------------------------------------------------
# search


def _ray_schema(g: Element, z: Ray) -> PatchSchema | None:
    """An affine schema for ``g`` along a ray it fixes, if the germ is nontrivial."""
    m = g.machine
    ident = m.identity_state
    first: dict[tuple[int, int], int] = {}
    states = []
    s, i = 0, 0
    while (s, z.phase(i)) not in first:
        if s == ident:
            return None
        first[(s, z.phase(i))] = i
        states.append(s)
        s = m.succs[s][z.letter(i)]
        i += 1
    mu = first[(s, z.phase(i))]
    lam = i - mu
    best = None
    for c in range(mu, mu + lam):
        t = trivial_patch(m, states[c], avoid=z.shift(c))
        if t is not None:
            key = (len(t), c, t)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    _, c, t = best
    return PatchSchema(lam, c - lam, t)


def certificates_for_element(
    G: Group, g: Element, preperiod_bound: int, period_bound: int, depth: int
) -> list[NonHausdorffCertificate]:
    out = []
    if g.machine.is_identity():
        return out
    for z in sorted(fixed_rays(g, preperiod_bound, period_bound), key=_ray_key):
        schema = _ray_schema(g, z)
        if schema is None:
            continue
        cert = NonHausdorffCertificate(G, g, z, schema, depth, "search")
        if verify_certificate(cert).passed:
            out.append(cert)
    return out


def _ray_key(z: Ray):
    return (len(z.preperiod) + len(z.period), len(z.period), z.preperiod, z.period)


def search_nonhausdorff(
    spec: GroupSpec | Group,
    word_bound: int = 1,
    preperiod_bound: int = 2,
    period_bound: int = 3,
    depth: int = 12,
) -> list[NonHausdorffCertificate]:
    """Certificates for elements of the ball of radius ``word_bound``, in canonical order."""
    G = spec if isinstance(spec, Group) else Group(spec)
    found = []
    for rank, g in enumerate(G.ball(word_bound)):
        for cert in certificates_for_element(G, g, preperiod_bound, period_bound, depth):
            found.append((rank, cert))
    found.sort(key=lambda rc: (rc[0], _ray_key(rc[1].z), rc[1].schema.a, rc[1].schema.b, rc[1].schema.tail))
    return [c for _, c in found]


def minimal_patches(g: Element, depth: int) -> list[Word]:
    """Vertices ``u`` (|u| <= depth) with ``g`` the identity on the cylinder at ``u`` but not at its parent."""
    m = g.machine
    ident = m.identity_state
    if ident is None or m.is_identity():
        return []
    graph = wreath.fixed_letter_graph(m)
    out = []
    stack = [(0, ())]
    while stack:
        s, u = stack.pop()
        if s == ident:
            out.append(u)
            continue
        if len(u) < depth:
            for a, t in reversed(graph[s]):
                stack.append((t, u + (a,)))
    return sorted(out, key=lambda w: (len(w), w))


def lqa_violation_search(spec: GroupSpec | Group, word_bound: int, depth: int) -> list[tuple[Element, Word, Word]]:
    """Triples ``(g, u, u0)``: ``g`` trivial on the cylinder at ``u`` but not on the larger one at ``u0``."""
    G = spec if isinstance(spec, Group) else Group(spec)
    out = []
    for g in G.ball(word_bound):
        for u in minimal_patches(g, depth):
            for k in range(len(u)):
                out.append((g, u, u[:k]))
    return out


def fixed_vertex_report(spec: GroupSpec | Group, word_bound: int, level: int) -> dict:
    """Per nontrivial ball element, how many level-n vertices it fixes."""
    G = spec if isinstance(spec, Group) else Group(spec)
    rows = []
    total = 0
    elements = [g for g in G.ball(word_bound) if not g.machine.is_identity()]
    for g in elements:
        n = count_fixed_vertices(g, level)
        rows.append({"element": g.label, "fixed": n})
        total += n
    denom = len(elements) * G.degree**level
    return {
        "level": level,
        "word_bound": word_bound,
        "rows": rows,
        "fixed_pairs": total,
        "fraction": (total / denom) if denom else 0.0,
    }


def count_fixed_vertices(g: Element, level: int) -> int:
    m = g.machine
    graph = wreath.fixed_letter_graph(m)
    counts = {0: 1}
    for _ in range(level):
        nxt: dict[int, int] = {}
        for s, c in counts.items():
            for _, t in graph[s]:
                nxt[t] = nxt.get(t, 0) + c
        counts = nxt
    return sum(counts.values())
