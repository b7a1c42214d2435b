"""Self-similar group specifications, the builtin families and their runtime form.

A :class:`GroupSpec` lists, for each generator, its root permutation and the
generator word of its section at every letter (slot ``i`` holds ``g|_i``).
:class:`Group` turns a spec into canonical machines and knows how to parse
element words, enumerate balls and name derived elements.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import wreath
from .tree_words import Alphabet, Word
from .wreath import (
    CapExceeded,
    Element,
    SectionOf,
    canonical_machine,
    check_perm,
    expr_expand,
    free_reduce,
    letters_to_expr,
    perm_inverse,
)

Letters = tuple[tuple[str, int], ...]

NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
WORD_STATE_CAP = 20_000


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorDef:
    perm: tuple[int, ...]
    sections: tuple[Letters, ...]


@dataclass
class GroupSpec:
    degree: int
    generators: dict[str, GeneratorDef]
    family: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return list(self.generators)

    def __eq__(self, other):
        if not isinstance(other, GroupSpec):
            return NotImplemented
        # the presentation decides equality; family tags are metadata
        return self.degree == other.degree and list(self.generators.items()) == list(other.generators.items())

    @property
    def ref(self) -> str:
        if self.family == "odometer":
            return "K()"
        if self.family == "Kv":
            return f"K({self.params['v']})"
        if self.family == "Kwv":
            return f"K({self.params['w']},{self.params['v']})"
        if self.family == "Md":
            return f"M({self.params['d']})"
        if self.family == "grigorchuk":
            return "grigorchuk"
        return "custom"


# ---------------------------------------------------------------------------
# word syntax

_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))(?:\^(-?\d+))?|([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?|(1)(?![0-9]))")


def parse_expr(text: str, names: Sequence[str] | None = None) -> tuple:
    """Parse ``"a1 a2^-1 (a1 a2)^16"`` into a formal word.

    Tokens are whitespace separated: ``name``, ``name^k`` or a parenthesized
    group ``( ... )^k``.  ``""`` and ``"1"`` denote the identity.
    """
    pos = 0
    stack: list[list] = [[]]
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SpecError(f"cannot parse element word {text!r} at position {pos}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise SpecError(f"unbalanced ')' in {text!r}")
            inner = tuple(stack.pop())
            k = int(m.group(3)) if m.group(3) else 1
            stack[-1].extend(wreath.expr_pow(inner, k))
        elif m.group(4):
            name = m.group(4)
            if names is not None and name not in names:
                raise SpecError(f"unknown generator {name!r} in {text!r}")
            k = int(m.group(5)) if m.group(5) else 1
            if k:
                stack[-1].append((name, k))
        # "1" contributes nothing
    if len(stack) != 1:
        raise SpecError(f"unbalanced '(' in {text!r}")
    word: tuple = ()
    for tok in stack[0]:
        word = wreath.expr_mul(word, (tok,))
    return word


def parse_letters(text: str, names: Sequence[str] | None = None) -> Letters:
    word = parse_expr(text, names)
    flat = expr_expand(word)
    if flat is None:
        raise SpecError(f"word {text!r} too long to expand")
    return free_reduce(flat)


def format_letters(letters: Letters) -> str:
    if not letters:
        return ""
    return wreath.format_expr(letters_to_expr(letters))


# ---------------------------------------------------------------------------
# builders


def _from_display(perm: Sequence[int], display: Sequence[str]) -> tuple[Letters, ...]:
    """Convert a tuple written as ``(g|_{p^-1(0)}, ..., g|_{p^-1(d-1)}) p`` to slot order."""
    return tuple(parse_letters(display[perm[i]]) for i in range(len(perm)))


def _gen(perm, sections_by_slot) -> GeneratorDef:
    return GeneratorDef(tuple(perm), tuple(parse_letters(s) for s in sections_by_slot))


def _binary_word(v: str, what: str) -> str:
    if any(c not in "01" for c in v):
        raise SpecError(f"{what} must be a word over {{0,1}}, got {v!r}")
    return v


SIGMA = (1, 0)
TRIVIAL2 = (0, 1)


def _chain(prefix: str, letters: str, n: int, gens: dict) -> None:
    """``prefix_{i+1} = (prefix_i, 1)`` if letter i is 0 else ``(1, prefix_i)``."""
    for i in range(1, n):
        prev = f"{prefix}{i}"
        slots = (prev, "") if letters[i - 1] == "0" else ("", prev)
        gens[f"{prefix}{i + 1}"] = _gen(TRIVIAL2, slots)


def build_Kv(v: str) -> GroupSpec:
    """Generators ``a1 = (a_n, 1) sigma`` and ``a_{i+1} = (a_i, 1) | (1, a_i)``."""
    v = _binary_word(v, "v")
    n = len(v) + 1
    gens: dict[str, GeneratorDef] = {}
    gens["a1"] = GeneratorDef(SIGMA, _from_display(SIGMA, (f"a{n}", "")))
    _chain("a", v, n, gens)
    if not v:
        return GroupSpec(2, gens, "odometer", {"v": ""})
    return GroupSpec(2, gens, "Kv", {"v": v})


def build_Kwv(w: str, v: str) -> GroupSpec:
    w = _binary_word(w, "w")
    v = _binary_word(v, "v")
    if not w or not v:
        raise SpecError("K(w,v) needs nonempty w and v")
    if w[-1] == v[-1]:
        raise SpecError(
            f"K({w},{v}) rejected: the last letter of w must differ from the last letter of v "
            "(such that y_k != x_n)"
        )
    k, n = len(w), len(v)
    gens: dict[str, GeneratorDef] = {}
    gens["b1"] = _gen(SIGMA, ("", ""))
    _chain("b", w, k, gens)
    if w[-1] == "0":
        a1 = _gen(TRIVIAL2, (f"b{k}", f"a{n}"))
    else:
        a1 = _gen(TRIVIAL2, (f"a{n}", f"b{k}"))
    gens["a1"] = a1
    _chain("a", v, n, gens)
    return GroupSpec(2, gens, "Kwv", {"w": w, "v": v})


def build_Md(d: int) -> GroupSpec:
    """``m_i`` cycles ``0..d-i`` with section ``m_i`` at slot ``d-i``; ``m_d = (m_1..m_d)``."""
    if d < 2:
        raise SpecError(f"M(d) needs d >= 2, got {d}")
    gens: dict[str, GeneratorDef] = {}
    for i in range(1, d):
        top = d - i
        perm = list(range(d))
        for j in range(top):
            perm[j] = j + 1
        perm[top] = 0
        slots = [""] * d
        slots[top] = f"m{i}"
        gens[f"m{i}"] = _gen(perm, slots)
    gens[f"m{d}"] = _gen(range(d), [f"m{j}" for j in range(1, d + 1)])
    return GroupSpec(d, gens, "Md", {"d": d})


def build_grigorchuk() -> GroupSpec:
    gens = {
        "a": _gen(SIGMA, ("", "")),
        "b": _gen(TRIVIAL2, ("a", "c")),
        "c": _gen(TRIVIAL2, ("a", "d")),
        "d": _gen(TRIVIAL2, ("", "b")),
    }
    return GroupSpec(2, gens, "grigorchuk", {})


_BUILTIN_RE = re.compile(r"^(K|M)\(([^)]*)\)$")


def builtin_group(name: str) -> GroupSpec:
    """Resolve ``K(v)``, ``K(w,v)``, ``K()``, ``M(d)``, ``odometer``, ``grigorchuk``."""
    name = name.strip()
    if name.startswith("builtin:"):
        name = name[len("builtin:"):]
    if name == "odometer":
        return build_Kv("")
    if name == "grigorchuk":
        return build_grigorchuk()
    m = _BUILTIN_RE.match(name)
    if not m:
        raise SpecError(f"unknown builtin group {name!r}")
    kind, args = m.group(1), m.group(2).replace(" ", "")
    if kind == "M":
        try:
            return build_Md(int(args))
        except ValueError as exc:
            raise SpecError(f"bad M(d) parameter {args!r}") from exc
    if "," in args:
        w, v = args.split(",", 1)
        return build_Kwv(w, v)
    return build_Kv(args)


# ---------------------------------------------------------------------------
# documents


def dump_spec(spec: GroupSpec) -> dict:
    return {
        "degree": spec.degree,
        "generators": {
            name: {"perm": list(g.perm), "sections": [format_letters(s) for s in g.sections]}
            for name, g in spec.generators.items()
        },
        "family": spec.family,
        "params": dict(spec.params),
    }


def load_spec(document: dict | str) -> GroupSpec:
    """Validate a group document (dict or JSON text) into a GroupSpec."""
    if isinstance(document, str):
        document = json.loads(document)
    if not isinstance(document, dict):
        raise SpecError("group document must be a JSON object")
    degree = document.get("degree")
    if not isinstance(degree, int) or degree < 2:
        raise SpecError(f"degree must be an integer >= 2, got {degree!r}")
    raw = document.get("generators")
    if not isinstance(raw, dict) or not raw:
        raise SpecError("generators must be a nonempty object")
    names = list(raw)
    for name in names:
        if not NAME_RE.match(name):
            raise SpecError(f"bad generator name {name!r}")
    gens: dict[str, GeneratorDef] = {}
    unknown: set[str] = set()
    for name, body in raw.items():
        perm = body.get("perm")
        sections = body.get("sections")
        if not isinstance(perm, list):
            raise SpecError(f"generator {name}: perm must be a list")
        try:
            perm = check_perm(perm, degree)
        except ValueError as exc:
            raise SpecError(f"generator {name}: {exc}") from exc
        if not isinstance(sections, list) or len(sections) != degree:
            raise SpecError(f"generator {name}: expected {degree} section words (degree mismatch)")
        parsed = []
        for s in sections:
            letters = parse_letters(str(s))
            unknown.update(x for x, _ in letters if x not in raw)
            parsed.append(letters)
        gens[name] = GeneratorDef(perm, tuple(parsed))
    if unknown:
        raise SpecError(f"section words reference undeclared generators: {', '.join(sorted(unknown))}")
    return GroupSpec(degree, gens, document.get("family", "custom"), dict(document.get("params", {})))


def resolve_group(ref: str) -> GroupSpec:
    """A ``builtin:NAME`` reference or a path to a JSON group document."""
    if ref.startswith("builtin:"):
        return builtin_group(ref)
    with open(ref) as fh:
        return load_spec(json.load(fh))


# ---------------------------------------------------------------------------
# runtime group


def word_action(spec: GroupSpec, letters: Letters, a: int) -> tuple[int, Letters]:
    """Image of letter ``a`` under a generator word and the section word there."""
    secs: list[Letters] = []
    for name, e in reversed(letters):
        g = spec.generators[name]
        if e > 0:
            secs.append(g.sections[a])
            a = g.perm[a]
        else:
            b = perm_inverse(g.perm)[a]
            secs.append(tuple((x, -y) for x, y in reversed(g.sections[b])))
            a = b
    flat: list[tuple[str, int]] = []
    for s in reversed(secs):
        flat.extend(s)
    return a, free_reduce(flat)


def word_section(spec: GroupSpec, letters: Letters, vertex: Sequence[int]) -> Letters:
    for a in vertex:
        _, letters = word_action(spec, letters, a)
    return letters


class Group:
    """Runtime form of a GroupSpec: canonical generator elements and helpers."""

    def __init__(self, spec: GroupSpec, name_radius: int = 3, name_cap: int = 4000):
        self.spec = spec
        self.degree = spec.degree
        self.alphabet = Alphabet(spec.degree)
        self._name_radius = name_radius
        self._name_cap = name_cap
        self._names: dict[wreath.Machine, tuple] | None = None
        self.gens: dict[str, Element] = {}
        self._build()
        self.identity = wreath.identity(self.degree, self)

    def _build(self):
        spec = self.spec
        index: dict[Letters, int] = {}
        order: list[Letters] = []
        for name in spec.generators:
            w = ((name, 1),)
            index[w] = len(order)
            order.append(w)
        perms, succs = [], []
        i = 0
        while i < len(order):
            w = order[i]
            i += 1
            perm, row = [], []
            for a in range(self.degree):
                b, sec = word_action(spec, w, a)
                perm.append(b)
                if sec not in index:
                    if len(order) >= WORD_STATE_CAP:
                        raise CapExceeded(
                            f"generator recursions exceed {WORD_STATE_CAP} word states; not finite-state within cap"
                        )
                    index[sec] = len(order)
                    order.append(sec)
                row.append(index[sec])
            perms.append(tuple(perm))
            succs.append(tuple(row))
        for name in spec.generators:
            m = canonical_machine(self.degree, perms, succs, index[((name, 1),)])
            self.gens[name] = Element(m, ((name, 1),), self)

    @property
    def names(self) -> list[str]:
        return self.spec.names

    def gen(self, name: str) -> Element:
        return self.gens[name]

    @property
    def symbols(self) -> list[Element]:
        """Generators and their inverses in canonical order ``g1, g1^-1, g2, ...``."""
        out = []
        for name, g in self.gens.items():
            out.append(g)
            out.append(wreath.inverse(g))
        return out

    def element(self, text: str | tuple) -> Element:
        word = parse_expr(text, self.names) if isinstance(text, str) else text
        return self.evaluate(word)

    def evaluate(self, word: tuple) -> Element:
        out = self.identity
        for base, e in word:
            if isinstance(base, str):
                x = self.gens[base]
            elif isinstance(base, SectionOf):
                x = wreath.section(self.evaluate(base.word), base.vertex)
            else:
                x = self.evaluate(base)
            out = wreath.compose(out, wreath.power(x, e))
        return out.named(word)

    def ball(self, radius: int, cap: int | None = None) -> list[Element]:
        """Distinct elements of word length <= radius, each named by its shortlex-least word."""
        seen = {self.identity.machine}
        layer = [self.identity]
        out = [self.identity]
        syms = self.symbols
        for _ in range(radius):
            nxt = []
            for x in layer:
                for s in syms:
                    y = wreath.compose(x, s)
                    if y.machine not in seen:
                        seen.add(y.machine)
                        nxt.append(y)
                        out.append(y)
                        if cap is not None and len(out) > cap:
                            raise CapExceeded(f"ball of radius {radius} exceeds {cap} elements")
            layer = nxt
        return out

    def _name_table(self) -> dict:
        if self._names is None:
            names: dict = {}
            try:
                ball = self.ball(self._name_radius, self._name_cap)
            except CapExceeded:
                ball = self.ball(max(self._name_radius - 1, 1), None)
            for x in ball:
                names.setdefault(x.machine, x.word)
            self._names = names
        return self._names

    def describe(self, g: Element) -> Element:
        """``g`` relabelled with a short generator word when one is known."""
        word = self._name_table().get(g.machine)
        if word is not None:
            return g.named(word)
        return g

    def name(self, g: Element) -> str:
        return self.describe(g).label

    def section_element(self, g: Element, w: Word, machine: wreath.Machine) -> Element:
        known = self._name_table().get(machine)
        if known is not None:
            return Element(machine, known, self)
        flat = expr_expand(g.word, limit=4000)
        if flat is not None:
            sec = word_section(self.spec, free_reduce(flat), w)
            if len(sec) <= 60:
                return Element(machine, letters_to_expr(sec), self)
        return Element(machine, ((SectionOf(g.word, tuple(w), self.degree), 1),), self)


def group(spec_or_ref: GroupSpec | str) -> Group:
    if isinstance(spec_or_ref, str):
        spec_or_ref = resolve_group(spec_or_ref)
    return Group(spec_or_ref)
