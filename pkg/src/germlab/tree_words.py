"""Finite words, eventually periodic rays and cylinders over a d-letter alphabet.

Vertices of the rooted d-ary tree are finite words (tuples of ints); the
boundary points we can name exactly are eventually periodic rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

Word = tuple[int, ...]

MAX_CLI_DEGREE = 36


@dataclass(frozen=True)
class Alphabet:
    degree: int

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError(f"alphabet degree must be >= 2, got {self.degree}")

    def check(self, word: Sequence[int]) -> Word:
        word = tuple(word)
        for a in word:
            if not 0 <= a < self.degree:
                raise ValueError(f"letter {a} outside alphabet of size {self.degree}")
        return word

    def words(self, length: int) -> Iterator[Word]:
        """All words of the given length in lexicographic order."""
        if length == 0:
            yield ()
            return
        for head in range(self.degree):
            for tail in self.words(length - 1):
                yield (head,) + tail


def parse_word(text: str, degree: int) -> Word:
    """Parse ``"0121"`` (d <= 10) or ``"11,3,0"`` (any d)."""
    text = text.strip()
    if not text:
        return ()
    if "," in text or degree > 10:
        letters = tuple(int(t) for t in text.split(",") if t.strip())
    else:
        if not text.isdigit():
            raise ValueError(f"bad word {text!r}")
        letters = tuple(int(c) for c in text)
    return Alphabet(degree).check(letters)


def format_word(word: Sequence[int], degree: int = 2) -> str:
    if degree > 10:
        return ",".join(str(a) for a in word)
    return "".join(str(a) for a in word)


def word_index(word: Sequence[int], degree: int) -> int:
    """Position of ``word`` among words of its length in lexicographic order."""
    i = 0
    for a in word:
        i = i * degree + a
    return i


def index_word(index: int, length: int, degree: int) -> Word:
    out = []
    for _ in range(length):
        index, a = divmod(index, degree)
        out.append(a)
    return tuple(reversed(out))


def _primitive_root(period: Word) -> Word:
    n = len(period)
    for p in range(1, n + 1):
        if n % p == 0 and period[:p] * (n // p) == period:
            return period[:p]
    return period


@dataclass(frozen=True)
class Ray:
    """The infinite word ``preperiod + period + period + ...``.

    Always stored in canonical form: the period is primitive and the
    preperiod is as short as possible (its last letter differs from the
    period's last letter), so equality of rays is equality of fields.
    """

    preperiod: Word
    period: Word

    def __post_init__(self):
        if not self.period:
            raise ValueError("ray period must be nonempty")
        pre, per = tuple(self.preperiod), _primitive_root(tuple(self.period))
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def constant(cls, letter: int) -> Ray:
        return cls((), (letter,))

    def letter(self, i: int) -> int:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def prefix(self, n: int) -> Word:
        return ray_prefix(self, n)

    def shift(self, n: int) -> Ray:
        """The ray with its first ``n`` letters removed."""
        if n <= len(self.preperiod):
            return Ray(self.preperiod[n:], self.period)
        k = (n - len(self.preperiod)) % len(self.period)
        return Ray((), self.period[k:] + self.period[:k])

    def phase(self, i: int) -> int:
        """Index identifying the suffix starting at position ``i``."""
        if i < len(self.preperiod):
            return i
        return len(self.preperiod) + (i - len(self.preperiod)) % len(self.period)

    def max_letter(self) -> int:
        return max(self.preperiod + self.period)

    def format(self, degree: int = 2) -> str:
        return f"{format_word(self.preperiod, degree)}({format_word(self.period, degree)})"

    def __str__(self):
        return self.format(self.max_letter() + 1 if self.max_letter() >= 10 else 2)


def parse_ray(text: str, degree: int) -> Ray:
    """Parse ``"01(10)"``; an empty preperiod is written ``"(1)"``."""
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ValueError(f"bad ray {text!r}; expected preperiod(period)")
    pre, per = text[:-1].split("(", 1)
    period = parse_word(per, degree)
    if not period:
        raise ValueError(f"bad ray {text!r}; empty period")
    return Ray(parse_word(pre, degree), period)


def ray_prefix(z: Ray, n: int) -> Word:
    if n < 0:
        raise ValueError("prefix length must be nonnegative")
    pre = z.preperiod
    if n <= len(pre):
        return pre[:n]
    rest = n - len(pre)
    reps = -(-rest // len(z.period))
    return pre + (z.period * reps)[:rest]


def common_prefix_length(z1: Ray, z2: Ray) -> int | None:
    """Length of the longest common prefix, or None when the rays are equal."""
    if z1 == z2:
        return None
    bound = max(len(z1.preperiod), len(z2.preperiod)) + math.lcm(len(z1.period), len(z2.period))
    for i in range(bound):
        if z1.letter(i) != z2.letter(i):
            return i
    raise AssertionError("distinct canonical rays agree beyond their joint period")


def boundary_metric(z1: Ray, z2: Ray, degree: int | None = None) -> Fraction:
    """Ultrametric ``2**-m`` with ``m`` the common-prefix length (0 if equal)."""
    if degree is not None:
        Alphabet(degree).check(z1.preperiod + z1.period)
        Alphabet(degree).check(z2.preperiod + z2.period)
    m = common_prefix_length(z1, z2)
    if m is None:
        return Fraction(0)
    return Fraction(1, 2**m)


@dataclass(frozen=True)
class Cylinder:
    """All rays extending ``base``."""

    base: Word

    def contains(self, z: Ray) -> bool:
        return ray_prefix(z, len(self.base)) == tuple(self.base)

    def contains_word(self, word: Sequence[int]) -> bool:
        return tuple(word[: len(self.base)]) == tuple(self.base) and len(word) >= len(self.base)


def cylinder_contains(c: Cylinder, z: Ray) -> bool:
    return c.contains(z)


def all_rays(degree: int, preperiod_bound: int, period_bound: int) -> Iterable[Ray]:
    """Every canonical ray with preperiod <= P and period <= Q, deduplicated."""
    alphabet = Alphabet(degree)
    seen = set()
    for q in range(1, period_bound + 1):
        for per in alphabet.words(q):
            for p in range(preperiod_bound + 1):
                for pre in alphabet.words(p):
                    z = Ray(pre, per)
                    if z not in seen:
                        seen.add(z)
                        yield z
