"""
The category I of finite sets n = {1, ..., n} and injections.

A morphism n -> m is an injective word (x1, ..., xn) of distinct values in
1..m. Elements of the monoid M never appear whole: every operation works on a
finite prefix, which is again an injective word.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import factorial
from threading import RLock
from typing import Iterator, List, Sequence, Tuple

from cachetools import LRUCache, cached

from core.errors import WordSyntaxError


@dataclass(frozen=True, eq=False)
class InjWord:
    """Injective word from n = len(values) to ``codomain``."""

    values: Tuple[int, ...]
    codomain: int

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.codomain < 0:
            raise ValueError(f"Negative codomain {self.codomain}")
        if len(set(values)) != len(values):
            raise ValueError(f"Word {values} repeats a value")
        for v in values:
            if not 1 <= v <= self.codomain:
                raise ValueError(f"Value {v} of {values} outside 1..{self.codomain}")

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return Perm(tuple(range(1, n + 1)), n)

    @property
    def source(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        return self.values[i - 1]

    def __len__(self) -> int:
        return len(self.values)

    def is_identity(self) -> bool:
        return self.source == self.codomain and all(v == i for i, v in enumerate(self.values, 1))

    def is_permutation(self) -> bool:
        return self.source == self.codomain

    def restrict(self, k: int) -> "InjWord":
        """Restriction to the first ``k`` elements of the source."""
        return make_word(self.values[:k], self.codomain)

    def extend_codomain(self, k: int = 1) -> "InjWord":
        return make_word(self.values, self.codomain + k)

    def filtration(self) -> int:
        return max(self.values, default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, InjWord):
            return NotImplemented
        return self.values == other.values and self.codomain == other.codomain

    def __hash__(self) -> int:
        return hash((self.values, self.codomain))

    def __lt__(self, other: "InjWord") -> bool:
        return (self.source, self.codomain, self.values) < (other.source, other.codomain, other.values)

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({format_word(self)!r})"


@dataclass(frozen=True, eq=False)
class Perm(InjWord):
    """Permutation of m, stored as an injective word m -> m."""

    def __post_init__(self):
        super().__post_init__()
        if len(self.values) != self.codomain:
            raise ValueError(f"{self.values} is not a permutation of 1..{self.codomain}")

    def inverse(self) -> "Perm":
        inv = [0] * self.codomain
        for i, v in enumerate(self.values, 1):
            inv[v - 1] = i
        return Perm(tuple(inv), self.codomain)


def make_word(values: Sequence[int], codomain: int) -> InjWord:
    """Build a word, as a Perm whenever it is a bijection."""
    values = tuple(values)
    if len(values) == codomain:
        return Perm(values, codomain)
    return InjWord(values, codomain)


# ============ CATEGORY STRUCTURE ============

def compose(g: InjWord, f: InjWord) -> InjWord:
    """``g o f``; the codomain of f must equal the source of g."""
    if f.codomain != g.source:
        raise ValueError(f"Cannot compose {g} after {f}: codomain {f.codomain} != source {g.source}")
    return make_word(tuple(g.values[x - 1] for x in f.values), g.codomain)


def direct_sum(a: InjWord, b: InjWord) -> InjWord:
    """Block sum a x b: b acts on the coordinates after a's."""
    return make_word(a.values + tuple(a.codomain + v for v in b.values), a.codomain + b.codomain)


def shift_word(w: InjWord) -> InjWord:
    """1 x w, fixing 1 and moving everything else up by one."""
    return direct_sum(InjWord.identity(1), w)


def times_one(w: InjWord) -> InjWord:
    """w x 1."""
    return direct_sum(w, InjWord.identity(1))


def d_prefix(n: int) -> InjWord:
    """Restriction of d(i) = i + 1 to n, as a word n -> n + 1."""
    return InjWord(tuple(range(2, n + 2)), n + 1)


def transposition(i: int, m: int) -> Perm:
    """Adjacent transposition s_i = (i i+1) in the symmetric group on m."""
    if not 1 <= i < m:
        raise ValueError(f"No adjacent transposition s_{i} on {m} letters")
    values = list(range(1, m + 1))
    values[i - 1], values[i] = values[i], values[i - 1]
    return Perm(tuple(values), m)


def complete_to_perm(w: InjWord) -> Perm:
    """Canonical permutation agreeing with ``w``: leftover targets are filled in increasing order."""
    used = set(w.values)
    rest = tuple(v for v in range(1, w.codomain + 1) if v not in used)
    return Perm(w.values + rest, w.codomain)


def sign(p: InjWord) -> int:
    if not p.is_permutation():
        raise ValueError(f"{p} is not a permutation")
    seen = [False] * p.codomain
    cycles = 0
    for start in range(p.codomain):
        if seen[start]:
            continue
        cycles += 1
        i = start
        while not seen[i]:
            seen[i] = True
            i = p.values[i] - 1
    return -1 if (p.codomain - cycles) % 2 else 1


def adjacent_word(p: InjWord) -> List[int]:
    """Indices [i1, ..., ik] with p = s_i1 o s_i2 o ... o s_ik.

    Found by bubble sort: each swap of positions j, j+1 multiplies by s_j on
    the right, so the product of the swaps in reverse order recovers p.
    """
    if not p.is_permutation():
        raise ValueError(f"{p} is not a permutation")
    values = list(p.values)
    swaps = []
    for end in range(len(values) - 1, 0, -1):
        for j in range(end):
            if values[j] > values[j + 1]:
                values[j], values[j + 1] = values[j + 1], values[j]
                swaps.append(j + 1)
    return swaps[::-1]


def num_injections(n: int, m: int) -> int:
    if n < 0 or m < 0:
        raise ValueError("Sizes must be non-negative")
    return factorial(m) // factorial(m - n) if n <= m else 0


@cached(cache=LRUCache(maxsize=512), lock=RLock())
def enumerate_inj(n: int, m: int) -> Tuple[InjWord, ...]:
    """All injective words n -> m in lexicographic order."""
    if n < 0 or m < 0:
        raise ValueError("Sizes must be non-negative")
    return tuple(make_word(v, m) for v in itertools.permutations(range(1, m + 1), n))


@cached(cache=LRUCache(maxsize=512), lock=RLock())
def word_index(n: int, m: int) -> dict:
    """Position of each word in ``enumerate_inj(n, m)``."""
    return {w: k for k, w in enumerate(enumerate_inj(n, m))}


# ============ NERVE CHAINS ============

@dataclass(frozen=True)
class Chain:
    """Composable arrows objects[0] -> objects[1] -> ... -> objects[p]."""

    objects: Tuple[int, ...]
    arrows: Tuple[InjWord, ...]

    @property
    def length(self) -> int:
        return len(self.arrows)

    @property
    def source(self) -> int:
        return self.objects[0]


def _arrows(a: int, b: int) -> Tuple[InjWord, ...]:
    words = enumerate_inj(a, b)
    if a == b:
        return tuple(w for w in words if not w.is_identity())
    return words


def count_chains(N: int, p: int) -> int:
    """Number of normalized p-chains among objects 0..N, without enumerating them."""
    counts = [1] * (N + 1)
    for _ in range(p):
        counts = [
            sum(counts[a] * (num_injections(a, b) - (1 if a == b else 0)) for a in range(b + 1))
            for b in range(N + 1)
        ]
    return sum(counts)


def iter_chains(N: int, p: int) -> Iterator[Chain]:
    if N < 0 or p < 0:
        raise ValueError("N and p must be non-negative")

    def extend(objects: Tuple[int, ...], arrows: Tuple[InjWord, ...]) -> Iterator[Chain]:
        if len(arrows) == p:
            yield Chain(objects, arrows)
            return
        a = objects[-1]
        for b in range(a, N + 1):
            for w in _arrows(a, b):
                yield from extend(objects + (b,), arrows + (w,))

    for n in range(N + 1):
        yield from extend((n,), ())


def enumerate_chains(N: int, p: int) -> List[Chain]:
    return list(iter_chains(N, p))


# ============ TEXT SYNTAX ============

_WORD_RE = re.compile(r"^\s*\(([^()]*)\)\s*@\s*(\d+)\s*$")
_ID_RE = re.compile(r"^\s*id\s*@\s*(\d+)\s*$")


def parse_word(text: str) -> InjWord:
    """Parse ``"(x1 x2 ... xn)@m"`` (commas allowed) or ``"id@n"``."""
    m = _ID_RE.match(text)
    if m:
        return InjWord.identity(int(m.group(1)))
    m = _WORD_RE.match(text)
    if not m:
        raise WordSyntaxError(f"Cannot parse word {text!r}; expected '(x1 x2 ...)@m' or 'id@n'")
    body = m.group(1).replace(",", " ").split()
    try:
        values = tuple(int(v) for v in body)
    except ValueError:
        raise WordSyntaxError(f"Non-integer entry in word {text!r}")
    try:
        return make_word(values, int(m.group(2)))
    except ValueError as e:
        raise WordSyntaxError(f"Invalid word {text!r}: {e}")


def format_word(w: InjWord) -> str:
    if w.is_identity():
        return f"id@{w.codomain}"
    return "(" + " ".join(str(v) for v in w.values) + f")@{w.codomain}"
