"""
Truncated I-functors as concrete tame M-modules.

A ``TruncIFunctor`` stores groups F(0..N), the adjacent transpositions of each
symmetric group acting on F(n), and stabilization maps iota: F(n) -> F(n+1).
The colimit along iota is the tame module; every verdict about it is bounded
by the truncation level N and says so.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.errors import (
    FiltrationNotVerifiedError,
    InvalidActionError,
    InvalidFunctorError,
    TruncationExceededError,
)
from core.exactalg import FgAbGroup, GroupElement, GroupHom
from core.functor_validator import FunctorValidator
from core.injcat import (
    InjWord,
    Perm,
    adjacent_word,
    complete_to_perm,
    compose,
    d_prefix,
    enumerate_inj,
    sign,
    transposition,
)
from core.intmatrix import IntMatrix

logger = logging.getLogger(__name__)


def block_matrix(nrows: int, ncols: int, blocks: Sequence[Tuple[int, int, IntMatrix]]) -> IntMatrix:
    """Assemble ``(row_offset, col_offset, block)`` placements into one matrix."""
    return IntMatrix(
        nrows, ncols, ((r + i, c + j, v) for r, c, b in blocks for i, j, v in b.triplets())
    )


# ============ FUNCTORS ============

@dataclass(frozen=True, eq=False)
class TruncIFunctor:
    """Functor on finite sets 0..N and injections, given on generators.

    ``transpositions[(n, i)]`` is s_i acting on F(n) for 2 <= n <= N and
    1 <= i < n; ``stab[n]`` maps F(n) to F(n+1).
    """

    N: int
    levels: Tuple[FgAbGroup, ...]
    transpositions: Mapping[Tuple[int, int], GroupHom]
    stab: Tuple[GroupHom, ...]
    grade: int = 0
    name: str = ""
    labels: Optional[Tuple[Tuple[str, ...], ...]] = None
    _cache: Dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "stab", tuple(self.stab))
        object.__setattr__(self, "transpositions", dict(self.transpositions))
        if self.N < 0:
            raise InvalidFunctorError(f"Negative truncation {self.N}", {"relation": "structure"})
        if len(self.levels) != self.N + 1:
            raise InvalidFunctorError(
                f"Truncation {self.N} needs {self.N + 1} levels, got {len(self.levels)}", {"relation": "structure"}
            )
        if len(self.stab) != self.N:
            raise InvalidFunctorError(
                f"Truncation {self.N} needs {self.N} stabilization maps, got {len(self.stab)}",
                {"relation": "structure"},
            )
        for n in range(2, self.N + 1):
            for i in range(1, n):
                if (n, i) not in self.transpositions:
                    raise InvalidFunctorError(
                        f"Missing transposition s_{i} at level {n}", {"relation": "structure", "level_n": n}
                    )
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(tuple(level) for level in self.labels))

    # --------------------------- Access ---------------------------
    def level(self, n: int) -> FgAbGroup:
        if not 0 <= n <= self.N:
            raise TruncationExceededError(f"Level {n} outside the truncation 0..{self.N} of {self.display_name}")
        return self.levels[n]

    def transposition(self, n: int, i: int) -> GroupHom:
        return self.transpositions[(n, i)]

    @property
    def display_name(self) -> str:
        return self.name or "F"

    def label(self, n: int, j: int) -> str:
        if self.labels is not None:
            return self.labels[n][j]
        return f"g{j}"

    def ranks(self) -> List[Tuple[int, Tuple[int, ...]]]:
        return [g.decompose() for g in self.levels]

    def renamed(self, name: str) -> "TruncIFunctor":
        return TruncIFunctor(self.N, self.levels, self.transpositions, self.stab, self.grade, name, self.labels)

    def with_grade(self, grade: int) -> "TruncIFunctor":
        return TruncIFunctor(self.N, self.levels, self.transpositions, self.stab, grade, self.name, self.labels)

    # --------------------------- Validation ---------------------------
    def validate(self) -> dict:
        report = self._cache.get("report")
        if report is None:
            report = FunctorValidator(self).validate_all()
            self._cache["report"] = report
        return report

    @property
    def is_valid(self) -> bool:
        return self.validate()["valid"]

    def require_valid(self) -> "TruncIFunctor":
        report = self.validate()
        if not report["valid"]:
            v = report["first_violation"]
            raise InvalidFunctorError(f"{self.display_name} is not an I-functor: {v['message']}", v)
        return self

    # --------------------------- Derived maps ---------------------------
    def perm_action(self, p: Perm) -> GroupHom:
        """gamma_* on F(m), built from the stored adjacent transpositions."""
        key = ("perm", p.values)
        hom = self._cache.get(key)
        if hom is None:
            m = p.codomain
            hom = GroupHom.identity(self.level(m))
            for i in adjacent_word(p):
                hom = hom.compose(self.transposition(m, i))
            self._cache[key] = hom
        return hom

    def iota(self, n: int, m: int) -> GroupHom:
        """Iterated stabilization F(n) -> F(m)."""
        if m > self.N:
            raise TruncationExceededError(f"Level {m} exceeds truncation {self.N}")
        if m < n:
            raise ValueError(f"Cannot stabilize from level {n} down to {m}")
        key = ("iota", n, m)
        hom = self._cache.get(key)
        if hom is None:
            hom = GroupHom.identity(self.level(n)) if m == n else self.stab[m - 1].compose(self.iota(n, m - 1))
            self._cache[key] = hom
        return hom

    def morphism(self, alpha: InjWord) -> GroupHom:
        """alpha_* = gamma_* o iota^(m-n) with gamma the canonical completion of alpha."""
        if alpha.codomain > self.N:
            raise TruncationExceededError(
                f"Word {alpha} needs level {alpha.codomain} but {self.display_name} is truncated at {self.N}"
            )
        key = ("mor", alpha.values, alpha.codomain)
        hom = self._cache.get(key)
        if hom is None:
            hom = self.perm_action(complete_to_perm(alpha)).compose(self.iota(alpha.source, alpha.codomain))
            self._cache[key] = hom
        return hom

    # --------------------------- Elements ---------------------------
    def element(self, level: int, coefficients: Sequence[int]) -> "ColimElement":
        return ColimElement(self, level, self.level(level).element(coefficients))

    def generator_element(self, level: int, j: int) -> "ColimElement":
        return ColimElement(self, level, self.level(level).generator(j))

    def element_by_label(self, level: int, label: str) -> "ColimElement":
        if self.labels is None or label not in self.labels[level]:
            raise ValueError(f"No generator labelled {label!r} at level {level} of {self.display_name}")
        return self.generator_element(level, self.labels[level].index(label))


@dataclass(frozen=True, eq=False)
class ColimElement:
    """Class [x @ level] in the colimit along iota."""

    parent: TruncIFunctor
    level: int
    value: GroupElement

    def push(self, m: int) -> "ColimElement":
        if m == self.level:
            return self
        return ColimElement(self.parent, m, self.parent.iota(self.level, m)(self.value))

    def is_zero_at(self, m: int) -> bool:
        return self.push(m).value.is_zero()

    def __add__(self, other: "ColimElement") -> "ColimElement":
        if other.parent is not self.parent:
            raise ValueError("Elements of different functors")
        m = max(self.level, other.level)
        return ColimElement(self.parent, m, self.push(m).value + other.push(m).value)

    def scaled(self, k: int) -> "ColimElement":
        return ColimElement(self.parent, self.level, k * self.value)

    def describe(self) -> str:
        terms = []
        for j, c in enumerate(self.value.coefficients):
            if not c:
                continue
            lab = self.parent.label(self.level, j)
            terms.append(lab if c == 1 else f"-{lab}" if c == -1 else f"{c}*{lab}")
        body = " + ".join(terms).replace("+ -", "- ") if terms else "0"
        return f"[{body} @ {self.level}]"

    def __repr__(self) -> str:
        return f"ColimElement{self.describe()}"


@dataclass(frozen=True)
class Verdict:
    """Answer of a bounded check; ``witness`` is set when the answer is negative."""

    holds: bool
    bound: int
    witness: Optional[dict] = None
    value: Optional[int] = None
    determined: bool = True
    interval: Optional[Tuple[int, int]] = None

    def to_dict(self) -> dict:
        out = {"holds": self.holds, "bound": self.bound, "witness": self.witness, "value": self.value,
               "determined": self.determined}
        if self.interval is not None:
            out["interval"] = list(self.interval)
        return out


@dataclass(frozen=True)
class EqualityVerdict:
    equal: bool
    level: Optional[int]
    bound: int

    @property
    def verdict(self) -> str:
        return f"equal_at_level_{self.level}" if self.equal else f"distinct_up_to_{self.bound}"


# ============ BASIC OPERATIONS ============

def validate(F: TruncIFunctor) -> dict:
    return F.validate()


def act(alpha: InjWord, x: ColimElement) -> ColimElement:
    """alpha_* x for alpha: n -> m and x an element of F(n)."""
    F = x.parent.require_valid()
    if alpha.source != x.level:
        raise ValueError(f"Word {alpha} starts at {alpha.source}, element lives at level {x.level}")
    return ColimElement(F, alpha.codomain, F.morphism(alpha)(x.value))


def m_act(f_prefix: InjWord, e: ColimElement) -> ColimElement:
    """Action of any f in M whose restriction to n is ``f_prefix``; e is first pushed to level n."""
    if e.level > f_prefix.source:
        raise ValueError(
            f"Prefix {f_prefix} covers {f_prefix.source} points but the element lives at level {e.level}"
        )
    return act(f_prefix, e.push(f_prefix.source))


def eq_up_to(e1: ColimElement, e2: ColimElement) -> EqualityVerdict:
    if e1.parent is not e2.parent:
        raise ValueError("Elements of different functors")
    F = e1.parent
    start = max(e1.level, e2.level)
    for m in range(start, F.N + 1):
        if (e1.push(m).value - e2.push(m).value).is_zero():
            return EqualityVerdict(True, m, F.N)
    return EqualityVerdict(False, None, F.N)


def _moving_transpositions(e: ColimElement) -> List[int]:
    """Indices j with s_j moving the image of e at the top level."""
    F = e.parent.require_valid()
    top = e.push(F.N)
    moved = []
    for j in range(1, F.N):
        if not (F.transposition(F.N, j)(top.value) - top.value).is_zero():
            moved.append(j)
    return moved


def representing_level(e: ColimElement) -> int:
    """Least m such that the class of e comes from F(m); an upper bound for its filtration."""
    F = e.parent
    top = e.push(F.N).value
    for m in range(e.level):
        if F.iota(m, F.N).preimage(top) is not None:
            return m
    return e.level


def _filtration_bounds(e: ColimElement) -> Tuple[List[int], int]:
    """Moving transpositions at level N, and the representing level.

    Every s_j with j < N is tested, so the filtration is exact unless the
    element is only represented at level N, where s_N would need level N + 1.
    """
    return _moving_transpositions(e), representing_level(e)


def filtration_le(e: ColimElement, k: int) -> Verdict:
    """Whether every s_j with j > k fixes e; undetermined when only s_N is left untested."""
    if k < 0:
        raise ValueError("Filtration bound must be non-negative")
    N = e.parent.N
    moved, upper = _filtration_bounds(e)
    over = [j for j in moved if j > k]
    if over:
        return Verdict(False, N, {"transposition": over[-1], "level": N})
    if k >= upper or upper < N:
        return Verdict(True, N)
    return Verdict(False, N, {"transposition": N, "level": N + 1}, determined=False, interval=(max(moved, default=0), N))


def exact_filtration(e: ColimElement) -> Verdict:
    """Least k with ``filtration_le(e, k)``; the witness is s_k itself when k > 0.

    An element represented only at level N gets ``determined=False`` and the
    interval its filtration lies in, with ``value`` left unset.
    """
    N = e.parent.N
    moved, upper = _filtration_bounds(e)
    k = max(moved, default=0)
    if upper == N and N >= 1:
        return Verdict(False, N, {"transposition": N, "level": N + 1}, determined=False, interval=(k, N))
    witness = {"transposition": k, "level": N} if k else None
    return Verdict(True, N, witness, value=k)


def require_filtration(e: ColimElement, k: int) -> None:
    verdict = filtration_le(e, k)
    if verdict.holds:
        return
    if not verdict.determined:
        raise FiltrationNotVerifiedError(
            f"Filtration of {e.describe()} lies in {list(verdict.interval)}; "
            f"<= {k} cannot be decided at truncation {e.parent.N}"
        )
    raise FiltrationNotVerifiedError(f"{e.describe()} does not have filtration <= {k} up to level {e.parent.N}")


def is_semistable_up_to(F: TruncIFunctor) -> Verdict:
    """Trivial M-action test on generators of levels n <= N-2, pushed to level N."""
    F.require_valid()
    N = F.N
    for n in range(0, N - 1):
        push = F.iota(n, N)
        for j in range(F.level(n).num_generators):
            x = push(F.level(n).generator(j))
            for i in range(1, N):
                if not (F.transposition(N, i)(x) - x).is_zero():
                    return Verdict(False, N, {"level": n, "generator": j, "label": F.label(n, j),
                                              "transposition": i})
    return Verdict(True, N)


def check_d_surjective_up_to(F: TruncIFunctor) -> Verdict:
    """Whether iota(F(N-1)) lies in the image of d: F(N-1) -> F(N)."""
    F.require_valid()
    N = F.N
    if N < 1:
        return Verdict(True, N)
    d = F.morphism(d_prefix(N - 1))
    iota = F.stab[N - 1]
    for j in range(F.level(N - 1).num_generators):
        if d.preimage(iota(F.level(N - 1).generator(j))) is None:
            return Verdict(False, N, {"level": N - 1, "generator": j, "label": F.label(N - 1, j)})
    return Verdict(True, N)


# ============ CONSTRUCTORS ============

def constant_functor(A: FgAbGroup, N: int, name: str = "") -> TruncIFunctor:
    ident = GroupHom.identity(A)
    return TruncIFunctor(
        N,
        [A] * (N + 1),
        {(n, i): ident for n in range(2, N + 1) for i in range(1, n)},
        [ident] * N,
        name=name or str(A),
    )


def zero_functor(N: int) -> TruncIFunctor:
    return constant_functor(FgAbGroup.trivial(), N, name="0")


def restrict(F: TruncIFunctor, N: int) -> TruncIFunctor:
    """Lower the truncation to N."""
    if N > F.N or N < 0:
        raise TruncationExceededError(f"Cannot restrict truncation {F.N} to {N}")
    return TruncIFunctor(
        N,
        F.levels[: N + 1],
        {k: v for k, v in F.transpositions.items() if k[0] <= N},
        F.stab[:N],
        F.grade,
        F.name,
        F.labels[: N + 1] if F.labels is not None else None,
    )


def direct_sum(*functors: TruncIFunctor) -> TruncIFunctor:
    if not functors:
        raise ValueError("direct_sum needs at least one functor")
    N = functors[0].N
    if any(F.N != N for F in functors):
        raise ValueError("Direct summands must share the truncation level")
    levels = [FgAbGroup.direct_sum([F.levels[n] for F in functors]) for n in range(N + 1)]
    trans = {
        key: GroupHom.direct_sum(*(F.transpositions[key] for F in functors)) for key in functors[0].transpositions
    }
    stab = [GroupHom.direct_sum(*(F.stab[n] for F in functors)) for n in range(N)]
    labels = None
    if all(F.labels is not None for F in functors) and len(functors) > 1:
        labels = [
            tuple(f"{k}:{lab}" for k, F in enumerate(functors) for lab in F.labels[n]) for n in range(N + 1)
        ]
    elif len(functors) == 1:
        labels = functors[0].labels
    return TruncIFunctor(N, levels, trans, stab, functors[0].grade, " + ".join(F.display_name for F in functors), labels)


def truncate_above(F: TruncIFunctor, i: int) -> TruncIFunctor:
    """Zero every level above i; the colimit becomes trivial."""
    if not 0 <= i <= F.N:
        raise ValueError(f"Truncation point {i} outside 0..{F.N}")
    zero = FgAbGroup.trivial()
    levels = [F.levels[n] if n <= i else zero for n in range(F.N + 1)]
    trans = {
        (n, j): F.transpositions[(n, j)] if n <= i else GroupHom.identity(zero) for (n, j) in F.transpositions
    }
    stab = [F.stab[n] if n < i else GroupHom.zero(levels[n], levels[n + 1]) for n in range(F.N)]
    labels = None
    if F.labels is not None:
        labels = [F.labels[n] if n <= i else () for n in range(F.N + 1)]
    return TruncIFunctor(F.N, levels, trans, stab, F.grade, f"trunc({F.display_name},{i})", labels)


def tensor_with_group(F: TruncIFunctor, A: FgAbGroup) -> TruncIFunctor:
    """Levelwise F(n) (x) A with the action on the first factor."""
    h = A.num_generators
    eye = IntMatrix.identity(h)
    levels = [G.tensor(A) for G in F.levels]

    def lift(hom: GroupHom, n_src: int, n_tgt: int) -> GroupHom:
        return GroupHom(levels[n_src], levels[n_tgt], hom.matrix.kron(eye), check=False)

    trans = {(n, i): lift(s, n, n) for (n, i), s in F.transpositions.items()}
    stab = [lift(s, n, n + 1) for n, s in enumerate(F.stab)]
    labels = None
    if F.labels is not None:
        labels = [tuple(f"{lab}x{k}" if h > 1 else lab for lab in F.labels[n] for k in range(h))
                  for n in range(F.N + 1)]
    return TruncIFunctor(F.N, levels, trans, stab, F.grade, f"{F.display_name} x ({A})", labels)


def shift(F: TruncIFunctor) -> TruncIFunctor:
    """W -> W(1): level n is F(1+n) and gamma acts as 1 x gamma."""
    if F.N < 1:
        raise TruncationExceededError("shift needs truncation at least 1")
    N = F.N - 1
    levels = F.levels[1:]
    trans = {(n, i): F.transposition(n + 1, i + 1) for n in range(2, N + 1) for i in range(1, n)}
    labels = F.labels[1:] if F.labels is not None else None
    return TruncIFunctor(N, levels, trans, F.stab[1:], F.grade, f"shift({F.display_name})", labels)


def coset_representatives(m: int) -> List[Perm]:
    """c_a for a = 1..m: sends 1 to a and the rest increasingly."""
    return [complete_to_perm(InjWord((a,), m)) for a in range(1, m + 1)]


def _coset_transport(tau: Perm, a: int, reps: List[Perm]) -> Tuple[int, Perm]:
    """b and sigma with tau c_a = c_b (1 x sigma)."""
    b = tau(a)
    pi = compose(reps[b - 1].inverse(), compose(tau, reps[a - 1]))
    sigma = Perm(tuple(v - 1 for v in pi.values[1:]), tau.codomain - 1)
    return b, sigma


def induce(F: TruncIFunctor) -> TruncIFunctor:
    """Left adjoint of shift: level 1+n is Z[S_(1+n)] (x)_(S_n) F(n), level 0 is zero."""
    F.require_valid()
    N = F.N
    levels = [FgAbGroup.trivial()]
    for n in range(N):
        levels.append(FgAbGroup.direct_sum([F.levels[n]] * (n + 1)))

    trans = {}
    for m in range(2, N + 1):
        g = F.levels[m - 1].num_generators
        reps = coset_representatives(m)
        for i in range(1, m):
            tau = transposition(i, m)
            blocks = []
            for a in range(1, m + 1):
                b, sigma = _coset_transport(tau, a, reps)
                blocks.append(((b - 1) * g, (a - 1) * g, F.perm_action(sigma).matrix))
            trans[(m, i)] = GroupHom(levels[m], levels[m], block_matrix(m * g, m * g, blocks), check=False)

    stab = [GroupHom.zero(levels[0], levels[1])]
    for m in range(1, N):
        g, h = F.levels[m - 1].num_generators, F.levels[m].num_generators
        inner = F.stab[m - 1].matrix
        blocks = [((a - 1) * h, (a - 1) * g, inner) for a in range(1, m + 1)]
        stab.append(GroupHom(levels[m], levels[m + 1], block_matrix((m + 1) * h, m * g, blocks), check=False))

    labels = [()]
    for n in range(N):
        labels.append(tuple(f"c{a}|{F.label(n, j)}" for a in range(1, n + 2)
                            for j in range(F.levels[n].num_generators)))
    return TruncIFunctor(N, levels, trans, stab, F.grade, f"induce({F.display_name})", labels)


# ============ SYMMETRIC GROUP MODULES ============

@dataclass(frozen=True, eq=False)
class SigmaModule:
    """Abelian group with an action of the symmetric group on n letters."""

    n: int
    group: FgAbGroup
    transpositions: Mapping[int, GroupHom]
    name: str = ""
    _cache: Dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "transpositions", dict(self.transpositions))
        missing = [i for i in range(1, self.n) if i not in self.transpositions]
        if missing:
            raise InvalidActionError(f"Missing transpositions {missing} for S_{self.n}")

    @classmethod
    def trivial(cls, n: int, group: FgAbGroup, name: str = "") -> "SigmaModule":
        ident = GroupHom.identity(group)
        return cls(n, group, {i: ident for i in range(1, n)}, name or str(group))

    @classmethod
    def sign(cls, n: int, group: FgAbGroup, name: str = "") -> "SigmaModule":
        neg = GroupHom.identity(group).scale(-1)
        return cls(n, group, {i: neg for i in range(1, n)}, name or f"{group}(sgn)")

    @classmethod
    def regular(cls, n: int) -> "SigmaModule":
        """Z[S_n] with left multiplication, basis in lexicographic order."""
        perms = enumerate_inj(n, n)
        index = {p: k for k, p in enumerate(perms)}
        G = FgAbGroup.free(len(perms))
        trans = {}
        for i in range(1, n):
            s = transposition(i, n)
            trans[i] = GroupHom(G, G, IntMatrix(len(perms), len(perms),
                                                [(index[compose(s, p)], k, 1) for k, p in enumerate(perms)]),
                                check=False)
        return cls(n, G, trans, f"Z[S{n}]")

    def perm_action(self, p: Perm) -> GroupHom:
        key = p.values
        hom = self._cache.get(key)
        if hom is None:
            hom = GroupHom.identity(self.group)
            for i in adjacent_word(p):
                hom = hom.compose(self.transpositions[i])
            self._cache[key] = hom
        return hom

    def validate(self) -> "SigmaModule":
        """Raise InvalidActionError unless the transpositions define an S_n-action."""
        if self._cache.get("valid"):
            return self
        ident = GroupHom.identity(self.group)
        for i, s in self.transpositions.items():
            try:
                GroupHom(s.source, s.target, s.matrix)
            except Exception as e:
                raise InvalidActionError(f"s_{i} is not well defined on {self.group}: {e}")
            if not s.compose(s).equals(ident):
                raise InvalidActionError(f"s_{i} is not an involution")
        for i in range(1, self.n - 1):
            a, b = self.transpositions[i], self.transpositions[i + 1]
            if not a.compose(b).compose(a).equals(b.compose(a).compose(b)):
                raise InvalidActionError(f"Braid relation fails for s_{i}, s_{i + 1}")
        for i in range(1, self.n):
            for j in range(i + 2, self.n):
                a, b = self.transpositions[i], self.transpositions[j]
                if not a.compose(b).equals(b.compose(a)):
                    raise InvalidActionError(f"s_{i} and s_{j} do not commute")
        self._cache["valid"] = True
        return self


def tensor_sigma(n: int, B: SigmaModule, N: int, sign_twist: bool = False) -> TruncIFunctor:
    """P_n (x)_(S_n) B, optionally twisted by the sign; generators are (increasing word, B-generator)."""
    if B.n != n:
        raise InvalidActionError(f"Module carries an S_{B.n}-action, expected S_{n}")
    B.validate()
    gB = B.group.num_generators
    reps = [[InjWord(c, m) for c in itertools.combinations(range(1, m + 1), n)] for m in range(N + 1)]
    index = [{u.values: k for k, u in enumerate(r)} for r in reps]
    levels = [FgAbGroup.direct_sum([B.group] * len(r)) for r in reps]

    trans = {}
    for m in range(2, N + 1):
        size = len(reps[m]) * gB
        for i in range(1, m):
            tau = transposition(i, m)
            blocks = []
            for k, u in enumerate(reps[m]):
                moved = tuple(tau(v) for v in u.values)
                target = tuple(sorted(moved))
                sigma = Perm(tuple(target.index(v) + 1 for v in moved), n)
                block = B.perm_action(sigma).matrix
                if sign_twist and sign(sigma) < 0:
                    block = -block
                blocks.append((index[m][target] * gB, k * gB, block))
            trans[(m, i)] = GroupHom(levels[m], levels[m], block_matrix(size, size, blocks), check=False)

    eye = IntMatrix.identity(gB)
    stab = []
    for m in range(N):
        blocks = [(index[m + 1][u.values] * gB, k * gB, eye) for k, u in enumerate(reps[m])]
        stab.append(GroupHom(levels[m], levels[m + 1],
                             block_matrix(len(reps[m + 1]) * gB, len(reps[m]) * gB, blocks), check=False))

    labels = [tuple("{" + ",".join(map(str, u.values)) + "}" + (f"x{j}" if gB > 1 else "")
                    for u in r for j in range(gB)) for r in reps]
    twist = "(sgn)" if sign_twist else ""
    return TruncIFunctor(N, levels, trans, stab, 0, f"P{n} (x)S{n} {B.name or B.group}{twist}", labels)


# ============ NATURAL MAPS ============

@dataclass(frozen=True, eq=False)
class NaturalMap:
    """Levelwise homomorphisms ``components[n]: source(n) -> target(n)``."""

    source: TruncIFunctor
    target: TruncIFunctor
    components: Tuple[GroupHom, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.source.N != self.target.N or len(self.components) != self.source.N + 1:
            raise ValueError("Natural map needs one component per level of a common truncation")

    def validate(self) -> "NaturalMap":
        S, T = self.source, self.target
        for n, phi in enumerate(self.components):
            GroupHom(S.level(n), T.level(n), phi.matrix)
            for i in range(1, n):
                if not T.transposition(n, i).compose(phi).equals(phi.compose(S.transposition(n, i))):
                    raise InvalidFunctorError(f"Map is not natural for s_{i} at level {n}",
                                              {"relation": "naturality", "level_n": n})
            if n < S.N and not T.stab[n].compose(phi).equals(self.components[n + 1].compose(S.stab[n])):
                raise InvalidFunctorError(f"Map does not commute with stabilization at level {n}",
                                          {"relation": "naturality", "level_n": n})
        return self

    def compose(self, other: "NaturalMap") -> "NaturalMap":
        """``self`` after ``other``."""
        return NaturalMap(other.source, self.target,
                          [a.compose(b) for a, b in zip(self.components, other.components)])

    def is_injective(self) -> bool:
        return all(phi.is_injective() for phi in self.components)

    def is_isomorphism(self) -> bool:
        return all(phi.is_isomorphism() for phi in self.components)


def functor_kernel(phi: NaturalMap) -> Tuple[TruncIFunctor, NaturalMap]:
    S = phi.source
    kernels = [c.kernel() for c in phi.components]
    levels = [K for K, _ in kernels]
    incl = [i for _, i in kernels]
    trans = {(n, i): S.transposition(n, i).compose(incl[n]).factor_through(incl[n]) for (n, i) in S.transpositions}
    stab = [S.stab[n].compose(incl[n]).factor_through(incl[n + 1]) for n in range(S.N)]
    K = TruncIFunctor(S.N, levels, trans, stab, S.grade, f"ker({S.display_name} -> {phi.target.display_name})")
    return K, NaturalMap(K, S, incl)


def functor_cokernel(phi: NaturalMap) -> Tuple[TruncIFunctor, NaturalMap]:
    T = phi.target
    cokernels = [c.cokernel() for c in phi.components]
    levels = [C for C, _ in cokernels]
    trans = {(n, i): GroupHom(levels[n], levels[n], s.matrix, check=False) for (n, i), s in T.transpositions.items()}
    stab = [GroupHom(levels[n], levels[n + 1], T.stab[n].matrix, check=False) for n in range(T.N)]
    C = TruncIFunctor(T.N, levels, trans, stab, T.grade,
                      f"coker({phi.source.display_name} -> {T.display_name})", T.labels)
    return C, NaturalMap(T, C, [p for _, p in cokernels])


def filtration_report(F: TruncIFunctor) -> List[dict]:
    """Compare the image of F(n) with the filtration-n subgroup, for n <= N-2.

    The filtration-n subgroup is read off at level N from elements born at
    level N-1 and fixed by every s_j with j > n.
    """
    F.require_valid()
    N = F.N
    rows = []
    if N < 2:
        return rows
    top, below = F.level(N), F.level(N - 1)
    iota = F.stab[N - 1]
    for n in range(0, N - 1):
        moves = [F.transposition(N, j).compose(iota) - iota for j in range(n + 1, N)]
        stacked = GroupHom(below, FgAbGroup.direct_sum([top] * len(moves)),
                           IntMatrix.vstack([h.matrix for h in moves], ncols=below.num_generators), check=False)
        fixed, fixed_incl = stacked.kernel()
        image = F.iota(n, N - 1)
        image_in = all(stacked(image(x)).is_zero() for x in F.level(n).generators())
        push = F.iota(n, N)
        filtration_in = all(push.preimage(iota(fixed_incl(y))) is not None for y in fixed.generators())
        rows.append({
            "level": n,
            "image": str(push.image()[0]),
            "filtration_subgroup": str(iota.compose(fixed_incl).image()[0]),
            "image_in_filtration": image_in,
            "filtration_in_image": filtration_in,
            "coincide": image_in and filtration_in,
        })
    return rows


# ============ SHIFT STAGES ============

@dataclass(frozen=True, eq=False)
class DStage:
    """V(0), ..., V(k) with the transition maps d: V(j-1) -> V(j)."""

    stages: Tuple[TruncIFunctor, ...]
    maps: Tuple[NaturalMap, ...]

    def isomorphic_stages(self) -> List[bool]:
        return [phi.is_isomorphism() for phi in self.maps]

    def is_iso_up_to(self) -> bool:
        return all(self.isomorphic_stages())


def d_transition(V: TruncIFunctor) -> NaturalMap:
    """x -> d.x from V (restricted to N-1) to V(1)."""
    target = shift(V)
    source = restrict(V, V.N - 1)
    comps = [
        GroupHom(source.level(n), target.level(n), V.morphism(d_prefix(n)).matrix, check=False)
        for n in range(V.N)
    ]
    return NaturalMap(source, target, comps)


def d_stage(F: TruncIFunctor, k: int) -> DStage:
    F.require_valid()
    if not 0 <= k <= F.N:
        raise TruncationExceededError(f"d_stage({k}) needs k <= N = {F.N}")
    stages = [F]
    maps = []
    for _ in range(k):
        phi = d_transition(stages[-1])
        # earlier stages are restricted so that every stage map has matching truncation
        maps.append(phi)
        stages.append(phi.target)
    return DStage(tuple(stages), tuple(maps))


def extension_closure_check(incl: NaturalMap) -> dict:
    """Trivial-action verdicts for a subfunctor V, the quotient F/V and F itself."""
    if not incl.is_injective():
        raise ValueError("Extension closure check needs an injective natural map")
    V, F = incl.source, incl.target
    Q, _ = functor_cokernel(incl)
    sub = is_semistable_up_to(V).holds
    quotient = is_semistable_up_to(Q).holds
    total = is_semistable_up_to(F).holds
    return {
        "sub_trivial": sub,
        "quotient_trivial": quotient,
        "total_trivial": total,
        "consistent": total or not (sub and quotient),
        "bound": F.N,
    }


# ============ GRADED FAMILIES ============

@dataclass(frozen=True, eq=False)
class GradedTameModule:
    """Finite family of functors indexed by degree, all with one truncation level."""

    members: Mapping[int, TruncIFunctor]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", dict(sorted(self.members.items())))
        truncations = {F.N for F in self.members.values()}
        if len(truncations) > 1:
            raise ValueError(f"Graded members have different truncations {sorted(truncations)}")

    @property
    def N(self) -> Optional[int]:
        return next(iter(self.members.values())).N if self.members else None

    @property
    def degrees(self) -> List[int]:
        return list(self.members)

    def __getitem__(self, q: int) -> TruncIFunctor:
        return self.members[q]

    def regrade(self, s: int) -> "GradedTameModule":
        """Degree shift by s (loop for s = -1, suspension for s = +1)."""
        return GradedTameModule({q + s: F.with_grade(q + s) for q, F in self.members.items()},
                                f"{self.name}[{s:+d}]" if self.name else "")
