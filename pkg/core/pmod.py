"""
Representable functors P_n and presentations built from them.

P_n(m) is free on the injective words n -> m and the symmetric group acts by
postcomposition. A map P_m -> P_n is the same thing as an element of
P_n(m) = Z[I(n, m)], so maps between finite sums of representables are
matrices of integer combinations of words (``PMap``). Resolutions of a
functor by such sums are searched level by level.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from threading import RLock
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from cachetools import LRUCache, cached

from core.errors import FiltrationNotVerifiedError, IncompatibleProElementError, TruncationExceededError
from core.exactalg import FgAbGroup, GroupHom
from core.injcat import (
    InjWord,
    complete_to_perm,
    compose,
    enumerate_inj,
    make_word,
    transposition,
    word_index,
)
from core.intmatrix import IntMatrix
from core.tamemod import (
    ColimElement,
    NaturalMap,
    TruncIFunctor,
    direct_sum,
    exact_filtration,
    functor_cokernel,
    functor_kernel,
    induce,
    m_act,
    require_filtration,
    zero_functor,
)

logger = logging.getLogger(__name__)


def word_label(w: InjWord) -> str:
    return "(" + ",".join(str(v) for v in w.values) + ")"


# ============ REPRESENTABLES ============

@cached(cache=LRUCache(maxsize=64), lock=RLock())
def p_functor(n: int, N: int) -> TruncIFunctor:
    """P_n truncated at N."""
    if not 0 <= n <= N:
        raise TruncationExceededError(f"P({n}) needs truncation at least {n}, got {N}")
    words = [enumerate_inj(n, m) for m in range(N + 1)]
    levels = [FgAbGroup.free(len(w)) for w in words]
    trans = {}
    for m in range(2, N + 1):
        index = word_index(n, m)
        size = len(words[m])
        for i in range(1, m):
            s = transposition(i, m)
            mat = IntMatrix(size, size, [(index[compose(s, w)], k, 1) for k, w in enumerate(words[m])])
            trans[(m, i)] = GroupHom(levels[m], levels[m], mat, check=False)
    stab = []
    for m in range(N):
        index = word_index(n, m + 1)
        mat = IntMatrix(len(words[m + 1]), len(words[m]),
                        [(index[w.extend_codomain()], k, 1) for k, w in enumerate(words[m])])
        stab.append(GroupHom(levels[m], levels[m + 1], mat, check=False))
    labels = [tuple(word_label(w) for w in level) for level in words]
    return TruncIFunctor(N, levels, trans, stab, 0, f"P({n})", labels)


def basis_element(n: int, N: int, values: Sequence[int], level: Optional[int] = None) -> ColimElement:
    """The basis word ``values`` of P_n, born at ``level`` (default: its largest entry)."""
    values = tuple(values)
    if len(values) != n:
        raise ValueError(f"P({n}) basis words have {n} entries, got {values}")
    m = max(max(values, default=0), n) if level is None else level
    P = p_functor(n, N)
    return P.generator_element(m, word_index(n, m)[make_word(values, m)])


# ============ P-SUMS AND P-MAPS ============

@dataclass(frozen=True)
class PSum:
    """P_{n_1} + ... + P_{n_r}; summand order is significant."""

    summands: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(int(n) for n in self.summands))
        if any(n < 0 for n in self.summands):
            raise ValueError(f"Negative summand in {self.summands}")

    def __len__(self) -> int:
        return len(self.summands)

    def offsets(self, m: int) -> List[int]:
        """Start of each summand's block of generators at level m."""
        out, total = [], 0
        for n in self.summands:
            out.append(total)
            total += len(enumerate_inj(n, m))
        return out

    def rank(self, m: int) -> int:
        return sum(len(enumerate_inj(n, m)) for n in self.summands)

    def __str__(self) -> str:
        return " + ".join(f"P({n})" for n in self.summands) if self.summands else "0"


Combination = Tuple[Tuple[int, InjWord], ...]


@dataclass(frozen=True, eq=False)
class PMap:
    """Map source -> target; ``entries[(i, j)]`` is a combination of words n_i -> m_j.

    The generator of the j-th source summand P_(m_j) goes to the sum over i of
    ``entries[(i, j)]`` read in the i-th target summand P_(n_i)(m_j).
    """

    source: PSum
    target: PSum
    entries: Mapping[Tuple[int, int], Combination]

    def __post_init__(self):
        clean: Dict[Tuple[int, int], Combination] = {}
        for (i, j), combo in self.entries.items():
            if not (0 <= i < len(self.target) and 0 <= j < len(self.source)):
                raise ValueError(f"Entry ({i}, {j}) outside a {len(self.target)}x{len(self.source)} P-map")
            n, m = self.target.summands[i], self.source.summands[j]
            terms = []
            for c, w in combo:
                if w.source != n or w.codomain != m:
                    raise ValueError(f"Entry ({i}, {j}) holds {w}; expected a word {n} -> {m}")
                if c:
                    terms.append((int(c), w))
            if terms:
                clean[(i, j)] = tuple(terms)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def identity(cls, s: PSum) -> "PMap":
        return cls(s, s, {(i, i): ((1, InjWord.identity(n)),) for i, n in enumerate(s.summands)})

    @classmethod
    def single(cls, word: InjWord, coefficient: int = 1) -> "PMap":
        """P_m -> P_n given by one word n -> m."""
        return cls(PSum((word.codomain,)), PSum((word.source,)), {(0, 0): ((coefficient, word),)})

    def compose(self, other: "PMap") -> "PMap":
        """``self`` after ``other``."""
        if other.target != self.source:
            raise ValueError(f"Cannot compose P-maps: {other.target} != {self.source}")
        acc: Dict[Tuple[int, int], Dict[InjWord, int]] = {}
        for (k, j), inner in other.entries.items():
            for (i, kk), outer in self.entries.items():
                if kk != k:
                    continue
                bucket = acc.setdefault((i, j), {})
                for c1, w1 in inner:
                    for c2, w2 in outer:
                        w = compose(w1, w2)
                        bucket[w] = bucket.get(w, 0) + c1 * c2
        entries = {key: tuple((c, w) for w, c in sorted(b.items()) if c) for key, b in acc.items()}
        return PMap(other.source, self.target, entries)

    def augmented(self) -> IntMatrix:
        """Matrix of Z (x)_M applied to the map: each word becomes 1."""
        return IntMatrix(len(self.target), len(self.source),
                         [(i, j, sum(c for c, _ in combo)) for (i, j), combo in self.entries.items()])


def evaluate_pmap(f: PMap, m: int) -> GroupHom:
    """The level-m component of the realized map."""
    src_off, tgt_off = f.source.offsets(m), f.target.offsets(m)
    triplets = []
    for (i, j), combo in f.entries.items():
        n_j = f.source.summands[j]
        index = word_index(f.target.summands[i], m)
        for k, u in enumerate(enumerate_inj(n_j, m)):
            for c, w in combo:
                triplets.append((tgt_off[i] + index[compose(u, w)], src_off[j] + k, c))
    return GroupHom(
        FgAbGroup.free(f.source.rank(m)),
        FgAbGroup.free(f.target.rank(m)),
        IntMatrix(f.target.rank(m), f.source.rank(m), triplets),
        check=False,
    )


def realize(s: PSum, N: int) -> TruncIFunctor:
    if not s.summands:
        return zero_functor(N)
    return direct_sum(*(p_functor(n, N) for n in s.summands)).renamed(str(s))


def pmap_natural(f: PMap, N: int) -> NaturalMap:
    return NaturalMap(realize(f.source, N), realize(f.target, N), [evaluate_pmap(f, m) for m in range(N + 1)])


def pmap_cokernel(f: PMap, N: int) -> TruncIFunctor:
    """The functor presented by ``f``."""
    C, _ = functor_cokernel(pmap_natural(f, N))
    return C.renamed(f"coker({f.source} -> {f.target})")


# ============ REPRESENTABILITY ============

@dataclass(frozen=True, eq=False)
class RepresentedHom:
    """The map P_n -> W sending the generator (1, ..., n) to ``element``."""

    n: int
    target: TruncIFunctor
    element: ColimElement

    def image_of(self, word: InjWord) -> ColimElement:
        """Image of the basis word ``word``: n -> k."""
        x = self.element
        if x.level <= self.n:
            return m_act(word, x)
        # x is born above n: act by any completion agreeing with word on 1..n
        L, k = x.level, word.codomain
        c = max(k, L)
        base = word.extend_codomain(c - k) if c > k else word
        return m_act(complete_to_perm(base).restrict(L), x)

    def component(self, m: int) -> GroupHom:
        if self.element.level > self.n:
            raise ValueError(f"Element born at level {self.element.level} gives no level-wise map from P({self.n})")
        W = self.target
        x = self.element.push(self.n).value
        cols = [list(W.morphism(w)(x).coefficients) for w in enumerate_inj(self.n, m)]
        return GroupHom(FgAbGroup.free(len(cols)), W.level(m),
                        IntMatrix.from_columns(cols, W.level(m).num_generators), check=False)

    def natural_map(self) -> NaturalMap:
        return NaturalMap(p_functor(self.n, self.target.N), self.target,
                          [self.component(m) for m in range(self.target.N + 1)])

    def evaluate(self) -> ColimElement:
        return self.image_of(InjWord.identity(self.n))


def hom_from_P(n: int, W: TruncIFunctor, x: ColimElement) -> RepresentedHom:
    if x.parent is not W:
        raise ValueError("Element does not belong to the target functor")
    if n > W.N:
        raise TruncationExceededError(f"P({n}) does not fit truncation {W.N}")
    require_filtration(x, n)
    return RepresentedHom(n, W, x)


def evaluate_hom(phi: NaturalMap, n: int) -> ColimElement:
    """Inverse of ``hom_from_P``: the image of the generator (1, ..., n)."""
    idx = word_index(n, n)[InjWord.identity(n)]
    return ColimElement(phi.target, n, phi.components[n](phi.source.level(n).generator(idx)))


# ============ KAPPA ============

def _standardize_tail(u: InjWord) -> Tuple[int, InjWord]:
    """u = (b, x_1, ...) -> (b, x') with entries above b lowered by one."""
    b = u.values[0]
    tail = tuple(v - 1 if v > b else v for v in u.values[1:])
    return b, make_word(tail, u.codomain - 1)


def _insert_head(b: int, x: InjWord) -> InjWord:
    return make_word((b,) + tuple(v + 1 if v >= b else v for v in x.values), x.codomain + 1)


@dataclass(frozen=True, eq=False)
class KappaIso:
    """P_(1+n) -> induce(P_n) with its inverse, checked level by level."""

    n: int
    forward: NaturalMap
    inverse: NaturalMap

    def certificates(self) -> List[dict]:
        out = []
        for m, (f, g) in enumerate(zip(self.forward.components, self.inverse.components)):
            out.append({
                "level": m,
                "rank": f.source.num_generators,
                "isomorphism": f.is_isomorphism(),
                "round_trip": g.compose(f).equals(GroupHom.identity(f.source))
                and f.compose(g).equals(GroupHom.identity(f.target)),
            })
        return out

    @property
    def certified(self) -> bool:
        return all(c["isomorphism"] and c["round_trip"] for c in self.certificates())


def kappa(n: int, N: int) -> KappaIso:
    if n + 1 > N:
        raise TruncationExceededError(f"kappa({n}) needs truncation at least {n + 1}, got {N}")
    source = p_functor(n + 1, N)
    target = induce(p_functor(n, N))
    forward, backward = [], []
    for m in range(N + 1):
        src_words = enumerate_inj(n + 1, m)
        src_index = word_index(n + 1, m)
        g = len(enumerate_inj(n, m - 1)) if m else 0
        tgt_rank = target.level(m).num_generators
        fwd = []
        for k, u in enumerate(src_words):
            b, x = _standardize_tail(u)
            fwd.append(((b - 1) * g + word_index(n, m - 1)[x], k, 1))
        bwd = []
        if m:
            for b in range(1, m + 1):
                for j, x in enumerate(enumerate_inj(n, m - 1)):
                    bwd.append((src_index[_insert_head(b, x)], (b - 1) * g + j, 1))
        forward.append(GroupHom(source.level(m), target.level(m), IntMatrix(tgt_rank, len(src_words), fwd),
                                check=False))
        backward.append(GroupHom(target.level(m), source.level(m), IntMatrix(len(src_words), tgt_rank, bwd),
                                 check=False))
    iso = KappaIso(n, NaturalMap(source, target, forward).validate(), NaturalMap(target, source, backward).validate())
    logger.debug("kappa(%d) built through level %d", n, N)
    return iso


# ============ QUOTIENTS Z[M]/I_n AND PRO-ELEMENTS ============

@dataclass(frozen=True)
class InQuotient:
    """Z[M]/I_n identified with P_n through f + I_n -> (f(1), ..., f(n))."""

    n: int
    N: int

    def class_of(self, f_prefix: InjWord) -> ColimElement:
        if f_prefix.source < self.n:
            raise ValueError(f"Prefix {f_prefix} is shorter than {self.n}")
        word = f_prefix.restrict(self.n)
        P = p_functor(self.n, self.N)
        m = word.codomain
        return P.generator_element(m, word_index(self.n, m)[word])

    def projection(self) -> PMap:
        """P_(n+1) -> P_n dropping the last coordinate."""
        return PMap.single(InjWord(tuple(range(1, self.n + 1)), self.n + 1))


def quotient_In(n: int, N: int) -> InQuotient:
    if n > N - 1:
        raise TruncationExceededError(f"Z[M]/I_{n} needs truncation at least {n + 1}, got {N}")
    return InQuotient(n, N)


Tower = Dict[Tuple[int, ...], int]


def project(component: Mapping[Tuple[int, ...], int]) -> Tower:
    out: Tower = {}
    for values, c in component.items():
        key = tuple(values[:-1])
        out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if v}


@dataclass(frozen=True, eq=False)
class ProElement:
    """Finite tower a_0, ..., a_K with a_k in P_k and a_k the projection of a_(k+1)."""

    components: Tuple[Tower, ...]

    def __post_init__(self):
        comps = tuple({tuple(k): int(v) for k, v in dict(c).items() if v} for c in self.components)
        object.__setattr__(self, "components", comps)
        for k, c in enumerate(comps):
            for values in c:
                if len(values) != k or len(set(values)) != k or any(v < 1 for v in values):
                    raise IncompatibleProElementError(f"Component {k} holds {values}, not an injective {k}-word")

    @classmethod
    def identity(cls, length: int) -> "ProElement":
        return cls(tuple({tuple(range(1, k + 1)): 1} for k in range(length + 1)))

    @classmethod
    def from_prefix(cls, f: InjWord) -> "ProElement":
        """The tower of a single monoid element known on 1..len(f)."""
        return cls(tuple({f.values[:k]: 1} for k in range(f.source + 1)))

    @classmethod
    def from_component(cls, top: Mapping[Tuple[int, ...], int]) -> "ProElement":
        """Tower ending in ``top``, lower terms obtained by projection."""
        top = dict(top)
        k = len(next(iter(top))) if top else 0
        comps = [top]
        for _ in range(k):
            comps.append(project(comps[-1]))
        return cls(tuple(reversed(comps)))

    @property
    def depth(self) -> int:
        return len(self.components) - 1

    def check_compatible(self) -> "ProElement":
        for k in range(self.depth):
            if project(self.components[k + 1]) != self.components[k]:
                raise IncompatibleProElementError(f"Component {k + 1} does not project onto component {k}")
        return self


def act_pro_element(a: ProElement, e: ColimElement, k: Optional[int] = None) -> ColimElement:
    """sum c_w * (w . e) over a_k = sum c_w w, with k the exact filtration of e by default."""
    a.check_compatible()
    if k is None:
        exact = exact_filtration(e)
        if not exact.determined:
            raise FiltrationNotVerifiedError(
                f"Filtration of {e.describe()} lies in {list(exact.interval)} at truncation {e.parent.N}; "
                "pass k explicitly"
            )
        k = exact.value
    if k > a.depth:
        raise TruncationExceededError(f"Pro-element of depth {a.depth} cannot act on elements of filtration {k}")
    rep = hom_from_P(k, e.parent, e)
    total = ColimElement(e.parent, e.level, e.parent.level(e.level).zero())
    for values, c in sorted(a.components[k].items()):
        word = InjWord(values, max(max(values, default=0), k))
        total = total + rep.image_of(word).scaled(c)
    return total


# ============ RESOLUTIONS ============

@dataclass(frozen=True, eq=False)
class PResolution:
    """... -> P_2 -> P_1 -> P_0 -> W; ``maps[p - 1]`` goes from ``terms[p]`` to ``terms[p - 1]``."""

    target: TruncIFunctor
    search_level: int
    generators: Tuple[ColimElement, ...]
    terms: Tuple[PSum, ...]
    maps: Tuple[PMap, ...]
    flags: Tuple[dict, ...]

    @property
    def length(self) -> int:
        return len(self.terms) - 1

    @property
    def exhausted(self) -> bool:
        """The last term is zero, so the resolution is finished."""
        return not self.terms[-1].summands

    def augmentation(self) -> NaturalMap:
        N = self.target.N
        reps = [RepresentedHom(g.level, self.target, g) for g in self.generators]
        comps = []
        for m in range(N + 1):
            blocks = [r.component(m).matrix for r in reps]
            mat = IntMatrix.hstack(blocks) if blocks else IntMatrix.zeros(self.target.level(m).num_generators, 0)
            comps.append(GroupHom(FgAbGroup.free(mat.ncols), self.target.level(m), mat, check=False))
        return NaturalMap(realize(self.terms[0], N), self.target, comps)

    def realized(self, p: int) -> NaturalMap:
        """The map out of degree p (p = 0 is the augmentation)."""
        if p == 0:
            return self.augmentation()
        return pmap_natural(self.maps[p - 1], self.target.N)

    def complete_through(self, p: int) -> bool:
        if p > self.length and not self.exhausted:
            return False
        return all(f["complete"] for f in self.flags[: p + 1])

    def verify_exact(self) -> List[dict]:
        """Level-wise exactness at each degree that has an incoming map, through the truncation."""
        out = []
        for p in range(self.length + 1 if self.exhausted else self.length):
            phi = self.realized(p)
            nxt = self.realized(p + 1) if p < self.length else None
            levels_ok = []
            for m in range(self.target.N + 1):
                out_map = phi.components[m]
                if p == 0:
                    levels_ok.append(out_map.is_surjective())
                    continue
                K, incl = out_map.kernel()
                if nxt is None:
                    levels_ok.append(K.is_trivial())
                    continue
                into = nxt.components[m]
                levels_ok.append(out_map.compose(into).is_zero() and into.factor_through(incl).is_surjective())
            out.append({"degree": p, "exact": all(levels_ok), "levels": levels_ok})
        return out


def _search_generators(K: TruncIFunctor, L: int) -> Tuple[List[ColimElement], dict]:
    """Colimit elements generating K as far as level L, with a completeness flag through level N."""
    gens: List[ColimElement] = []
    reps: List[RepresentedHom] = []

    def cover(m: int) -> GroupHom:
        blocks = [r.component(m).matrix for r in reps]
        target = K.level(m)
        mat = IntMatrix.hstack(blocks) if blocks else IntMatrix.zeros(target.num_generators, 0)
        return GroupHom(FgAbGroup.free(mat.ncols), target, mat, check=False)

    top = min(L, K.N)
    for k in range(top + 1):
        current = cover(k)
        found = 0
        for y in K.level(k).generators():
            if current.preimage(y) is not None:
                continue
            x = ColimElement(K, k, y)
            gens.append(x)
            reps.append(hom_from_P(k, K, x))
            current = cover(k)
            found += 1
        if found:
            logger.debug("generator search on %s: %d new at level %d", K.display_name, found, k)
    gap = next((m for m in range(top + 1, K.N + 1) if not cover(m).is_surjective()), None)
    return gens, {"complete": gap is None, "gap_level": gap, "search_level": L}


def resolve(W: TruncIFunctor, degree: int, search_level: Optional[int] = None) -> PResolution:
    """Resolution of W by sums of representables through ``degree``."""
    W.require_valid()
    L = W.N if search_level is None else search_level
    gens, flag = _search_generators(W, L)
    R = PResolution(W, L, tuple(gens), (PSum(tuple(g.level for g in gens)),), (), ({"degree": 0, **flag},))
    return extend_resolution(R, degree, L)


def extend_resolution(R: PResolution, target_degree: int, search_level: Optional[int] = None) -> PResolution:
    L = R.search_level if search_level is None else search_level
    terms, maps, flags = list(R.terms), list(R.maps), list(R.flags)
    current = R
    while len(terms) <= target_degree:
        p = len(terms)
        if not terms[-1].summands:
            terms.append(PSum(()))
            maps.append(PMap(PSum(()), terms[-2], {}))
            flags.append({"degree": p, "complete": True, "gap_level": None, "search_level": L})
            continue
        K, incl = functor_kernel(current.realized(p - 1))
        gens, flag = _search_generators(K, L)
        source = PSum(tuple(g.level for g in gens))
        prev = terms[-1]
        entries: Dict[Tuple[int, int], List[Tuple[int, InjWord]]] = {}
        for j, g in enumerate(gens):
            y = incl.components[g.level](g.value).coefficients
            offsets = prev.offsets(g.level)
            for i, n in enumerate(prev.summands):
                for k, u in enumerate(enumerate_inj(n, g.level)):
                    c = y[offsets[i] + k]
                    if c:
                        entries.setdefault((i, j), []).append((c, u))
        terms.append(source)
        maps.append(PMap(source, prev, {key: tuple(v) for key, v in entries.items()}))
        flags.append({"degree": p, **flag})
        current = PResolution(R.target, L, R.generators, tuple(terms), tuple(maps), tuple(flags))
        logger.debug("resolution degree %d: %s", p, source)
    return PResolution(R.target, L, R.generators, tuple(terms), tuple(maps), tuple(flags))

