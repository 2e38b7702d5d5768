"""
Coinvariants, Tor over Z[M] and symmetric-group homology.

Tor_p(Z, W) is computed two ways: as the homology of the normalized
simplicial replacement over the truncated category (``tor_bar``) and from a
resolution by sums of representables (``tor_pres``). Both answers describe the
truncation at N; the stabilization flag records whether N-1 gave the same group.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, List, Optional, Sequence, Union

from core.config import GROUP_HOMOLOGY_MAX_N, GROUP_HOMOLOGY_MAX_P, MAX_CHAINS
from core.errors import ResourceGuardError
from core.exactalg import ChainComplex, FgAbGroup, GroupHom
from core.injcat import compose, count_chains, enumerate_inj, iter_chains
from core.intmatrix import IntMatrix
from core.pmod import PResolution, extend_resolution, resolve
from core.tamemod import NaturalMap, SigmaModule, TruncIFunctor, restrict

logger = logging.getLogger(__name__)

METHODS = ("bar", "pres")


# ============ COINVARIANTS ============

def sigma_coinvariants(group: FgAbGroup, transpositions: Sequence[GroupHom]) -> FgAbGroup:
    """group / (s x - x), presented on the same generators."""
    g = group.num_generators
    eye = IntMatrix.identity(g)
    extra = [(s.matrix - eye).transpose() for s in transpositions]
    return FgAbGroup(g, IntMatrix.vstack([group.relations] + extra, ncols=g))


@dataclass(frozen=True)
class Coinvariants:
    """Z (x)_(S_n) F(n) for n = 0..N with the maps induced by iota."""

    group: FgAbGroup
    stabilized: bool
    sequence: List[FgAbGroup] = field(repr=False)
    bound: int = 0

    def to_dict(self) -> dict:
        return {
            "group": str(self.group),
            "stabilized": self.stabilized,
            "bound": self.bound,
            "sequence": [str(g) for g in self.sequence],
        }


def coinvariants(F: TruncIFunctor) -> Coinvariants:
    F.require_valid()
    seq = [
        sigma_coinvariants(F.level(n), [F.transposition(n, i) for i in range(1, n)]) for n in range(F.N + 1)
    ]
    maps = [GroupHom(seq[n], seq[n + 1], F.stab[n].matrix, check=False) for n in range(F.N)]
    stabilized = F.N >= 2 and maps[-1].is_isomorphism() and maps[-2].is_isomorphism()
    return Coinvariants(seq[-1], stabilized, seq, F.N)


# ============ TOR RESULTS ============

@dataclass(frozen=True)
class TorResult:
    degree: int
    value: FgAbGroup
    method: str
    N: int
    L: Optional[int] = None
    stabilized: bool = False
    complete: bool = True

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "value": str(self.value),
            "invariants": self.value.to_dict(),
            "method": self.method,
            "N": self.N,
            "L": self.L,
            "stabilized": self.stabilized,
            "complete": self.complete,
        }


# ============ BAR ENGINE ============

def _diagonalize(F: TruncIFunctor) -> TruncIFunctor:
    """Isomorphic functor whose levels have diagonal presentations."""
    forms = [g.normal_form() for g in F.levels]
    levels = [D for D, _, _ in forms]

    def conj(hom: GroupHom, n_src: int, n_tgt: int) -> GroupHom:
        mat = forms[n_tgt][1].matrix @ hom.matrix @ forms[n_src][2].matrix
        return GroupHom(levels[n_src], levels[n_tgt], mat, check=False)

    trans = {(n, i): conj(s, n, n) for (n, i), s in F.transpositions.items()}
    stab = [conj(s, n, n + 1) for n, s in enumerate(F.stab)]
    return TruncIFunctor(F.N, levels, trans, stab, F.grade, F.name)


def bar_complex(F: TruncIFunctor, top: int) -> ChainComplex:
    """Normalized simplicial replacement in degrees 0..top."""
    total = sum(count_chains(F.N, p) for p in range(top + 1))
    if total > MAX_CHAINS:
        raise ResourceGuardError(
            f"Bar complex at N = {F.N} through degree {top} has {total} chains (limit {MAX_CHAINS})"
        )
    D = _diagonalize(F.require_valid())
    chains = [list(iter_chains(D.N, p)) for p in range(top + 1)]
    logger.debug("bar complex of %s: chain counts %s", F.display_name, [len(c) for c in chains])
    offsets = []
    for p_chains in chains:
        pos, off = {}, 0
        for c in p_chains:
            pos[(c.source, c.arrows)] = off
            off += D.level(c.source).num_generators
        offsets.append(pos)
    groups = [FgAbGroup.direct_sum([D.level(c.source) for c in p_chains]) if p_chains else FgAbGroup.trivial()
              for p_chains in chains]

    diffs = []
    for p in range(1, top + 1):
        triplets = []
        tgt_pos = offsets[p - 1]
        for c in chains[p]:
            src = offsets[p][(c.source, c.arrows)]
            g = D.level(c.source).num_generators
            # face 0 moves the element along the first arrow
            first = D.morphism(c.arrows[0]).matrix
            t0 = tgt_pos[(c.objects[1], c.arrows[1:])]
            triplets.extend((t0 + i, src + j, v) for i, j, v in first.triplets())
            for i in range(1, p):
                composite = compose(c.arrows[i], c.arrows[i - 1])
                if composite.is_identity():
                    continue
                arrows = c.arrows[: i - 1] + (composite,) + c.arrows[i + 1:]
                t = tgt_pos[(c.source, arrows)]
                sign = -1 if i % 2 else 1
                triplets.extend((t + k, src + k, sign) for k in range(g))
            t = tgt_pos[(c.source, c.arrows[:-1])]
            sign = -1 if p % 2 else 1
            triplets.extend((t + k, src + k, sign) for k in range(g))
        mat = IntMatrix(groups[p - 1].num_generators, groups[p].num_generators, triplets)
        diffs.append(GroupHom(groups[p], groups[p - 1], mat, check=False))
    return ChainComplex(groups, diffs, check=False)


def _bar_values(F: TruncIFunctor, p_max: int) -> List[FgAbGroup]:
    C = bar_complex(F, p_max + 1)
    return [C.homology(p) for p in range(p_max + 1)]


def tor_bar(F: TruncIFunctor, p_max: int, check_stability: bool = True) -> List[TorResult]:
    values = _bar_values(F, p_max)
    previous = _bar_values(restrict(F, F.N - 1), p_max) if check_stability and F.N >= 1 else None
    return [
        TorResult(p, v, "bar", F.N, None, previous is not None and previous[p].is_isomorphic(v))
        for p, v in enumerate(values)
    ]


# ============ RESOLUTION ENGINE ============

def augmented_complex(R: PResolution, top: int) -> ChainComplex:
    """Z (x)_M applied to the resolution: P_n -> Z, words -> 1."""
    groups = [FgAbGroup.free(len(R.terms[p])) for p in range(top + 1)]
    diffs = [GroupHom(groups[p], groups[p - 1], R.maps[p - 1].augmented(), check=False) for p in range(1, top + 1)]
    return ChainComplex(groups, diffs)


def _pres_values(W: TruncIFunctor, p_max: int, L: Optional[int]):
    R = resolve(W, p_max + 1, L)
    C = augmented_complex(R, p_max + 1)
    return [C.homology(p) for p in range(p_max + 1)], R


def tor_pres(
    W: Union[TruncIFunctor, PResolution],
    p_max: int,
    search_level: Optional[int] = None,
    check_stability: bool = True,
) -> List[TorResult]:
    if isinstance(W, PResolution):
        R = W
        if R.length < p_max + 1 and not R.exhausted:
            raise ValueError(f"Resolution reaches degree {R.length}; Tor_{p_max} needs degree {p_max + 1}")
        C = augmented_complex(R if R.length >= p_max + 1 else extend_resolution(R, p_max + 1), p_max + 1)
        values = [C.homology(p) for p in range(p_max + 1)]
        F = R.target
    else:
        F = W
        values, R = _pres_values(F, p_max, search_level)
    L = R.search_level
    previous = None
    if check_stability and F.N >= 1:
        previous, _ = _pres_values(restrict(F, F.N - 1), p_max, min(L, F.N - 1))
    return [
        TorResult(p, v, "pres", F.N, L, previous is not None and previous[p].is_isomorphic(v),
                  R.complete_through(p + 1))
        for p, v in enumerate(values)
    ]


def tor(F: TruncIFunctor, p_max: int, method: str = "bar", search_level: Optional[int] = None) -> List[TorResult]:
    if method == "bar":
        return tor_bar(F, p_max)
    if method == "pres":
        return tor_pres(F, p_max, search_level)
    raise ValueError(f"Unknown Tor method {method!r}; expected one of {METHODS}")


def tor_cross_check(F: TruncIFunctor, p_max: int, search_level: Optional[int] = None) -> Dict[str, object]:
    bar = tor_bar(F, p_max)
    pres = tor_pres(F, p_max, search_level)
    rows = [
        {
            "degree": b.degree,
            "bar": str(b.value),
            "pres": str(r.value),
            "agree": b.value.is_isomorphic(r.value),
            "stabilized": b.stabilized and r.stabilized,
            "complete": r.complete,
        }
        for b, r in zip(bar, pres)
    ]
    verdict = "AGREE" if all(row["agree"] for row in rows) else "DISAGREE"
    return {"rows": rows, "verdict": verdict, "bar": bar, "pres": pres}


# ============ SYMMETRIC GROUP HOMOLOGY ============

def group_homology(n: int, B: SigmaModule, p_max: int) -> List[FgAbGroup]:
    """H_p(S_n; B) for p <= p_max from the normalized bar complex."""
    if n > GROUP_HOMOLOGY_MAX_N or p_max > GROUP_HOMOLOGY_MAX_P:
        raise ResourceGuardError(
            f"Group homology is limited to n <= {GROUP_HOMOLOGY_MAX_N} and p <= {GROUP_HOMOLOGY_MAX_P}"
        )
    if B.n != n:
        raise ValueError(f"Module carries an S_{B.n}-action, expected S_{n}")
    B.validate()
    elements = [g for g in enumerate_inj(n, n) if not g.is_identity()]
    top = p_max + 1
    total = sum(len(elements) ** p for p in range(top + 1))
    if total > MAX_CHAINS:
        raise ResourceGuardError(f"Bar resolution of S_{n} through degree {top} has {total} cells")
    b = B.group.num_generators
    right = {g.values: B.perm_action(g.inverse()).matrix for g in elements}
    cells = [list(itertools.product(elements, repeat=p)) for p in range(top + 1)]
    index = [{tuple(g.values for g in c): k for k, c in enumerate(cs)} for cs in cells]
    groups = [FgAbGroup.direct_sum([B.group] * len(cs)) for cs in cells]

    diffs = []
    for p in range(1, top + 1):
        triplets = []
        for k, c in enumerate(cells[p]):
            key = tuple(g.values for g in c)
            src = k * b
            t = index[p - 1][key[1:]] * b
            triplets.extend((t + i, src + j, v) for i, j, v in right[key[0]].triplets())
            for i in range(1, p):
                product = compose(c[i - 1], c[i])
                if product.is_identity():
                    continue
                face = key[: i - 1] + (product.values,) + key[i + 1:]
                t = index[p - 1][face] * b
                sign = -1 if i % 2 else 1
                triplets.extend((t + j, src + j, sign) for j in range(b))
            t = index[p - 1][key[:-1]] * b
            sign = -1 if p % 2 else 1
            triplets.extend((t + j, src + j, sign) for j in range(b))
        mat = IntMatrix(groups[p - 1].num_generators, groups[p].num_generators, triplets)
        diffs.append(GroupHom(groups[p], groups[p - 1], mat, check=False))
    C = ChainComplex(groups, diffs, check=False)
    return [C.homology(p) for p in range(p_max + 1)]


# ============ RATIONAL CHECKS ============

def rationalize_tor(results: Sequence[TorResult]) -> List[dict]:
    return [{"degree": r.degree, "rank": r.value.free_rank, "method": r.method} for r in results]


def annihilation_check(incl: NaturalMap, n: int) -> dict:
    """Kernel of the map on S_n-coinvariants at level n, and whether n! kills it."""
    V, F = incl.source, incl.target
    CV = sigma_coinvariants(V.level(n), [V.transposition(n, i) for i in range(1, n)])
    CF = sigma_coinvariants(F.level(n), [F.transposition(n, i) for i in range(1, n)])
    K, _ = GroupHom(CV, CF, incl.components[n].matrix).kernel()
    bound = factorial(n)
    free_rank, torsion = K.decompose()
    return {
        "level": n,
        "kernel": str(K),
        "bound": bound,
        "annihilated": free_rank == 0 and all(bound % d == 0 for d in torsion),
    }


def rational_collapse_check(
    F: TruncIFunctor,
    p_max: int,
    method: str = "bar",
    search_level: Optional[int] = None,
    injection: Optional[NaturalMap] = None,
    level: Optional[int] = None,
) -> dict:
    results = tor(F, p_max, method, search_level)
    ranks = rationalize_tor(results)
    report = {
        "ranks": ranks,
        "collapses": all(r["rank"] == 0 for r in ranks if r["degree"] >= 1),
        "bound": F.N,
    }
    if injection is not None:
        report["annihilation"] = annihilation_check(injection, injection.source.N if level is None else level)
    return report
