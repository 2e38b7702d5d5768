"""
Exact integer linear algebra.

Finitely generated abelian groups are given by presentations (generators plus
relation rows). Elements are integer coefficient vectors. Homomorphisms are
integer matrices whose rows index target generators and whose columns index
source generators. Everything is computed over Python ints; numpy is used only
as an object-dtype container for the dense Smith normal form.
"""

from __future__ import annotations

import logging
from dataclasses import InitVar, dataclass
from functools import cached_property
from math import gcd
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from core.config import DENSE_LIMIT
from core.errors import IllDefinedHomError, NotAComplexError, ResourceGuardError
from core.intmatrix import IntMatrix

logger = logging.getLogger(__name__)


# ============ SMITH NORMAL FORM ============

@dataclass
class SmithData:
    """Full Smith normal form data: ``U @ m @ V == diag(divisors, 0...)``."""

    shape: Tuple[int, int]
    divisors: List[int]
    U: Optional[np.ndarray] = None
    Uinv: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    Vinv: Optional[np.ndarray] = None

    @property
    def rank(self) -> int:
        return len(self.divisors)

    @property
    def torsion(self) -> Tuple[int, ...]:
        return tuple(d for d in self.divisors if d > 1)


def _eye(n: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=object)
    for i in range(n):
        a[i, i] = 1
    return a


def _dense_snf(a: np.ndarray, track: bool = True) -> SmithData:
    """Classical pivoting Smith normal form on an object-dtype array.

    With ``track`` the unimodular transforms and their inverses are
    maintained alongside, so that ``U @ a @ V`` is the diagonal result.
    """
    A = np.array(a, dtype=object, copy=True)
    m, n = A.shape
    if track:
        U, Uinv, V, Vinv = _eye(m), _eye(m), _eye(n), _eye(n)

    def swap_rows(i: int, j: int) -> None:
        if i == j:
            return
        A[[i, j]] = A[[j, i]]
        if track:
            U[[i, j]] = U[[j, i]]
            Uinv[:, [i, j]] = Uinv[:, [j, i]]

    def swap_cols(i: int, j: int) -> None:
        if i == j:
            return
        A[:, [i, j]] = A[:, [j, i]]
        if track:
            V[:, [i, j]] = V[:, [j, i]]
            Vinv[[i, j]] = Vinv[[j, i]]

    def add_row(target: int, source: int, q: int) -> None:
        # row_target += q * row_source
        A[target] = A[target] + q * A[source]
        if track:
            U[target] = U[target] + q * U[source]
            Uinv[:, source] = Uinv[:, source] - q * Uinv[:, target]

    def add_col(target: int, source: int, q: int) -> None:
        # col_target += q * col_source
        A[:, target] = A[:, target] + q * A[:, source]
        if track:
            V[:, target] = V[:, target] + q * V[:, source]
            Vinv[source] = Vinv[source] - q * Vinv[target]

    def smallest_nonzero(rows: Iterable[int], cols: Iterable[int]):
        best = None
        cols = list(cols)
        for i in rows:
            for j in cols:
                v = A[i, j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        return best
        return best

    divisors: List[int] = []
    t = 0
    while t < min(m, n):
        best = smallest_nonzero(range(t, m), range(t, n))
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t, t]
            dirty = False
            for i in range(t + 1, m):
                if A[i, t]:
                    add_row(i, t, -(A[i, t] // p))
                    dirty = dirty or A[i, t] != 0
            for j in range(t + 1, n):
                if A[t, j]:
                    add_col(j, t, -(A[t, j] // p))
                    dirty = dirty or A[t, j] != 0
            if dirty:
                line = smallest_nonzero([t], range(t, n))
                col = smallest_nonzero(range(t, m), [t])
                pick = min((c for c in (line, col) if c is not None), key=lambda c: c[0])
                swap_rows(t, pick[1])
                swap_cols(t, pick[2])
                continue
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i, j] % p:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(t, offender, 1)
        if A[t, t] < 0:
            A[t] = -A[t]
            if track:
                U[t] = -U[t]
                Uinv[:, t] = -Uinv[:, t]
        divisors.append(int(A[t, t]))
        t += 1

    if track:
        return SmithData((m, n), divisors, U, Uinv, V, Vinv)
    return SmithData((m, n), divisors)


def _check_dense(nrows: int, ncols: int, what: str) -> None:
    if nrows * ncols > DENSE_LIMIT:
        raise ResourceGuardError(
            f"{what}: dense Smith normal form of a {nrows}x{ncols} matrix exceeds "
            f"TAMEMOD_DENSE_LIMIT={DENSE_LIMIT}"
        )


def smith_data(m: IntMatrix, track: bool = True) -> SmithData:
    _check_dense(m.nrows, m.ncols, "smith_data")
    return _dense_snf(m.to_dense(), track=track)


def smith_normal_form(m: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(S, U, V)`` with ``U @ m @ V == S``, S diagonal, d1 | d2 | ..."""
    if not isinstance(m, IntMatrix):
        m = IntMatrix.from_dense(m)
    data = smith_data(m)
    S = IntMatrix.diagonal(data.divisors, m.nrows, m.ncols)
    return S, IntMatrix.from_dense(data.U), IntMatrix.from_dense(data.V)


def canonical_chain(values: Iterable[int]) -> List[int]:
    """Turn diagonal entries into a divisibility chain via gcd/lcm exchanges."""
    vals = sorted(abs(v) for v in values if v)
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            a, b = vals[i], vals[j]
            g = gcd(a, b)
            if g != a:
                vals[i], vals[j] = g, a // g * b
    return vals


class SparseDiagonal(NamedTuple):
    rank: int
    torsion: Tuple[int, ...]


def smith_diagonal(m: IntMatrix) -> SparseDiagonal:
    """Rank and nontrivial invariant factors of a sparse matrix.

    Pivots that divide their whole row and column are eliminated first, unit
    pivots with the lowest fill-in cost before anything else. The remainder
    goes through the dense algorithm.
    """
    rows: Dict[int, Dict[int, int]] = {i: dict(r) for i, r in m.row_items()}
    cols: Dict[int, set] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)

    pivots: List[int] = []

    def eliminate(p: int, j: int) -> None:
        prow = rows.pop(p)
        v = prow[j]
        for k in prow:
            cols[k].discard(p)
        for i in list(cols.get(j, ())):
            row = rows[i]
            q = row[j] // v
            for k, a in prow.items():
                total = row.get(k, 0) - q * a
                if total:
                    if k not in row:
                        cols[k].add(i)
                    row[k] = total
                else:
                    row.pop(k, None)
                    cols[k].discard(i)
            if not row:
                del rows[i]
        cols.pop(j, None)
        for k in prow:
            if k in cols and not cols[k]:
                del cols[k]
        pivots.append(abs(v))

    def sweep(units_only: bool) -> int:
        done = 0
        for j in sorted(cols, key=lambda c: (len(cols[c]), c)):
            if j not in cols:
                continue
            best = None
            for i in cols[j]:
                v = rows[i][j]
                if units_only and abs(v) != 1:
                    continue
                if not units_only:
                    if any(rows[r][j] % v for r in cols[j]):
                        continue
                    if any(a % v for a in rows[i].values()):
                        continue
                cost = (abs(v), len(rows[i]))
                if best is None or cost < best[0]:
                    best = (cost, i)
            if best is not None:
                eliminate(best[1], j)
                done += 1
        return done

    while True:
        while sweep(units_only=True):
            pass
        if not sweep(units_only=False):
            break

    if rows:
        keep_rows = sorted(rows)
        keep_cols = sorted(cols)
        _check_dense(len(keep_rows), len(keep_cols), "smith_diagonal")
        logger.debug("dense fallback on a %dx%d remainder", len(keep_rows), len(keep_cols))
        col_pos = {c: k for k, c in enumerate(keep_cols)}
        dense = np.zeros((len(keep_rows), len(keep_cols)), dtype=object)
        for r, i in enumerate(keep_rows):
            for j, v in rows[i].items():
                dense[r, col_pos[j]] = v
        pivots.extend(_dense_snf(dense, track=False).divisors)

    rank = len(pivots)
    torsion = tuple(d for d in canonical_chain(p for p in pivots if p != 1) if d > 1)
    return SparseDiagonal(rank, torsion)


def determinant(m: IntMatrix) -> int:
    """Fraction-free (Bareiss) determinant of a square matrix."""
    if m.nrows != m.ncols:
        raise ValueError(f"Determinant of a non-square {m.shape} matrix")
    n = m.nrows
    if n == 0:
        return 1
    a = [list(r) for r in m.tolist()]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ============ LATTICES ============

class LatticeBasis:
    """Basis of the sublattice of Z^dim spanned by a finite set of vectors."""

    def __init__(self, vectors: Sequence[Sequence[int]], dim: int):
        self.dim = dim
        B = IntMatrix.from_rows(vectors, ncols=dim)
        data = smith_data(B)
        self.rank = data.rank
        self._divisors = data.divisors
        self._Q = data.V
        self.basis: List[List[int]] = [
            [d * int(data.Vinv[i, j]) for j in range(dim)] for i, d in enumerate(data.divisors)
        ]

    def coordinates(self, vec: Sequence[int]) -> Optional[List[int]]:
        """Coefficients of ``vec`` on the basis, or None when it is outside the lattice."""
        if self.dim == 0:
            return []
        y = np.asarray(list(vec), dtype=object).dot(self._Q)
        coords = []
        for i in range(self.dim):
            yi = int(y[i])
            if i < self.rank:
                q, r = divmod(yi, self._divisors[i])
                if r:
                    return None
                coords.append(q)
            elif yi:
                return None
        return coords

    def __contains__(self, vec) -> bool:
        return self.coordinates(vec) is not None

    def __len__(self) -> int:
        return self.rank


# ============ GROUPS ============

class DiagonalCoordinates(NamedTuple):
    """Coordinates in which a group is a sum of cyclic groups.

    ``moduli[i]`` is 0 for a free coordinate and >= 2 for a torsion one.
    ``to_diag`` maps generator vectors to coordinates, ``from_diag`` back.
    """

    moduli: Tuple[int, ...]
    to_diag: IntMatrix
    from_diag: IntMatrix


@dataclass(frozen=True, eq=False)
class FgAbGroup:
    """Finitely generated abelian group presented by generators and relation rows."""

    num_generators: int
    relations: IntMatrix = None

    def __post_init__(self):
        if self.num_generators < 0:
            raise ValueError("num_generators must be non-negative")
        rel = self.relations
        if rel is None:
            rel = IntMatrix.zeros(0, self.num_generators)
        elif not isinstance(rel, IntMatrix):
            rel = IntMatrix.from_rows(rel, ncols=self.num_generators)
        if rel.ncols != self.num_generators:
            raise ValueError(
                f"Relation matrix has {rel.ncols} columns for {self.num_generators} generators"
            )
        object.__setattr__(self, "relations", rel)

    # --------------------------- Constructors ---------------------------
    @classmethod
    def free(cls, rank: int) -> "FgAbGroup":
        return cls(rank)

    @classmethod
    def trivial(cls) -> "FgAbGroup":
        return cls(0)

    @classmethod
    def cyclic(cls, order: int) -> "FgAbGroup":
        """Z/order; order 0 gives Z."""
        return cls(1, IntMatrix.from_rows([[order]]) if order else None)

    @classmethod
    def from_invariants(cls, free_rank: int, torsion: Sequence[int] = ()) -> "FgAbGroup":
        torsion = [d for d in torsion if d != 1]
        g = len(torsion) + free_rank
        return cls(g, IntMatrix(len(torsion), g, [(i, i, d) for i, d in enumerate(torsion)]))

    @staticmethod
    def direct_sum(*groups: "FgAbGroup") -> "FgAbGroup":
        if len(groups) == 1 and not isinstance(groups[0], FgAbGroup):
            groups = tuple(groups[0])
        return FgAbGroup(
            sum(g.num_generators for g in groups),
            IntMatrix.block_diag([g.relations for g in groups]),
        )

    def tensor(self, other: "FgAbGroup") -> "FgAbGroup":
        """Tensor product; generator (i, k) has index i * other.num_generators + k."""
        g, h = self.num_generators, other.num_generators
        rel = IntMatrix.vstack(
            [self.relations.kron(IntMatrix.identity(h)), IntMatrix.identity(g).kron(other.relations)],
            ncols=g * h,
        )
        return FgAbGroup(g * h, rel)

    # --------------------------- Normal forms ---------------------------
    @cached_property
    def _diagonal_moduli(self) -> Optional[Dict[int, int]]:
        moduli: Dict[int, int] = {}
        for _, row in self.relations.row_items():
            if len(row) != 1:
                return None
            (j, v), = row.items()
            moduli[j] = gcd(moduli.get(j, 0), abs(v))
        return moduli

    @cached_property
    def smith(self) -> SmithData:
        return smith_data(self.relations)

    @cached_property
    def coordinates(self) -> DiagonalCoordinates:
        g = self.num_generators
        diag = self._diagonal_moduli
        if diag is not None:
            kept = [j for j in range(g) if diag.get(j, 0) != 1]
            to_diag = IntMatrix(len(kept), g, [(k, j, 1) for k, j in enumerate(kept)])
            return DiagonalCoordinates(tuple(diag.get(j, 0) for j in kept), to_diag, to_diag.transpose())
        data = self.smith
        d = data.divisors + [0] * (g - data.rank)
        kept = [i for i in range(g) if d[i] != 1]
        to_diag = IntMatrix.from_dense(data.V.T[kept, :]) if kept else IntMatrix.zeros(0, g)
        from_diag = IntMatrix.from_dense(data.Vinv[kept, :]).transpose() if kept else IntMatrix.zeros(g, 0)
        return DiagonalCoordinates(tuple(d[i] for i in kept), to_diag, from_diag)

    def decompose(self) -> Tuple[int, Tuple[int, ...]]:
        moduli = self.coordinates.moduli
        free_rank = sum(1 for m in moduli if m == 0)
        return free_rank, tuple(d for d in canonical_chain(m for m in moduli if m > 1) if d > 1)

    @property
    def free_rank(self) -> int:
        return self.decompose()[0]

    @property
    def torsion(self) -> Tuple[int, ...]:
        return self.decompose()[1]

    def order(self) -> Optional[int]:
        """Group order, or None when infinite."""
        free_rank, torsion = self.decompose()
        if free_rank:
            return None
        out = 1
        for d in torsion:
            out *= d
        return out

    def is_trivial(self) -> bool:
        return not self.coordinates.moduli

    def is_isomorphic(self, other: "FgAbGroup") -> bool:
        return self.decompose() == other.decompose()

    def normal_form(self) -> Tuple["FgAbGroup", "GroupHom", "GroupHom"]:
        """Return ``(D, to_d, from_d)`` with D a diagonal presentation and inverse isomorphisms."""
        c = self.coordinates
        k = len(c.moduli)
        D = FgAbGroup(k, IntMatrix(k, k, [(i, i, m) for i, m in enumerate(c.moduli) if m]))
        return D, GroupHom(self, D, c.to_diag, check=False), GroupHom(D, self, c.from_diag, check=False)

    # --------------------------- Elements ---------------------------
    def _coerce(self, vec) -> List[int]:
        if isinstance(vec, GroupElement):
            vec = vec.coefficients
        vec = [int(v) for v in vec]
        if len(vec) != self.num_generators:
            raise ValueError(f"Vector of length {len(vec)} for a group on {self.num_generators} generators")
        return vec

    def reduce(self, vec) -> Tuple[int, ...]:
        """Reduced diagonal coordinates; two vectors are equal in the group iff these agree."""
        c = self.coordinates
        y = c.to_diag @ self._coerce(vec)
        return tuple(v % m if m else v for v, m in zip(y, c.moduli))

    def is_relation(self, vec) -> bool:
        diag = self._diagonal_moduli
        vec = self._coerce(vec)
        if diag is not None:
            return all(v == 0 if not diag.get(j, 0) else v % diag[j] == 0 for j, v in enumerate(vec) if v)
        return not any(self.reduce(vec))

    def element(self, coefficients) -> "GroupElement":
        return GroupElement(self, tuple(self._coerce(coefficients)))

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.num_generators)

    def generator(self, i: int) -> "GroupElement":
        vec = [0] * self.num_generators
        vec[i] = 1
        return GroupElement(self, tuple(vec))

    def generators(self) -> List["GroupElement"]:
        return [self.generator(i) for i in range(self.num_generators)]

    def from_diagonal(self, coords: Sequence[int]) -> "GroupElement":
        return GroupElement(self, tuple(self.coordinates.from_diag @ list(coords)))

    # --------------------------- Dunder ---------------------------
    def same_presentation(self, other: "FgAbGroup") -> bool:
        return self is other or (
            self.num_generators == other.num_generators and self.relations == other.relations
        )

    def to_dict(self) -> dict:
        free_rank, torsion = self.decompose()
        return {"free_rank": free_rank, "torsion": list(torsion)}

    def __str__(self) -> str:
        free_rank, torsion = self.decompose()
        parts = []
        if free_rank == 1:
            parts.append("Z")
        elif free_rank > 1:
            parts.append(f"Z^{free_rank}")
        parts.extend(f"Z/{d}" for d in torsion)
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FgAbGroup({self.num_generators} generators, {self.relations.nrows} relations: {self})"


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: FgAbGroup
    coefficients: Tuple[int, ...]

    def _other(self, other) -> Tuple[int, ...]:
        if isinstance(other, GroupElement):
            if not self.group.same_presentation(other.group):
                raise ValueError("Elements of different groups")
            return other.coefficients
        return tuple(self.group._coerce(other))

    def __add__(self, other) -> "GroupElement":
        return GroupElement(self.group, tuple(a + b for a, b in zip(self.coefficients, self._other(other))))

    def __sub__(self, other) -> "GroupElement":
        return GroupElement(self.group, tuple(a - b for a, b in zip(self.coefficients, self._other(other))))

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, tuple(-a for a in self.coefficients))

    def __rmul__(self, k: int) -> "GroupElement":
        return GroupElement(self.group, tuple(k * a for a in self.coefficients))

    def is_zero(self) -> bool:
        return self.group.is_relation(self.coefficients)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group.same_presentation(other.group) and self.group.is_relation(
            [a - b for a, b in zip(self.coefficients, other.coefficients)]
        )

    def __hash__(self) -> int:
        return hash(self.group.reduce(self.coefficients))

    def __repr__(self) -> str:
        return f"GroupElement({list(self.coefficients)})"


# ============ HOMOMORPHISMS ============

@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FgAbGroup
    target: FgAbGroup
    matrix: IntMatrix
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        mat = self.matrix
        if not isinstance(mat, IntMatrix):
            mat = IntMatrix.from_rows(mat, ncols=self.source.num_generators)
            object.__setattr__(self, "matrix", mat)
        expected = (self.target.num_generators, self.source.num_generators)
        if mat.shape != expected:
            raise ValueError(f"Homomorphism matrix has shape {mat.shape}, expected {expected}")
        if check:
            rel = self.source.relations
            for r in range(rel.nrows):
                image = mat @ rel.row_vector(r)
                if not self.target.is_relation(image):
                    raise IllDefinedHomError(f"Source relation {r} is not sent to a relation of the target")

    # --------------------------- Constructors ---------------------------
    @classmethod
    def identity(cls, group: FgAbGroup) -> "GroupHom":
        return cls(group, group, IntMatrix.identity(group.num_generators), check=False)

    @classmethod
    def zero(cls, source: FgAbGroup, target: FgAbGroup) -> "GroupHom":
        return cls(source, target, IntMatrix.zeros(target.num_generators, source.num_generators), check=False)

    @staticmethod
    def direct_sum(*homs: "GroupHom") -> "GroupHom":
        return GroupHom(
            FgAbGroup.direct_sum([h.source for h in homs]),
            FgAbGroup.direct_sum([h.target for h in homs]),
            IntMatrix.block_diag([h.matrix for h in homs]),
            check=False,
        )

    # --------------------------- Evaluation ---------------------------
    def __call__(self, x) -> GroupElement:
        return GroupElement(self.target, tuple(self.matrix @ self.source._coerce(x)))

    def compose(self, other: "GroupHom") -> "GroupHom":
        """``self`` after ``other``."""
        if other.target.num_generators != self.source.num_generators:
            raise ValueError("Composition of homomorphisms with mismatched groups")
        return GroupHom(other.source, self.target, self.matrix @ other.matrix, check=False)

    def __matmul__(self, other: "GroupHom") -> "GroupHom":
        return self.compose(other)

    def __add__(self, other: "GroupHom") -> "GroupHom":
        return GroupHom(self.source, self.target, self.matrix + other.matrix, check=False)

    def __sub__(self, other: "GroupHom") -> "GroupHom":
        return GroupHom(self.source, self.target, self.matrix - other.matrix, check=False)

    def __neg__(self) -> "GroupHom":
        return GroupHom(self.source, self.target, -self.matrix, check=False)

    def scale(self, k: int) -> "GroupHom":
        return GroupHom(self.source, self.target, self.matrix.scale(k), check=False)

    def equals(self, other: "GroupHom") -> bool:
        """Agreement on every source generator, modulo target relations."""
        diff = self.matrix - other.matrix
        return all(self.target.is_relation(diff.column_vector(j)) for j in range(diff.ncols))

    def is_zero(self) -> bool:
        return all(self.target.is_relation(self.matrix.column_vector(j)) for j in range(self.matrix.ncols))

    # --------------------------- Solving ---------------------------
    @cached_property
    def _solver(self) -> SmithData:
        A = IntMatrix.hstack([self.matrix, self.target.relations.transpose()])
        return smith_data(A)

    def preimage(self, y) -> Optional[GroupElement]:
        """Some x with f(x) == y, or None when y is outside the image."""
        y = self.target._coerce(y)
        g = self.source.num_generators
        if not self.target.num_generators:
            return self.source.zero()
        data = self._solver
        w = data.U.dot(np.asarray(y, dtype=object)) if y else np.zeros(0, dtype=object)
        u = [0] * data.shape[1]
        for i in range(data.shape[0]):
            wi = int(w[i])
            if i < data.rank:
                q, r = divmod(wi, data.divisors[i])
                if r:
                    return None
                u[i] = q
            elif wi:
                return None
        z = data.V.dot(np.asarray(u, dtype=object)) if u else []
        return GroupElement(self.source, tuple(int(z[j]) for j in range(g)))

    def kernel(self) -> Tuple[FgAbGroup, "GroupHom"]:
        """Return ``(K, incl)`` with incl injective onto ``{x : f(x) = 0}``."""
        G = self.source
        g = G.num_generators
        if not self.target.num_generators:
            return G, GroupHom.identity(G)
        data = self._solver
        width = data.shape[1]
        null = [[int(data.V[i, j]) for i in range(g)] for j in range(data.rank, width)]
        return _sublattice_quotient(G, null)

    def cokernel(self) -> Tuple[FgAbGroup, "GroupHom"]:
        H = self.target
        C = FgAbGroup(
            H.num_generators,
            IntMatrix.vstack([H.relations, self.matrix.transpose()], ncols=H.num_generators),
        )
        return C, GroupHom(H, C, IntMatrix.identity(H.num_generators), check=False)

    def image(self) -> Tuple[FgAbGroup, "GroupHom"]:
        """Image as a subgroup of the target, with its inclusion."""
        cols = [self.matrix.column_vector(j) for j in range(self.matrix.ncols)]
        return _sublattice_quotient(self.target, cols)

    def is_injective(self) -> bool:
        return self.kernel()[0].is_trivial()

    def is_surjective(self) -> bool:
        return self.cokernel()[0].is_trivial()

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def inverse(self) -> "GroupHom":
        if not self.is_isomorphism():
            raise ValueError("Homomorphism is not invertible")
        cols = [list(self.preimage(e).coefficients) for e in self.target.generators()]
        return GroupHom(
            self.target, self.source, IntMatrix.from_columns(cols, self.source.num_generators), check=False
        )

    def factor_through(self, injection: "GroupHom") -> "GroupHom":
        """The unique g with ``injection @ g == self``; the image must lie in the injection's image."""
        cols = []
        for e in self.source.generators():
            x = injection.preimage(self(e))
            if x is None:
                raise ValueError(f"Image of generator {list(e.coefficients)} is outside the subgroup")
            cols.append(list(x.coefficients))
        return GroupHom(
            self.source, injection.source, IntMatrix.from_columns(cols, injection.source.num_generators)
        )

    def __repr__(self) -> str:
        return f"GroupHom({self.source} -> {self.target}, {self.matrix!r})"


def _sublattice_quotient(G: FgAbGroup, vectors: List[List[int]]) -> Tuple[FgAbGroup, GroupHom]:
    """Subgroup of G generated by ``vectors``, presented on a lattice basis."""
    g = G.num_generators
    rel_rows = [G.relations.row_vector(i) for i in range(G.relations.nrows)]
    lattice = LatticeBasis([v for v in vectors if any(v)] + rel_rows, g)
    if not rel_rows:
        K = FgAbGroup(lattice.rank)
    else:
        K = FgAbGroup(lattice.rank, IntMatrix.from_rows([lattice.coordinates(r) for r in rel_rows], lattice.rank))
    incl = GroupHom(K, G, IntMatrix.from_columns(lattice.basis, g), check=False)
    return K, incl


def group_decompose(g: FgAbGroup) -> Tuple[int, Tuple[int, ...]]:
    return g.decompose()


def hom_kernel(f: GroupHom) -> Tuple[FgAbGroup, GroupHom]:
    return f.kernel()


# ============ CHAIN COMPLEXES ============

@dataclass(frozen=True, eq=False)
class ChainComplex:
    """Bounded complex; ``differentials[i]`` maps ``groups[i + 1]`` to ``groups[i]``.

    ``groups[i]`` sits in degree ``base_degree + i``.
    """

    groups: Tuple[FgAbGroup, ...]
    differentials: Tuple[GroupHom, ...]
    base_degree: int = 0
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "differentials", tuple(self.differentials))
        if len(self.differentials) != max(len(self.groups) - 1, 0):
            raise NotAComplexError(
                f"{len(self.groups)} groups need {max(len(self.groups) - 1, 0)} differentials, "
                f"got {len(self.differentials)}"
            )
        for i, d in enumerate(self.differentials):
            if d.source.num_generators != self.groups[i + 1].num_generators or (
                d.target.num_generators != self.groups[i].num_generators
            ):
                raise NotAComplexError(f"Differential out of degree {self.base_degree + i + 1} has wrong shape")
        if check:
            for i in range(1, len(self.differentials)):
                if not self.differentials[i - 1].compose(self.differentials[i]).is_zero():
                    raise NotAComplexError(
                        f"d o d is nonzero from degree {self.base_degree + i + 1} to {self.base_degree + i - 1}"
                    )

    @property
    def top_degree(self) -> int:
        return self.base_degree + len(self.groups) - 1

    def group(self, p: int) -> FgAbGroup:
        i = p - self.base_degree
        return self.groups[i] if 0 <= i < len(self.groups) else FgAbGroup.trivial()

    def differential(self, p: int) -> GroupHom:
        """d_p from degree p to degree p - 1."""
        i = p - self.base_degree
        if 1 <= i < len(self.groups):
            return self.differentials[i - 1]
        return GroupHom.zero(self.group(p), self.group(p - 1))

    @cached_property
    def _totalization(self) -> Dict[int, Tuple[int, IntMatrix]]:
        """Free complex with the same homology: ``{degree: (rank T_p, boundary T_p -> T_{p-1})}``.

        Each group is replaced by its two-term free resolution in diagonal
        coordinates; the correction term ``h`` absorbs the failure of the
        lifted differentials to square to zero on the nose.
        """
        lo, hi = self.base_degree, self.top_degree
        coords = {p: self.group(p).coordinates for p in range(lo - 2, hi + 3)}
        k = {p: len(c.moduli) for p, c in coords.items()}
        tors = {p: [a for a, m in enumerate(c.moduli) if m] for p, c in coords.items()}
        t = {p: len(v) for p, v in tors.items()}

        lifted: Dict[int, IntMatrix] = {}
        for p in range(lo - 1, hi + 3):
            d = self.differential(p)
            lifted[p] = coords[p - 1].to_diag @ d.matrix @ coords[p].from_diag

        def rho(p: int) -> IntMatrix:
            mod = coords[p].moduli
            return IntMatrix(k[p], t[p], [(a, c, mod[a]) for c, a in enumerate(tors[p])])

        def lift_to_relations(p: int) -> IntMatrix:
            D = lifted[p]
            mod_src, mod_tgt = coords[p].moduli, coords[p - 1].moduli
            position = {a: c for c, a in enumerate(tors[p - 1])}
            columns = D.columns()
            out = []
            for c, a in enumerate(tors[p]):
                for i, v in columns.get(a, {}).items():
                    scaled = v * mod_src[a]
                    if not mod_tgt[i]:
                        if scaled:
                            raise NotAComplexError(f"Differential d_{p} is not well defined on torsion")
                        continue
                    q, r = divmod(scaled, mod_tgt[i])
                    if r:
                        raise NotAComplexError(f"Differential d_{p} is not well defined on torsion")
                    out.append((position[i], c, q))
            return IntMatrix(t[p - 1], t[p], out)

        def homotopy(p: int) -> IntMatrix:
            P = lifted[p - 1] @ lifted[p]
            mod = coords[p - 2].moduli
            position = {a: c for c, a in enumerate(tors[p - 2])}
            out = []
            for i, row in P.row_items():
                for j, v in row.items():
                    if not mod[i]:
                        raise NotAComplexError(f"d_{p - 1} o d_{p} is nonzero")
                    q, r = divmod(v, mod[i])
                    if r:
                        raise NotAComplexError(f"d_{p - 1} o d_{p} is nonzero")
                    out.append((position[i], j, q))
            return IntMatrix(t[p - 2], k[p], out)

        result = {}
        for p in range(lo, hi + 2):
            top = IntMatrix.hstack([lifted[p], rho(p - 1)])
            bottom = IntMatrix.hstack([-homotopy(p), -lift_to_relations(p - 1)])
            boundary = IntMatrix.vstack([top, bottom])
            result[p] = (k[p] + t[p - 1], boundary)
        return result

    def homology(self, p: int) -> FgAbGroup:
        total = self._totalization
        if p not in total:
            return FgAbGroup.trivial()
        dim, boundary = total[p]
        incoming = total.get(p + 1)
        rank_out = smith_diagonal(boundary).rank if boundary.nnz else 0
        if incoming is not None and incoming[1].nnz:
            diag_in = smith_diagonal(incoming[1])
        else:
            diag_in = SparseDiagonal(0, ())
        logger.debug("H_%d: dim %d, ranks out %d in %d", p, dim, rank_out, diag_in.rank)
        return FgAbGroup.from_invariants(dim - rank_out - diag_in.rank, diag_in.torsion)

    def homology_explicit(self, p: int) -> Tuple[FgAbGroup, GroupHom]:
        """Homology as ker/im, with the quotient map from the cycle group.

        Dense and slower than ``homology``; returns ``(H, q)`` with
        ``q: Z_p -> H`` where ``Z_p`` is the source of the returned map.
        """
        Z, incl = self.differential(p).kernel()
        boundary = self.differential(p + 1).factor_through(incl)
        return boundary.cokernel()


def complex_homology(c: ChainComplex, p: int) -> FgAbGroup:
    return c.homology(p)
