"""
Sparse integer matrices over exact Python ints.

Entries are kept row-wise as ``{row: {col: value}}`` with zeros omitted.
Instances are never mutated after construction; every operation returns a new
matrix. ``to_dense`` hands a numpy object-dtype array to the dense algorithms.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

Triplet = Tuple[int, int, int]
Vector = List[int]


class IntMatrix:
    """Immutable sparse integer matrix."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, triplets: Iterable[Triplet] = ()):
        if nrows < 0 or ncols < 0:
            raise ValueError(f"Negative matrix shape {nrows}x{ncols}")
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        rows: Dict[int, Dict[int, int]] = {}
        for i, j, v in triplets:
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"Entry ({i}, {j}) outside a {nrows}x{ncols} matrix")
            v = int(v)
            if not v:
                continue
            row = rows.setdefault(i, {})
            total = row.get(j, 0) + v
            if total:
                row[j] = total
            else:
                del row[j]
                if not row:
                    del rows[i]
        self._rows = rows

    @classmethod
    def _trusted(cls, nrows: int, ncols: int, rows: Dict[int, Dict[int, int]]) -> "IntMatrix":
        """Wrap an already-clean row dictionary without copying or checking."""
        m = cls.__new__(cls)
        m.nrows = nrows
        m.ncols = ncols
        m._rows = rows
        return m

    # --------------------------- Constructors ---------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls._trusted(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def diagonal(cls, values: Sequence[int], nrows: int = None, ncols: int = None) -> "IntMatrix":
        nrows = len(values) if nrows is None else nrows
        ncols = len(values) if ncols is None else ncols
        return cls(nrows, ncols, ((i, i, v) for i, v in enumerate(values)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int = None) -> "IntMatrix":
        """Build from a list of rows; ``ncols`` is required when ``rows`` is empty."""
        rows = [list(r) for r in rows]
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for a matrix without rows")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise ValueError(f"Ragged matrix: expected rows of length {ncols}, got {len(r)}")
        return cls(len(rows), ncols, ((i, j, v) for i, r in enumerate(rows) for j, v in enumerate(r) if v))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: int) -> "IntMatrix":
        return cls(nrows, len(columns), ((i, j, v) for j, c in enumerate(columns) for i, v in enumerate(c) if v))

    @classmethod
    def from_dense(cls, array: Union[np.ndarray, Sequence[Sequence[int]]]) -> "IntMatrix":
        a = np.asarray(array, dtype=object)
        if a.ndim != 2:
            raise ValueError(f"Expected a 2-d array, got shape {a.shape}")
        r, c = a.shape
        return cls(r, c, ((i, j, int(a[i, j])) for i in range(r) for j in range(c) if a[i, j] != 0))

    # --------------------------- Access ---------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self._rows.values())

    def entry(self, i: int, j: int) -> int:
        return self._rows.get(i, {}).get(j, 0)

    def row(self, i: int) -> Dict[int, int]:
        """Nonzero entries of row ``i``; the returned dict must not be mutated."""
        return self._rows.get(i, {})

    def row_items(self) -> Iterator[Tuple[int, Dict[int, int]]]:
        for i in sorted(self._rows):
            yield i, self._rows[i]

    def triplets(self) -> List[Triplet]:
        return [(i, j, v) for i, row in self.row_items() for j, v in sorted(row.items())]

    def row_vector(self, i: int) -> Vector:
        out = [0] * self.ncols
        for j, v in self._rows.get(i, {}).items():
            out[j] = v
        return out

    def column_vector(self, j: int) -> Vector:
        out = [0] * self.nrows
        for i, row in self._rows.items():
            v = row.get(j)
            if v:
                out[i] = v
        return out

    def columns(self) -> Dict[int, Dict[int, int]]:
        """Column-wise view ``{col: {row: value}}`` of the nonzero entries."""
        cols: Dict[int, Dict[int, int]] = {}
        for i, row in self._rows.items():
            for j, v in row.items():
                cols.setdefault(j, {})[i] = v
        return cols

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.nrows, self.ncols), dtype=object)
        for i, row in self._rows.items():
            for j, v in row.items():
                a[i, j] = v
        return a

    def tolist(self) -> List[List[int]]:
        return [self.row_vector(i) for i in range(self.nrows)]

    def is_zero(self) -> bool:
        return not self._rows

    # --------------------------- Algebra ---------------------------
    def transpose(self) -> "IntMatrix":
        return IntMatrix._trusted(self.ncols, self.nrows, self.columns())

    @property
    def T(self) -> "IntMatrix":
        return self.transpose()

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if self.ncols != other.nrows:
                raise ValueError(f"Shape mismatch: {self.shape} @ {other.shape}")
            out: Dict[int, Dict[int, int]] = {}
            for i, row in self._rows.items():
                acc: Dict[int, int] = {}
                for k, a in row.items():
                    orow = other._rows.get(k)
                    if not orow:
                        continue
                    for j, b in orow.items():
                        acc[j] = acc.get(j, 0) + a * b
                acc = {j: v for j, v in acc.items() if v}
                if acc:
                    out[i] = acc
            return IntMatrix._trusted(self.nrows, other.ncols, out)
        vec = list(other)
        if len(vec) != self.ncols:
            raise ValueError(f"Shape mismatch: {self.shape} @ vector of length {len(vec)}")
        result = [0] * self.nrows
        for i, row in self._rows.items():
            result[i] = sum(v * vec[j] for j, v in row.items())
        return result

    def _combine(self, other: "IntMatrix", sign: int) -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError(f"Shape mismatch: {self.shape} vs {other.shape}")
        out = {i: dict(r) for i, r in self._rows.items()}
        for i, row in other._rows.items():
            target = out.setdefault(i, {})
            for j, v in row.items():
                total = target.get(j, 0) + sign * v
                if total:
                    target[j] = total
                else:
                    target.pop(j, None)
            if not target:
                del out[i]
        return IntMatrix._trusted(self.nrows, self.ncols, out)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self._combine(other, -1)

    def scale(self, k: int) -> "IntMatrix":
        if k == 0:
            return IntMatrix.zeros(self.nrows, self.ncols)
        return IntMatrix._trusted(
            self.nrows, self.ncols, {i: {j: k * v for j, v in r.items()} for i, r in self._rows.items()}
        )

    def __neg__(self) -> "IntMatrix":
        return self.scale(-1)

    def kron(self, other: "IntMatrix") -> "IntMatrix":
        """Kronecker product; index (i, k) maps to i * other.nrows + k."""
        out = IntMatrix(self.nrows * other.nrows, self.ncols * other.ncols)
        rows: Dict[int, Dict[int, int]] = {}
        for i, row in self._rows.items():
            for k, orow in other._rows.items():
                rows[i * other.nrows + k] = {
                    j * other.ncols + l: a * b for j, a in row.items() for l, b in orow.items()
                }
        out._rows = rows
        return out

    def select_rows(self, indices: Sequence[int]) -> "IntMatrix":
        rows = {}
        for new, old in enumerate(indices):
            r = self._rows.get(old)
            if r:
                rows[new] = dict(r)
        return IntMatrix._trusted(len(indices), self.ncols, rows)

    def select_columns(self, indices: Sequence[int]) -> "IntMatrix":
        position = {old: new for new, old in enumerate(indices)}
        rows = {}
        for i, r in self._rows.items():
            kept = {position[j]: v for j, v in r.items() if j in position}
            if kept:
                rows[i] = kept
        return IntMatrix._trusted(self.nrows, len(indices), rows)

    @staticmethod
    def hstack(blocks: Sequence["IntMatrix"], nrows: int = None) -> "IntMatrix":
        if not blocks:
            return IntMatrix.zeros(nrows or 0, 0)
        nrows = blocks[0].nrows
        triplets = []
        offset = 0
        for b in blocks:
            if b.nrows != nrows:
                raise ValueError("hstack blocks must share the row count")
            triplets.extend((i, j + offset, v) for i, j, v in b.triplets())
            offset += b.ncols
        return IntMatrix(nrows, offset, triplets)

    @staticmethod
    def vstack(blocks: Sequence["IntMatrix"], ncols: int = None) -> "IntMatrix":
        if not blocks:
            return IntMatrix.zeros(0, ncols or 0)
        ncols = blocks[0].ncols
        triplets = []
        offset = 0
        for b in blocks:
            if b.ncols != ncols:
                raise ValueError("vstack blocks must share the column count")
            triplets.extend((i + offset, j, v) for i, j, v in b.triplets())
            offset += b.nrows
        return IntMatrix(offset, ncols, triplets)

    @staticmethod
    def block_diag(blocks: Sequence["IntMatrix"]) -> "IntMatrix":
        triplets = []
        r_off = c_off = 0
        for b in blocks:
            triplets.extend((i + r_off, j + c_off, v) for i, j, v in b.triplets())
            r_off += b.nrows
            c_off += b.ncols
        return IntMatrix(r_off, c_off, triplets)

    # --------------------------- Dunder ---------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, tuple(self.triplets())))

    def __repr__(self) -> str:
        if self.nrows * self.ncols <= 64:
            return f"IntMatrix({self.tolist()})"
        return f"IntMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"
