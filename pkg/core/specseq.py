"""
Homotopy of free and semifree spectra as graded tame modules, and the E2 page
E2(p, q) = Tor_p(Z, pi_q) of the spectral sequence detecting true homotopy.

Only the page is computed. Differentials and the abutment are reported as
metadata, never as values.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import jsonschema
import pandas as pd
from tabulate import tabulate

from core.config import STEMS_FILE
from core.errors import MissingStemsError, PresentationError
from core.exactalg import FgAbGroup
from core.homalg import TorResult, coinvariants, tor, tor_cross_check
from core.pmod import p_functor
from core.tamemod import GradedTameModule, SigmaModule, tensor_sigma, tensor_with_group

logger = logging.getLogger(__name__)

DISCLAIMER = (
    "E2 page only: differentials d_r of bidegree (-r, r-1) are not computed "
    "and the abutment (true homotopy groups) is not claimed."
)

STEMS_SCHEMA = {
    "type": "object",
    "patternProperties": {
        "^[0-9]+$": {
            "type": "object",
            "properties": {
                "free_rank": {"type": "integer", "minimum": 0},
                "torsion": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            },
            "required": ["free_rank", "torsion"],
            "additionalProperties": False,
        }
    },
    "additionalProperties": False,
}


# ============ STEMS ============

@dataclass(frozen=True)
class StemsTable:
    """Coefficient groups indexed by degree; q -> pi_q."""

    groups: Mapping[int, FgAbGroup]
    source: str = ""

    def __getitem__(self, q: int) -> FgAbGroup:
        if q < 0:
            return FgAbGroup.trivial()
        try:
            return self.groups[q]
        except KeyError:
            raise MissingStemsError(f"No coefficient group for degree {q} in {self.source or 'stems table'}")

    def __contains__(self, q: int) -> bool:
        return q < 0 or q in self.groups

    @property
    def degrees(self) -> List[int]:
        return sorted(self.groups)


def stems_from_dict(data: dict, source: str = "") -> StemsTable:
    try:
        jsonschema.validate(data, STEMS_SCHEMA)
    except jsonschema.ValidationError as e:
        raise PresentationError(f"Invalid stems table {source}: {e.message}")
    return StemsTable(
        {int(q): FgAbGroup.from_invariants(v["free_rank"], v["torsion"]) for q, v in data.items()}, source
    )


def load_stems(path: Optional[str] = None) -> StemsTable:
    path = path or STEMS_FILE
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingStemsError(f"Stems file not found: {path}")
    except json.JSONDecodeError as e:
        raise PresentationError(f"Stems file {path} is not JSON: {e}")
    return stems_from_dict(data, str(path))


def sphere_coefficients(n: int, stems: StemsTable) -> StemsTable:
    """pi_q of the n-sphere: q -> stems[q - n]."""
    return StemsTable({q + n: g for q, g in stems.groups.items()}, f"{stems.source} shifted by {n}")


def sphere_family(n: int, stems: StemsTable, qs: Iterable[int]) -> Dict[int, SigmaModule]:
    """pi_q of the n-fold smash of circles with S_n permuting the factors (transpositions act by -1)."""
    return {q: SigmaModule.sign(n, stems[q - n], name=f"pi{q - n}") for q in qs}


# ============ GRADED CONSTRUCTORS ============

def free_homotopy(n: int, coefficients: StemsTable, k_range: Iterable[int], N: int) -> GradedTameModule:
    """Degree k is P_n (x) pi_(k+n)(K), with M acting on P_n only."""
    P = p_functor(n, N)
    members = {
        k: tensor_with_group(P, coefficients[k + n]).renamed(f"P({n}) x pi{k + n}").with_grade(k)
        for k in k_range
    }
    return GradedTameModule(members, f"free({n})")


def semifree_homotopy(
    n: int, family: Mapping[int, SigmaModule], k_range: Iterable[int], N: int, sign_twist: bool = True
) -> GradedTameModule:
    """Degree k is P_n (x)_(S_n) B_(k+n), twisted by the sign when ``sign_twist``."""
    members = {}
    for k in k_range:
        if k + n not in family:
            raise MissingStemsError(f"No S_{n}-module for degree {k + n}")
        members[k] = tensor_sigma(n, family[k + n], N, sign_twist).with_grade(k)
    return GradedTameModule(members, f"semifree({n})")


# ============ E2 PAGE ============

@dataclass(frozen=True)
class E2Cell:
    p: int
    q: int
    group: FgAbGroup
    method: str
    stabilized: bool
    complete: bool = True
    agree: Optional[bool] = None

    def to_dict(self) -> dict:
        out = {
            "p": self.p,
            "q": self.q,
            "value": str(self.group),
            "invariants": self.group.to_dict(),
            "method": self.method,
            "stabilized": self.stabilized,
            "complete": self.complete,
        }
        if self.agree is not None:
            out["agree"] = self.agree
        return out


@dataclass(frozen=True)
class E2Page:
    cells: Mapping[Tuple[int, int], E2Cell]
    p_max: int
    degrees: Tuple[int, ...]
    N: int
    method: str
    edge: Mapping[int, FgAbGroup] = field(default_factory=dict)
    L: Optional[int] = None
    name: str = ""

    def __getitem__(self, pq: Tuple[int, int]) -> FgAbGroup:
        return self.cells[pq].group

    def edge_consistent(self) -> bool:
        """Column p = 0 agrees with the coinvariants in every degree."""
        return all(self.cells[(0, q)].group.is_isomorphic(self.edge[q]) for q in self.degrees)

    def rationalized(self) -> pd.DataFrame:
        return self._frame(lambda c: c.group.free_rank)

    def collapses_rationally(self) -> bool:
        return all(c.group.free_rank == 0 for (p, _), c in self.cells.items() if p >= 1)

    def differentials(self) -> List[str]:
        """Differentials touching the window, as labels only."""
        out = []
        for r in range(2, self.p_max + 1):
            for q in self.degrees:
                for p in range(r, self.p_max + 1):
                    if q + r - 1 in self.degrees:
                        out.append(f"d{r}: E({p},{q}) -> E({p - r},{q + r - 1})")
        return out

    def _frame(self, value) -> pd.DataFrame:
        rows = {q: {p: value(self.cells[(p, q)]) for p in range(self.p_max + 1)} for q in self.degrees}
        frame = pd.DataFrame.from_dict(rows, orient="index")
        frame.index.name = "q"
        frame.columns = [f"p={p}" for p in range(self.p_max + 1)]
        return frame.sort_index(ascending=False)

    def to_frame(self) -> pd.DataFrame:
        def render(cell: E2Cell) -> str:
            text = str(cell.group)
            if not cell.stabilized:
                text += " *"
            if not cell.complete:
                text += " ?"
            if cell.agree is False:
                text += " !"
            return text

        return self._frame(render)

    def render_text(self) -> str:
        frame = self.to_frame()
        table = tabulate(frame, headers="keys", tablefmt="simple", stralign="left")
        legend = "* not stabilized between N-1 and N   ? resolution search incomplete   ! engines disagree"
        lines = [table, "", legend, f"edge row equals coinvariants: {self.edge_consistent()}",
                 f"collapses rationally: {self.collapses_rationally()}", DISCLAIMER]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "N": self.N,
            "L": self.L,
            "p_max": self.p_max,
            "method": self.method,
            "degrees": list(self.degrees),
            "cells": [self.cells[k].to_dict() for k in sorted(self.cells, key=lambda pq: (pq[1], pq[0]))],
            "edge": {str(q): str(g) for q, g in sorted(self.edge.items())},
            "edge_consistent": self.edge_consistent(),
            "rational_ranks": {
                str(q): [self.cells[(p, q)].group.free_rank for p in range(self.p_max + 1)] for q in self.degrees
            },
            "collapses_rationally": self.collapses_rationally(),
            "differentials": self.differentials(),
            "disclaimer": DISCLAIMER,
        }


def _column(F, p_max: int, method: str, L: Optional[int]) -> List[E2Cell]:
    q = F.grade
    if method == "both":
        check = tor_cross_check(F, p_max, L)
        return [
            E2Cell(b.degree, q, b.value, "both", b.stabilized and r.stabilized, r.complete,
                   b.value.is_isomorphic(r.value))
            for b, r in zip(check["bar"], check["pres"])
        ]
    results: List[TorResult] = tor(F, p_max, method, L)
    return [E2Cell(r.degree, q, r.value, method, r.stabilized, r.complete) for r in results]


def assemble_e2(
    G: GradedTameModule, p_max: int, method: str = "bar", search_level: Optional[int] = None, workers: int = 4
) -> E2Page:
    """Fill E2(p, q) for every degree of G and p <= p_max; degrees are computed concurrently."""
    degrees = tuple(G.degrees)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        columns = list(pool.map(lambda q: _column(G[q].with_grade(q), p_max, method, search_level), degrees))
        edges = list(pool.map(lambda q: coinvariants(G[q]).group, degrees))
    cells = {(c.p, c.q): c for col in columns for c in col}
    logger.debug("E2 page of %s: %d cells", G.name, len(cells))
    return E2Page(cells, p_max, degrees, G.N, method, dict(zip(degrees, edges)), search_level, G.name)
