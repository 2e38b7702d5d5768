"""
JSON formats for functor presentations (tamemod-v1) and P-maps (pmap-v1).

Matrices are lists of rows; rows index target generators and columns index
source generators. Every file is checked against its schema before any
object is built.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Tuple, Union

import jsonschema

from core.errors import PresentationError, WordSyntaxError
from core.exactalg import FgAbGroup, GroupHom
from core.injcat import format_word, parse_word
from core.intmatrix import IntMatrix
from core.pmod import PMap, PSum, pmap_cokernel
from core.tamemod import TruncIFunctor

logger = logging.getLogger(__name__)

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}

FUNCTOR_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": "tamemod-v1"},
        "name": {"type": "string"},
        "N": {"type": "integer", "minimum": 0},
        "grade": {"type": "integer"},
        "levels": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "generators": {"type": "integer", "minimum": 0},
                    "relations": _MATRIX,
                    "labels": {"type": "array", "items": {"type": "string"}},
                },
                "required": ["generators"],
                "additionalProperties": False,
            },
        },
        "transpositions": {
            "type": "object",
            "patternProperties": {r"^\s*\d+\s*,\s*\d+\s*$": _MATRIX},
            "additionalProperties": False,
        },
        "stab": {"type": "array", "items": _MATRIX},
    },
    "required": ["N", "levels", "transpositions", "stab"],
    "additionalProperties": False,
}

PMAP_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": "pmap-v1"},
        "name": {"type": "string"},
        "N": {"type": "integer", "minimum": 0},
        "source": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "target": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "entries": {
            "type": "object",
            "patternProperties": {
                r"^\s*\d+\s*,\s*\d+\s*$": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [{"type": "integer"}, {"type": "string"}],
                        "minItems": 2,
                        "maxItems": 2,
                    },
                }
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema", "N", "source", "target", "entries"],
    "additionalProperties": False,
}


def _check(data, schema: dict, source: str) -> None:
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise PresentationError(f"{source or 'input'}: {e.message} (at {where})")


def _pair(key: str) -> Tuple[int, int]:
    a, b = key.split(",")
    return int(a), int(b)


def _matrix(rows, nrows: int, ncols: int, what: str) -> IntMatrix:
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise PresentationError(f"{what} must be a {nrows}x{ncols} matrix")
    return IntMatrix.from_rows(rows, ncols=ncols)


# ============ FUNCTORS ============

def functor_from_dict(data: dict, source: str = "") -> TruncIFunctor:
    """Build an unvalidated functor from a tamemod-v1 document."""
    _check(data, FUNCTOR_SCHEMA, source)
    N = data["N"]
    if len(data["levels"]) != N + 1 or len(data["stab"]) != N:
        raise PresentationError(f"{source or 'input'}: N = {N} needs {N + 1} levels and {N} stab matrices")
    gens = [lv["generators"] for lv in data["levels"]]
    levels = [
        FgAbGroup(g, _matrix(lv.get("relations", []), len(lv.get("relations", [])), g, f"relations of level {n}"))
        for n, (g, lv) in enumerate(zip(gens, data["levels"]))
    ]
    trans = {}
    for key, rows in data["transpositions"].items():
        n, i = _pair(key)
        if not (2 <= n <= N and 1 <= i < n):
            raise PresentationError(f"{source or 'input'}: no transposition s_{i} at level {n}")
        trans[(n, i)] = GroupHom(levels[n], levels[n], _matrix(rows, gens[n], gens[n], f"s_{i} at level {n}"),
                                 check=False)
    stab = [
        GroupHom(levels[n], levels[n + 1], _matrix(rows, gens[n + 1], gens[n], f"stab[{n}]"), check=False)
        for n, rows in enumerate(data["stab"])
    ]
    labels = None
    if all("labels" in lv for lv in data["levels"]):
        labels = [tuple(lv["labels"]) for lv in data["levels"]]
        if any(len(lab) != g for lab, g in zip(labels, gens)):
            raise PresentationError(f"{source or 'input'}: one label per generator is required")
    try:
        return TruncIFunctor(N, levels, trans, stab, data.get("grade", 0), data.get("name", ""), labels)
    except ValueError as e:
        raise PresentationError(f"{source or 'input'}: {e}")


def functor_to_dict(F: TruncIFunctor) -> dict:
    levels = []
    for n, g in enumerate(F.levels):
        entry = {"generators": g.num_generators, "relations": g.relations.tolist()}
        if F.labels is not None:
            entry["labels"] = list(F.labels[n])
        levels.append(entry)
    return {
        "schema": "tamemod-v1",
        "name": F.name,
        "N": F.N,
        "grade": F.grade,
        "levels": levels,
        "transpositions": {f"{n},{i}": s.matrix.tolist() for (n, i), s in sorted(F.transpositions.items())},
        "stab": [s.matrix.tolist() for s in F.stab],
    }


# ============ P-MAPS ============

def pmap_from_dict(data: dict, source: str = "") -> Tuple[PMap, int]:
    _check(data, PMAP_SCHEMA, source)
    entries = {}
    for key, combo in data["entries"].items():
        try:
            entries[_pair(key)] = tuple((int(c), parse_word(w)) for c, w in combo)
        except WordSyntaxError as e:
            raise PresentationError(f"{source or 'input'}: entry {key}: {e}")
    try:
        f = PMap(PSum(tuple(data["source"])), PSum(tuple(data["target"])), entries)
    except ValueError as e:
        raise PresentationError(f"{source or 'input'}: {e}")
    return f, data["N"]


def pmap_to_dict(f: PMap, N: int) -> dict:
    return {
        "schema": "pmap-v1",
        "N": N,
        "source": list(f.source.summands),
        "target": list(f.target.summands),
        "entries": {
            f"{i},{j}": [[c, format_word(w)] for c, w in combo] for (i, j), combo in sorted(f.entries.items())
        },
    }


# ============ FILES ============

def read_json(path: Union[str, Path]):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise PresentationError(f"File not found: {path}")
    except json.JSONDecodeError as e:
        raise PresentationError(f"{path} is not valid JSON: {e}")


def load_functor(path: Union[str, Path]) -> TruncIFunctor:
    """Read a tamemod-v1 functor, or the cokernel functor of a pmap-v1 map."""
    data = read_json(path)
    if not isinstance(data, dict):
        raise PresentationError(f"{path}: expected a JSON object")
    if data.get("schema") == "pmap-v1":
        f, N = pmap_from_dict(data, str(path))
        F = pmap_cokernel(f, N)
        return F.renamed(data.get("name", F.name))
    F = functor_from_dict(data, str(path))
    logger.debug("loaded %s from %s (N = %d)", F.display_name, path, F.N)
    return F


def save_functor(F: TruncIFunctor, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(functor_to_dict(F), indent=2, sort_keys=True) + "\n", encoding="utf-8")
