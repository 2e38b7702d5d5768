from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Type

from catalog.base import BaseConstructor
from catalog.standard import (
    AugmentationKernelConstructor,
    ConstantZConstructor,
    RepresentableConstructor,
    ShiftedPConstructor,
    SignPConstructor,
    SymmetricPConstructor,
    TensorPConstructor,
    TruncatedPConstructor,
    ZeroConstructor,
)
from core.errors import InputError, UnknownConstructorError
from core.exactalg import FgAbGroup
from core.presentation_io import load_functor
from core.tamemod import ColimElement, SigmaModule, TruncIFunctor, direct_sum

logger = logging.getLogger(__name__)

_CONSTRUCTORS: Dict[str, BaseConstructor] = {}

_CALL_RE = re.compile(r"^\s*([A-Za-z]+)\s*(?:\(\s*([-\d\s,]*)\s*\))?\s*$")
_COEFF_RE = re.compile(r"^\s*(Z|sign)\s*(?:/\s*(\d+))?\s*$")


def register_constructor(constructor_class: Type[BaseConstructor]) -> None:
    """
    Register a constructor class by its `name`.
    """
    constructor = constructor_class()
    _CONSTRUCTORS[constructor.name] = constructor


def _ensure_defaults_registered() -> None:
    if _CONSTRUCTORS:
        return
    register_constructor(RepresentableConstructor)
    register_constructor(ConstantZConstructor)
    register_constructor(ZeroConstructor)
    register_constructor(TruncatedPConstructor)
    register_constructor(AugmentationKernelConstructor)
    register_constructor(TensorPConstructor)
    register_constructor(SymmetricPConstructor)
    register_constructor(SignPConstructor)
    register_constructor(ShiftedPConstructor)


def get_available_constructors() -> Dict[str, BaseConstructor]:
    _ensure_defaults_registered()
    return dict(_CONSTRUCTORS)


def _split_sum(expr: str) -> List[str]:
    """Split on '+' outside parentheses."""
    parts, depth, current = [], 0, []
    for ch in expr:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def build_named(expr: str, N: int) -> TruncIFunctor:
    """Build ``"P(2)"``, ``"Z"``, ``"truncP(1,2)"`` or a sum such as ``"P(1)+Z"``."""
    _ensure_defaults_registered()
    parts = _split_sum(expr)
    if len(parts) > 1:
        return direct_sum(*(build_named(p, N) for p in parts)).renamed(expr.replace(" ", ""))
    m = _CALL_RE.match(expr)
    if not m or m.group(1) not in _CONSTRUCTORS:
        known = ", ".join(c.signature for c in _CONSTRUCTORS.values())
        raise UnknownConstructorError(f"Unknown functor {expr!r}; built-ins are {known}, or a JSON file path")
    constructor = _CONSTRUCTORS[m.group(1)]
    raw = m.group(2)
    args = [int(a) for a in raw.replace(",", " ").split()] if raw else []
    if len(args) not in constructor.arity:
        raise UnknownConstructorError(f"{constructor.signature} does not take {len(args)} arguments")
    if any(a < 0 for a in args):
        raise UnknownConstructorError(f"Negative argument in {expr!r}")
    logger.debug("building %s at N = %d", expr, N)
    return constructor.build(args, N)


def resolve_functor(text: str, N: int) -> TruncIFunctor:
    """A JSON file path if one exists, otherwise a built-in expression."""
    if text.lower().endswith(".json") or Path(text).is_file():
        return load_functor(text)
    return build_named(text, N)


def parse_coefficients(text: str, n: int) -> SigmaModule:
    """``Z``, ``Z/d``, ``sign``, ``sign/d`` or ``regular`` as an S_n-module."""
    if text.strip() == "regular":
        return SigmaModule.regular(n)
    m = _COEFF_RE.match(text)
    if not m:
        raise UnknownConstructorError(f"Unknown coefficients {text!r}; expected Z, Z/d, sign, sign/d or regular")
    d: Optional[int] = int(m.group(2)) if m.group(2) else None
    group = FgAbGroup.cyclic(d) if d else FgAbGroup.free(1)
    name = text.strip().replace(" ", "")
    if m.group(1) == "sign":
        return SigmaModule.sign(n, group, name=name)
    return SigmaModule.trivial(n, group, name=name)


_COEFFS_AT_RE = re.compile(r"^\s*\[([-\d\s,]*)\]\s*@\s*(\d+)\s*$")


def parse_element(F: TruncIFunctor, text: str) -> ColimElement:
    """
    ``"LABEL"`` (first level carrying the label), ``"LABEL@m"`` or ``"[c0,c1,...]@m"``.
    """
    m = _COEFFS_AT_RE.match(text)
    if m:
        coefficients = [int(c) for c in m.group(1).replace(",", " ").split()]
        level = int(m.group(2))
        if len(coefficients) != F.level(level).num_generators:
            raise InputError(
                f"Level {level} of {F.display_name} has {F.level(level).num_generators} generators, "
                f"got {len(coefficients)} coefficients"
            )
        return F.element(level, coefficients)
    body, at, level_text = text.strip().rpartition("@")
    if not at:
        body, level_text = level_text, ""
    if level_text:
        F.level(int(level_text))
        levels = [int(level_text)]
    else:
        levels = range(F.N + 1)
    for level in levels:
        if F.labels is not None and body in F.labels[level]:
            return F.element_by_label(level, body)
    raise InputError(f"No generator labelled {body!r} in {F.display_name} up to level {F.N}")
