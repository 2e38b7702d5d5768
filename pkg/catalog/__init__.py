"""
Catalog of built-in functors.

Provides:
- Constructor base interface (`BaseConstructor`)
- Registry helpers (`register_constructor`, `get_available_constructors`, `build_named`, `resolve_functor`)
- Coefficient parsing for symmetric-group modules (`parse_coefficients`)
- Element syntax for colimit elements (`parse_element`)
"""

from catalog.base import BaseConstructor
from catalog.registry import (
    build_named,
    get_available_constructors,
    parse_coefficients,
    parse_element,
    register_constructor,
    resolve_functor,
)

__all__ = [
    "BaseConstructor",
    "register_constructor",
    "get_available_constructors",
    "build_named",
    "resolve_functor",
    "parse_coefficients",
    "parse_element",
]
