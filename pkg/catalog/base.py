from __future__ import annotations

from abc import ABC, abstractmethod
from typing import List

from core.tamemod import TruncIFunctor


class BaseConstructor(ABC):
    """
    Named recipe for a built-in truncated I-functor.

    Notes:
    - ``arity`` lists the accepted numbers of integer arguments.
    - Constructors never read files; the registry handles paths.
    """

    name: str = ""
    signature: str = ""
    arity: List[int] = [0]
    description: str = ""

    @abstractmethod
    def build(self, args: List[int], N: int) -> TruncIFunctor:
        """Return the functor for ``args`` truncated at N."""
