from __future__ import annotations

from typing import List

from catalog.base import BaseConstructor
from core.errors import UnknownConstructorError
from core.exactalg import FgAbGroup
from core.injcat import InjWord
from core.pmod import PMap, p_functor, pmap_natural
from core.tamemod import (
    SigmaModule,
    TruncIFunctor,
    constant_functor,
    functor_kernel,
    shift,
    tensor_sigma,
    tensor_with_group,
    truncate_above,
    zero_functor,
)


def _positive(d: int) -> int:
    if d < 2:
        raise UnknownConstructorError(f"Coefficient modulus must be at least 2, got {d}")
    return d


class RepresentableConstructor(BaseConstructor):
    name = "P"
    signature = "P(n)"
    arity = [1]
    description = "Free abelian groups on injective words n -> m"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        return p_functor(args[0], N)


class ConstantZConstructor(BaseConstructor):
    name = "Z"
    signature = "Z"
    description = "Constant functor Z, trivial action"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        return constant_functor(FgAbGroup.free(1), N, name="Z")


class ZeroConstructor(BaseConstructor):
    name = "zero"
    signature = "zero"
    description = "Zero functor"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        return zero_functor(N)


class TruncatedPConstructor(BaseConstructor):
    name = "truncP"
    signature = "truncP(n,i)"
    arity = [2]
    description = "P(n) with every level above i set to zero"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        n, i = args
        return truncate_above(p_functor(n, N), i).renamed(f"truncP({n},{i})")


class AugmentationKernelConstructor(BaseConstructor):
    name = "kerP"
    signature = "kerP(n)"
    arity = [1]
    description = "Kernel of the augmentation P(n) -> P(0)"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        n = args[0]
        augmentation = PMap.single(InjWord((), n))
        K, _ = functor_kernel(pmap_natural(augmentation, N))
        return K.renamed(f"kerP({n})")


class TensorPConstructor(BaseConstructor):
    name = "Ptensor"
    signature = "Ptensor(n,d)"
    arity = [2]
    description = "P(n) tensored levelwise with Z/d"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        n, d = args
        return tensor_with_group(p_functor(n, N), FgAbGroup.cyclic(_positive(d))).renamed(f"Ptensor({n},{d})")


class SymmetricPConstructor(BaseConstructor):
    name = "Psym"
    signature = "Psym(n) | Psym(n,d)"
    arity = [1, 2]
    description = "P(n) tensored over S_n with Z or Z/d, trivial action"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        n = args[0]
        group = FgAbGroup.cyclic(_positive(args[1])) if len(args) == 2 else FgAbGroup.free(1)
        name = "Psym(" + ",".join(map(str, args)) + ")"
        return tensor_sigma(n, SigmaModule.trivial(n, group), N).renamed(name)


class SignPConstructor(BaseConstructor):
    name = "Psgn"
    signature = "Psgn(n)"
    arity = [1]
    description = "P(n) tensored over S_n with Z, twisted by the sign"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        n = args[0]
        return tensor_sigma(n, SigmaModule.trivial(n, FgAbGroup.free(1)), N, sign_twist=True).renamed(f"Psgn({n})")


class ShiftedPConstructor(BaseConstructor):
    name = "shiftP"
    signature = "shiftP(n)"
    arity = [1]
    description = "Shift of P(n), built one level higher so the result keeps truncation N"

    def build(self, args: List[int], N: int) -> TruncIFunctor:
        n = args[0]
        return shift(p_functor(n, N + 1)).renamed(f"shiftP({n})")
