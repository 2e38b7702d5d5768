import numpy as np
import pytest

from core.errors import IllDefinedHomError, NotAComplexError
from core.exactalg import (
    ChainComplex,
    FgAbGroup,
    GroupHom,
    LatticeBasis,
    canonical_chain,
    determinant,
    hom_kernel,
    smith_normal_form,
)
from core.intmatrix import IntMatrix


class TestSmithNormalForm:
    def test_two_by_two(self):
        m = IntMatrix.from_rows([[2, 4], [6, 8]])
        S, U, V = smith_normal_form(m)
        assert S.tolist() == [[2, 0], [0, 4]]
        product = U.to_dense().dot(m.to_dense()).dot(V.to_dense())
        assert np.array_equal(product, S.to_dense())

    def test_rectangular_rank_deficient(self):
        m = IntMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
        S, _, _ = smith_normal_form(m)
        assert S.tolist() == [[1, 0, 0], [0, 0, 0]]

    def test_canonical_chain_makes_divisibility(self):
        assert canonical_chain([3, 2]) == [1, 6]
        assert canonical_chain([4, 2, 0]) == [2, 4]

    def test_determinant(self):
        assert determinant(IntMatrix.from_rows([[2, 1], [1, 1]])) == 1
        assert determinant(IntMatrix.from_rows([[0, 1], [1, 0]])) == -1
        assert determinant(IntMatrix.from_rows([[2, 4], [1, 2]])) == 0


class TestFgAbGroup:
    def test_invariants_and_text(self):
        assert str(FgAbGroup.from_invariants(1, [2])) == "Z + Z/2"
        assert str(FgAbGroup.trivial()) == "0"
        assert str(FgAbGroup.free(3)) == "Z^3"

    def test_relations_are_normalized(self):
        G = FgAbGroup(2, [[2, 0], [0, 3]])
        assert G.decompose() == (0, (6,))
        assert G.is_isomorphic(FgAbGroup.cyclic(6))
        assert G.order() == 6

    def test_element_equality_respects_relations(self):
        G = FgAbGroup.cyclic(4)
        assert G.element([5]) == G.element([1])
        assert G.element([4]).is_zero()

    def test_tensor(self):
        G = FgAbGroup.cyclic(4).tensor(FgAbGroup.cyclic(6))
        assert G.decompose() == (0, (2,))

    def test_normal_form_round_trip(self):
        G = FgAbGroup(2, [[2, 2]])
        D, to_d, from_d = G.normal_form()
        assert D.is_isomorphic(G)
        assert from_d.compose(to_d).equals(GroupHom.identity(G))


class TestGroupHom:
    def test_multiplication_by_two_on_z(self):
        Z = FgAbGroup.free(1)
        f = GroupHom(Z, Z, [[2]])
        assert f.is_injective()
        assert not f.is_surjective()
        C, _ = f.cokernel()
        assert str(C) == "Z/2"
        K, _ = f.kernel()
        assert K.is_trivial()

    def test_preimage(self):
        G = FgAbGroup.cyclic(4)
        f = GroupHom(G, G, [[2]])
        assert f.preimage([2]) is not None
        assert f(f.preimage([2])) == G.element([2])
        assert f.preimage([1]) is None

    def test_kernel_of_reduction(self):
        Z4, Z2 = FgAbGroup.cyclic(4), FgAbGroup.cyclic(2)
        K, incl = GroupHom(Z4, Z2, [[1]]).kernel()
        assert str(K) == "Z/2"
        assert GroupHom(Z4, Z2, [[1]]).compose(incl).is_zero()

    def test_ill_defined_matrix_is_rejected(self):
        with pytest.raises(IllDefinedHomError):
            GroupHom(FgAbGroup.cyclic(2), FgAbGroup.free(1), [[1]])

    def test_inverse_of_isomorphism(self):
        G = FgAbGroup.free(2)
        f = GroupHom(G, G, [[2, 1], [1, 1]])
        assert f.is_isomorphism()
        assert f.inverse().compose(f).equals(GroupHom.identity(G))

    def test_factor_through_image(self):
        Z = FgAbGroup.free(1)
        f = GroupHom(Z, Z, [[4]])
        g = GroupHom(Z, Z, [[2]])
        h = f.factor_through(g)
        assert h.matrix.tolist() == [[2]]
        with pytest.raises(ValueError):
            g.factor_through(f)


class TestLatticeBasis:
    def test_membership(self):
        lattice = LatticeBasis([[2, 0], [0, 3]], 2)
        assert len(lattice) == 2
        assert [4, 3] in lattice
        assert [1, 0] not in lattice


class TestChainComplex:
    def test_homology_of_multiplication(self):
        Z = FgAbGroup.free(1)
        C = ChainComplex([Z, Z], [GroupHom(Z, Z, [[2]])])
        assert str(C.homology(0)) == "Z/2"
        assert C.homology(1).is_trivial()
        assert C.homology(5).is_trivial()

    def test_homology_with_torsion_groups(self):
        Z, Z4 = FgAbGroup.free(1), FgAbGroup.cyclic(4)
        C = ChainComplex([Z4, Z], [GroupHom(Z, Z4, [[2]])])
        assert str(C.homology(0)) == "Z/2"
        assert str(C.homology(1)) == "Z"

    def test_explicit_homology_agrees(self):
        Z = FgAbGroup.free(1)
        Z2 = FgAbGroup.free(2)
        C = ChainComplex([Z, Z2, Z], [GroupHom(Z2, Z, [[1, -1]]), GroupHom(Z, Z2, [[1], [1]])])
        H, _ = C.homology_explicit(1)
        assert H.is_isomorphic(C.homology(1))
        assert H.is_trivial()

    def test_nonzero_square_is_rejected(self):
        Z = FgAbGroup.free(1)
        one = GroupHom(Z, Z, [[1]])
        with pytest.raises(NotAComplexError):
            ChainComplex([Z, Z, Z], [one, one])


def _random_matrix(rng, nrows, ncols):
    return IntMatrix.from_rows(rng.integers(-6, 7, size=(nrows, ncols)).tolist(), ncols=ncols)


class TestSmithInvariants:
    @pytest.mark.parametrize("seed", range(12))
    def test_random_matrices(self, seed):
        rng = np.random.default_rng(seed)
        nrows, ncols = (int(x) for x in rng.integers(1, 6, size=2))
        m = _random_matrix(rng, nrows, ncols)
        S, U, V = smith_normal_form(m)
        assert np.array_equal(U.to_dense().dot(m.to_dense()).dot(V.to_dense()), S.to_dense())
        assert all(S.entry(i, j) == 0 for i in range(nrows) for j in range(ncols) if i != j)
        diagonal = [S.entry(i, i) for i in range(min(nrows, ncols))]
        assert all(d >= 0 for d in diagonal)
        for a, b in zip(diagonal, diagonal[1:]):
            assert (b == 0) if a == 0 else (b % a == 0)
        assert determinant(U) in (1, -1)
        assert determinant(V) in (1, -1)

    def test_rank_deficient_random(self):
        rng = np.random.default_rng(99)
        a = _random_matrix(rng, 4, 2)
        b = _random_matrix(rng, 2, 4)
        S, _, _ = smith_normal_form(a @ b)
        assert sum(1 for i in range(4) if S.entry(i, i)) <= 2

    def test_diagonal_relations(self):
        assert FgAbGroup(2, [[4, 0], [0, 6]]).decompose() == (0, (2, 12))

    def test_zero_row(self):
        m = IntMatrix.zeros(1, 3)
        S, U, V = smith_normal_form(m)
        assert S.is_zero()
        assert determinant(U) in (1, -1)
        assert determinant(V) in (1, -1)
        assert FgAbGroup(3, [[0, 0, 0]]).decompose() == (3, ())


class TestHomKernel:
    def test_sum_map(self):
        Z, Z2 = FgAbGroup.free(1), FgAbGroup.free(2)
        f = GroupHom(Z2, Z, [[1, 1]])
        K, incl = hom_kernel(f)
        assert K.decompose() == (1, ())
        assert f.compose(incl).is_zero()
        assert incl.is_injective()

    def test_reduction_mod_four(self):
        Z, Z4 = FgAbGroup.free(1), FgAbGroup.cyclic(4)
        f = GroupHom(Z, Z4, [[1]])
        K, incl = hom_kernel(f)
        assert K.decompose() == (1, ())
        assert f.compose(incl).is_zero()
        assert incl.preimage([4]) is not None
        assert incl.preimage([2]) is None


class TestSimplicialHomology:
    def _boundary(self):
        Z, Z3 = FgAbGroup.free(1), FgAbGroup.free(3)
        d1 = GroupHom(Z3, Z3, [[-1, -1, 0], [1, 0, -1], [0, 1, 1]])
        d2 = GroupHom(Z, Z3, [[1], [-1], [1]])
        return Z, Z3, d1, d2

    def test_hollow_triangle_is_a_circle(self):
        _, Z3, d1, _ = self._boundary()
        C = ChainComplex([Z3, Z3], [d1])
        assert str(C.homology(0)) == "Z"
        assert str(C.homology(1)) == "Z"

    def test_filled_triangle_is_contractible(self):
        Z, Z3, d1, d2 = self._boundary()
        C = ChainComplex([Z3, Z3, Z], [d1, d2])
        assert [str(C.homology(p)) for p in range(3)] == ["Z", "0", "0"]
