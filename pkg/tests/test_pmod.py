import pytest

from catalog import build_named
from core.errors import FiltrationNotVerifiedError, IncompatibleProElementError, TruncationExceededError
from core.exactalg import FgAbGroup
from core.injcat import InjWord, Perm, compose, enumerate_inj, shift_word
from core.pmod import (
    PMap,
    PSum,
    ProElement,
    act_pro_element,
    basis_element,
    evaluate_hom,
    evaluate_pmap,
    hom_from_P,
    kappa,
    p_functor,
    pmap_cokernel,
    pmap_natural,
    quotient_In,
    resolve,
)
from core.tamemod import act, constant_functor, eq_up_to, m_act, shift


def _const_z(N):
    return constant_functor(FgAbGroup.free(1), N, name="Z")


class TestKappa:
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_certified_at_truncation_five(self, n):
        iso = kappa(n, 5)
        assert iso.certified
        certificates = iso.certificates()
        assert [c["level"] for c in certificates] == list(range(6))
        assert all(c["isomorphism"] and c["round_trip"] for c in certificates)

    def test_needs_room_for_the_new_point(self):
        with pytest.raises(TruncationExceededError):
            kappa(3, 3)


class TestRepresentability:
    @pytest.mark.parametrize("W_name", ["P(1)", "P(2)", "Z"])
    @pytest.mark.parametrize("N", [4, 5])
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_round_trip(self, W_name, n, N):
        W = build_named(W_name, N)
        for j in range(W.level(n).num_generators):
            x = W.generator_element(n, j)
            phi = hom_from_P(n, W, x).natural_map().validate()
            back = evaluate_hom(phi, n)
            assert eq_up_to(back, x).level == n
            again = hom_from_P(n, W, back).natural_map()
            assert all(a.equals(b) for a, b in zip(phi.components, again.components))

    def test_image_of_word_is_the_action(self):
        P = p_functor(1, 4)
        x = P.element_by_label(1, "(1)")
        rep = hom_from_P(1, P, x)
        assert rep.image_of(InjWord((3,), 3)).describe() == "[(3) @ 3]"
        assert rep.evaluate().describe() == "[(1) @ 1]"

    @pytest.mark.parametrize("W_name", ["P(1)", "P(2)", "Z"])
    def test_shift_adjunction(self, W_name):
        W = build_named(W_name, 4)
        S = shift(W)
        for n in range(3):
            assert S.level(n).num_generators == W.level(n + 1).num_generators
            for j in range(S.level(n).num_generators):
                down = hom_from_P(n + 1, W, W.generator_element(n + 1, j))
                up = hom_from_P(n, S, S.generator_element(n, j))
                for m in range(n, S.N + 1):
                    for u in enumerate_inj(n, m):
                        assert up.image_of(u).value == down.image_of(shift_word(u)).value, (n, j, u)


class TestPMaps:
    def test_augmentation_cokernel(self):
        aug = PMap.single(InjWord((), 1))
        assert aug.source == PSum((1,))
        assert aug.target == PSum((0,))
        C = pmap_cokernel(aug, 3)
        assert [str(g) for g in C.levels] == ["Z", "0", "0", "0"]

    def test_realized_map_is_natural(self):
        f = PMap.single(InjWord((2,), 2), coefficient=3)
        phi = pmap_natural(f, 3).validate()
        assert phi.components[2].matrix.shape == (2, 2)

    def test_evaluation_composes_words(self):
        f = PMap.single(InjWord((2,), 2))
        M = evaluate_pmap(f, 2)
        # the generator of P(2) at level 2 is id; its image is the word (2) in P(1)(2)
        assert M.matrix.tolist() == [[0, 1], [1, 0]]

    def test_composition_and_identity(self):
        f = PMap.single(InjWord((2,), 2))
        assert PMap.identity(f.target).compose(f).entries == f.entries
        g = PMap.single(InjWord((), 1))
        gf = g.compose(f)
        assert gf.entries == {(0, 0): ((1, InjWord((), 2)),)}
        assert gf.augmented().tolist() == [[1]]

    def test_single_word_acts_on_every_basis_element(self):
        w = InjWord((3, 1), 3)
        f = PMap.single(w)
        e = basis_element(2, 4, w.values, level=3)
        for k in (3, 4):
            M = evaluate_pmap(f, k)
            for idx, u in enumerate(enumerate_inj(3, k)):
                assert tuple(M(M.source.generator(idx)).coefficients) == tuple(act(u, e).value.coefficients), u

    def test_composition_is_associative(self):
        f = PMap(PSum((3,)), PSum((2,)), {(0, 0): ((1, InjWord((1, 3), 3)), (-1, InjWord((3, 2), 3)))})
        g = PMap(PSum((2,)), PSum((1, 0)), {(0, 0): ((2, InjWord((2,), 2)),), (1, 0): ((1, InjWord((), 2)),)})
        h = PMap(PSum((1, 0)), PSum((0,)), {(0, 0): ((1, InjWord((), 1)),), (0, 1): ((-1, InjWord((), 0)),)})
        assert h.compose(g).compose(f).entries == h.compose(g.compose(f)).entries
        for m in (3, 4):
            assert evaluate_pmap(g.compose(f), m).equals(evaluate_pmap(g, m).compose(evaluate_pmap(f, m)))

    def test_representables_are_pairwise_distinct(self):
        for n in range(3):
            for m in range(n + 1, 4):
                low, high = p_functor(n, 4), p_functor(m, 4)
                assert high.level(n).num_generators == 0
                assert not low.level(n).is_isomorphic(high.level(n))

    def test_words_must_fit_the_summands(self):
        with pytest.raises(ValueError):
            PMap(PSum((1,)), PSum((1,)), {(0, 0): ((1, InjWord((1, 2), 2)),)})


class TestQuotients:
    def test_class_of_prefix(self):
        Q = quotient_In(2, 4)
        assert Q.class_of(InjWord((3, 1, 4), 4)).describe() == "[(3,1) @ 4]"
        assert Q.projection().source == PSum((3,))

    def test_tower_projection_commutes_with_action(self):
        upper_q, lower_q = quotient_In(2, 4), quotient_In(1, 4)
        drop = evaluate_pmap(lower_q.projection(), 4)
        for f in enumerate_inj(2, 3):
            for g in enumerate_inj(3, 4):
                upper = m_act(g, upper_q.class_of(f))
                lower = m_act(g, lower_q.class_of(f))
                assert tuple(drop(upper.value).coefficients) == tuple(lower.value.coefficients), (f, g)
                assert eq_up_to(upper, upper_q.class_of(compose(g, f))).equal

    def test_too_short_prefix(self):
        with pytest.raises(ValueError):
            quotient_In(2, 4).class_of(InjWord((1,), 1))


class TestProElements:
    def test_identity_acts_trivially(self):
        e = basis_element(2, 4, (2, 1))
        assert eq_up_to(act_pro_element(ProElement.identity(2), e), e).equal

    def test_single_monoid_element(self):
        P = p_functor(1, 4)
        e = P.element_by_label(1, "(1)")
        f = Perm((2, 1), 2)
        result = act_pro_element(ProElement.from_prefix(f), e)
        assert eq_up_to(result, m_act(f, e)).equal

    def test_default_depth_needs_a_determined_filtration(self):
        e = basis_element(2, 3, (2, 3))
        with pytest.raises(FiltrationNotVerifiedError, match="pass k explicitly"):
            act_pro_element(ProElement.identity(2), e)
        assert eq_up_to(act_pro_element(ProElement.identity(3), e, k=3), e).equal

    def test_tower_from_component_projects(self):
        a = ProElement.from_component({(1, 2): 1, (2, 1): -1})
        assert a.depth == 2
        assert a.components[1] == {(1,): 1, (2,): -1}
        assert a.components[0] == {}
        a.check_compatible()

    def test_incompatible_tower(self):
        a = ProElement(({(): 1}, {(1,): 1}, {(2, 1): 1}))
        with pytest.raises(IncompatibleProElementError):
            a.check_compatible()

    def test_component_must_be_injective(self):
        with pytest.raises(IncompatibleProElementError):
            ProElement(({(): 1}, {(1, 1): 1}))


class TestResolution:
    def test_representable_is_its_own_resolution(self):
        R = resolve(p_functor(1, 3), 2)
        assert R.terms[0] == PSum((1,))
        assert R.exhausted
        assert R.complete_through(2)
        assert all(row["exact"] for row in R.verify_exact())

    def test_constant_functor(self):
        R = resolve(_const_z(3), 1)
        assert R.terms[0] == PSum((0,))
        assert R.exhausted

    def test_augmentation_kernel(self):
        R = resolve(build_named("kerP(1)", 3), 2)
        assert R.terms[0].summands[0] == 2
        assert all(row["exact"] for row in R.verify_exact())
        assert R.complete_through(0)

    def test_low_search_level_is_flagged(self):
        R = resolve(p_functor(2, 3), 1, search_level=1)
        assert R.flags[0]["complete"] is False
        assert R.flags[0]["gap_level"] == 2
        assert not R.complete_through(0)
