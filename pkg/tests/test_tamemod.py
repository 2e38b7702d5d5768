import pytest

from core.errors import FiltrationNotVerifiedError, InvalidActionError, TruncationExceededError
from core.exactalg import FgAbGroup, GroupHom
from core.injcat import InjWord, compose, d_prefix, enumerate_inj, sign, transposition
from core.pmod import basis_element, p_functor
from core.tamemod import (
    GradedTameModule,
    NaturalMap,
    SigmaModule,
    act,
    check_d_surjective_up_to,
    constant_functor,
    d_stage,
    direct_sum,
    eq_up_to,
    exact_filtration,
    extension_closure_check,
    filtration_le,
    filtration_report,
    functor_cokernel,
    functor_kernel,
    induce,
    is_semistable_up_to,
    m_act,
    require_filtration,
    restrict,
    shift,
    tensor_sigma,
    tensor_with_group,
    truncate_above,
    zero_functor,
)

Z = FgAbGroup.free(1)


@pytest.fixture
def const_z():
    return constant_functor(Z, 4, name="Z")


@pytest.fixture
def p1():
    return p_functor(1, 4)


class TestRepresentables:
    def test_ranks_are_falling_factorials(self):
        P = p_functor(2, 4)
        assert [g.num_generators for g in P.levels] == [0, 0, 2, 6, 12]
        assert P.is_valid

    def test_labels(self):
        P = p_functor(2, 3)
        assert P.labels[2] == ("(1,2)", "(2,1)")

    def test_level_outside_truncation(self, p1):
        with pytest.raises(TruncationExceededError):
            p1.level(5)


class TestAction:
    def test_word_action_on_p1(self):
        P = p_functor(1, 3)
        x = P.element_by_label(1, "(1)")
        y = m_act(InjWord((3, 1), 3), x)
        assert y.describe() == "[(3) @ 3]"

    def test_act_checks_source(self, p1):
        x = p1.element_by_label(1, "(1)")
        with pytest.raises(ValueError):
            act(InjWord((1, 2), 2), x)

    def test_injective_action_spot_check(self):
        P = p_functor(1, 4)
        e1, e2 = P.element_by_label(1, "(1)"), P.element_by_label(2, "(2)")
        f = InjWord((2, 3), 3)
        assert not eq_up_to(m_act(f, e1), m_act(f, e2)).equal
        assert not eq_up_to(e1, e2).equal

    @pytest.mark.parametrize("F", [
        p_functor(2, 4),
        tensor_sigma(2, SigmaModule.trivial(2, Z), 4),
        truncate_above(p_functor(1, 4), 3),
    ], ids=["P(2)", "Sym(2)", "P(1)<=3"])
    def test_action_is_functorial(self, F):
        for j in range(F.level(2).num_generators):
            x = F.generator_element(2, j)
            assert act(InjWord.identity(2), x).value == x.value
            for f in enumerate_inj(2, 3):
                fx = act(f, x)
                for g in enumerate_inj(3, 4):
                    assert act(compose(g, f), x).value == act(g, fx).value, (j, f, g)


class TestEquality:
    def test_same_element_born_at_different_levels(self, p1):
        a = p1.element_by_label(1, "(1)")
        b = p1.element_by_label(2, "(1)")
        verdict = eq_up_to(a, b)
        assert verdict.equal
        assert verdict.level == 2
        assert verdict.verdict == "equal_at_level_2"

    def test_distinct_elements_report_bound(self, p1):
        verdict = eq_up_to(p1.element_by_label(1, "(1)"), p1.element_by_label(2, "(2)"))
        assert not verdict.equal
        assert verdict.verdict == "distinct_up_to_4"

    def test_elements_killed_by_truncation(self):
        F = truncate_above(p_functor(1, 3), 1)
        x = F.generator_element(1, 0)
        assert eq_up_to(x, x.scaled(0)).level == 2


class TestFiltration:
    def test_basis_word_two_five(self):
        e = basis_element(2, 6, (2, 5))
        verdict = exact_filtration(e)
        assert verdict.value == 5
        assert verdict.witness == {"transposition": 5, "level": 6}
        assert filtration_le(e, 5).holds
        refused = filtration_le(e, 4)
        assert not refused.holds
        assert refused.witness["transposition"] == 5

    def test_filtration_is_largest_entry(self):
        for m in range(2, 5):
            for w in enumerate_inj(2, m):
                e = basis_element(2, 5, w.values, level=m)
                assert exact_filtration(e).value == max(w.values)

    def test_filtration_through_level_five(self):
        for m in range(2, 6):
            for w in enumerate_inj(2, m):
                verdict = exact_filtration(basis_element(2, 6, w.values, level=m))
                assert verdict.determined
                assert verdict.value == max(w.values), w

    def test_top_level_is_undetermined(self):
        for w in enumerate_inj(2, 5):
            e = basis_element(2, 5, w.values, level=5)
            verdict = exact_filtration(e)
            if 5 not in w.values:
                assert verdict.determined and verdict.value == max(w.values), w
                continue
            assert not verdict.determined, w
            assert verdict.value is None
            assert verdict.interval == (4, 5)
            assert filtration_le(e, 5).holds
            open_bound = filtration_le(e, 4)
            assert not open_bound.holds and not open_bound.determined
            assert open_bound.interval == (4, 5)
            refused = filtration_le(e, 3)
            assert not refused.holds and refused.determined
            assert refused.witness == {"transposition": 4, "level": 5}

    def test_require_filtration_reports_interval(self):
        e = basis_element(2, 5, (2, 5))
        with pytest.raises(FiltrationNotVerifiedError, match=r"\[4, 5\]"):
            require_filtration(e, 4)

    def test_d_raises_filtration_by_one(self):
        for w in enumerate_inj(2, 3):
            e = basis_element(2, 5, w.values, level=3)
            moved = act(d_prefix(3), e)
            assert exact_filtration(moved).value == exact_filtration(e).value + 1

    def test_constant_functor_has_filtration_zero(self, const_z):
        assert exact_filtration(const_z.element(2, [5])).value == 0

    def test_require_filtration(self):
        e = basis_element(1, 4, (3,))
        require_filtration(e, 3)
        with pytest.raises(FiltrationNotVerifiedError):
            require_filtration(e, 2)

    def test_filtration_report_on_p1(self):
        rows = filtration_report(p_functor(1, 4))
        assert [r["level"] for r in rows] == [0, 1, 2]
        assert all(r["image_in_filtration"] for r in rows)


class TestSemistability:
    def test_constant_functor_is_semistable(self, const_z):
        assert is_semistable_up_to(const_z).holds
        assert check_d_surjective_up_to(const_z).holds

    def test_p1_is_not_semistable(self, p1):
        verdict = is_semistable_up_to(p1)
        assert not verdict.holds
        assert verdict.witness == {"level": 1, "generator": 0, "label": "(1)", "transposition": 1}

    @pytest.mark.parametrize("n", [1, 2])
    def test_representables_fail_both_criteria(self, n):
        P = p_functor(n, 4)
        assert not is_semistable_up_to(P).holds
        assert not check_d_surjective_up_to(P).holds

    def test_criteria_agree_on_fixtures(self):
        fixtures = [
            constant_functor(FgAbGroup.cyclic(3), 4),
            zero_functor(4),
            tensor_sigma(0, SigmaModule.trivial(0, Z), 4),
            tensor_sigma(2, SigmaModule.trivial(2, Z), 4),
            truncate_above(p_functor(1, 4), 2),
            direct_sum(constant_functor(Z, 4), p_functor(1, 4)),
        ]
        for F in fixtures:
            assert is_semistable_up_to(F).holds == check_d_surjective_up_to(F).holds, F.display_name

    def test_semistable_exactly_when_generators_have_filtration_zero(self):
        fixtures = [
            constant_functor(FgAbGroup.cyclic(3), 4),
            zero_functor(4),
            tensor_sigma(2, SigmaModule.trivial(2, Z), 4),
            truncate_above(p_functor(1, 4), 2),
            direct_sum(constant_functor(Z, 4), p_functor(1, 4)),
            p_functor(2, 4),
        ]
        for F in fixtures:
            generators = [F.generator_element(n, j) for n in range(F.N - 1) for j in range(F.level(n).num_generators)]
            all_zero = all(exact_filtration(x).value == 0 for x in generators)
            assert all_zero == is_semistable_up_to(F).holds, F.display_name

    def test_even_permutations_decide_transpositions(self):
        # s_i = (s_i s_3) s_3 at level 4, s_3 fixes anything born at level <= 2, and s_i s_3 is even
        F = direct_sum(constant_functor(FgAbGroup.cyclic(3), 4), constant_functor(Z, 4))
        x = F.element(1, [2, -1]).push(4).value
        for p in enumerate_inj(4, 4):
            if sign(p) == 1:
                assert F.morphism(p)(x) == x
        s3 = transposition(3, 4)
        assert F.morphism(s3)(x) == x
        for i in range(1, 4):
            even = compose(transposition(i, 4), s3)
            assert sign(even) == 1
            assert F.morphism(transposition(i, 4))(x) == F.morphism(even)(x) == x
        assert is_semistable_up_to(F).holds

    def test_three_cycle_moves_a_free_generator(self, p1):
        x = p1.element_by_label(1, "(1)").push(4).value
        cycle = compose(transposition(1, 4), transposition(2, 4))
        assert sign(cycle) == 1
        assert p1.morphism(transposition(3, 4))(x) == x
        assert p1.morphism(cycle)(x) != x
        assert not is_semistable_up_to(p1).holds

    def test_extension_of_trivial_modules_is_trivial(self):
        F = direct_sum(constant_functor(Z, 3), constant_functor(Z, 3))
        V = constant_functor(Z, 3)
        incl = NaturalMap(V, F, [GroupHom(V.level(n), F.level(n), [[1], [0]]) for n in range(4)]).validate()
        report = extension_closure_check(incl)
        assert report["sub_trivial"] and report["quotient_trivial"] and report["total_trivial"]
        assert report["consistent"]

    def test_non_split_extension(self):
        V, F = constant_functor(FgAbGroup.cyclic(2), 3), constant_functor(FgAbGroup.cyclic(4), 3)
        incl = NaturalMap(V, F, [GroupHom(V.level(n), F.level(n), [[2]]) for n in range(4)]).validate()
        Q, _ = functor_cokernel(incl)
        assert str(Q.level(0)) == "Z/2"
        assert not F.level(0).is_isomorphic(direct_sum(V, Q).level(0))
        report = extension_closure_check(incl)
        assert report["sub_trivial"] and report["quotient_trivial"] and report["total_trivial"]
        assert report["consistent"]

    def test_extension_with_moving_subfunctor(self):
        P1, P0 = p_functor(1, 4), p_functor(0, 4)
        aug = NaturalMap(P1, P0, [GroupHom(P1.level(n), P0.level(n), [[1] * n]) for n in range(5)]).validate()
        _, incl = functor_kernel(aug)
        report = extension_closure_check(incl)
        assert not report["sub_trivial"]
        assert not report["total_trivial"]
        assert report["consistent"]


class TestConstructions:
    def test_restrict_and_direct_sum(self, p1):
        F = direct_sum(p1, constant_functor(Z, 4))
        assert [g.num_generators for g in F.levels] == [1, 2, 3, 4, 5]
        assert restrict(F, 2).N == 2
        with pytest.raises(ValueError):
            direct_sum(p1, constant_functor(Z, 3))

    def test_truncate_above_is_valid(self):
        F = truncate_above(p_functor(1, 4), 2)
        assert F.is_valid
        assert [g.num_generators for g in F.levels] == [0, 1, 2, 0, 0]

    def test_shift_of_p1(self, p1):
        S = shift(p1)
        assert S.N == 3
        assert [g.num_generators for g in S.levels] == [1, 2, 3, 4]
        assert S.is_valid

    def test_induce_of_p0_matches_p1(self):
        I = induce(p_functor(0, 4))
        assert I.is_valid
        assert [g.num_generators for g in I.levels] == [0, 1, 2, 3, 4]

    def test_tensor_with_group(self, p1):
        F = tensor_with_group(p1, FgAbGroup.cyclic(2))
        assert str(F.level(2)) == "Z/2 + Z/2"
        assert F.is_valid

    def test_tensor_sigma_levels(self):
        F = tensor_sigma(2, SigmaModule.trivial(2, Z), 4)
        assert [g.num_generators for g in F.levels] == [0, 0, 1, 3, 6]
        assert F.is_valid

    def test_sign_twist_cancels_sign_action(self):
        twisted = tensor_sigma(2, SigmaModule.sign(2, Z), 4, sign_twist=True)
        plain = tensor_sigma(2, SigmaModule.trivial(2, Z), 4)
        for n in range(5):
            assert twisted.level(n).is_isomorphic(plain.level(n))
            for i in range(1, n):
                assert twisted.transposition(n, i).equals(plain.transposition(n, i))

    def test_invalid_sigma_module(self):
        bad = SigmaModule(2, Z, {1: GroupHom(Z, Z, [[2]])})
        with pytest.raises(InvalidActionError):
            bad.validate()

    def test_regular_module_is_valid(self):
        R = SigmaModule.regular(3).validate()
        assert R.group.num_generators == 6


class TestNaturalMaps:
    def test_kernel_and_cokernel_of_augmentation(self):
        P1, P0 = p_functor(1, 3), p_functor(0, 3)
        aug = NaturalMap(P1, P0, [GroupHom(P1.level(n), P0.level(n), [[1] * n]) for n in range(4)]).validate()
        K, incl = functor_kernel(aug)
        assert [g.num_generators for g in K.levels] == [0, 0, 1, 2]
        assert incl.is_injective()
        assert K.is_valid
        C, _ = functor_cokernel(aug)
        assert [str(g) for g in C.levels] == ["Z", "0", "0", "0"]


class TestDStage:
    def test_constant_functor_stages_are_isomorphic(self, const_z):
        stage = d_stage(const_z, 2)
        assert len(stage.stages) == 3
        assert stage.is_iso_up_to()

    def test_p1_stages_are_not(self, p1):
        assert not d_stage(p1, 1).is_iso_up_to()

    def test_stage_beyond_truncation(self, p1):
        with pytest.raises(TruncationExceededError):
            d_stage(p1, 5)


class TestGraded:
    def test_regrade_shifts_degrees(self, const_z):
        G = GradedTameModule({0: const_z, 1: const_z.with_grade(1)}, "G")
        loop = G.regrade(-1)
        assert loop.degrees == [-1, 0]
        assert loop[-1].grade == -1
        assert loop.N == 4
