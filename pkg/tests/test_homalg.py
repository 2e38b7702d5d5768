import pytest

import core.homalg as homalg
from catalog import build_named, parse_coefficients
from core.errors import ResourceGuardError
from core.exactalg import FgAbGroup
from core.homalg import (
    annihilation_check,
    coinvariants,
    group_homology,
    rational_collapse_check,
    tor,
    tor_bar,
    tor_cross_check,
    tor_pres,
)
from core.pmod import hom_from_P
from core.tamemod import SigmaModule, functor_kernel, tensor_sigma

N = 3


def _values(results):
    return [str(r.value) for r in results]


class TestCoinvariants:
    def test_constant_functor(self):
        result = coinvariants(build_named("Z", N))
        assert str(result.group) == "Z"
        assert result.stabilized

    def test_representable(self):
        result = coinvariants(build_named("P(1)", N))
        assert [str(g) for g in result.sequence] == ["0", "Z", "Z", "Z"]
        assert result.stabilized

    def test_augmentation_kernel_dies_at_three(self):
        result = coinvariants(build_named("kerP(1)", N))
        assert [str(g) for g in result.sequence] == ["0", "0", "Z/2", "0"]
        assert str(result.group) == "0"
        assert not result.stabilized
        assert result.to_dict()["sequence"][2] == "Z/2"

    @pytest.mark.parametrize("name", ["Z", "P(1)", "P(2)", "Psym(2)", "kerP(1)", "P(1)+Z"])
    @pytest.mark.parametrize("method", ["bar", "pres"])
    def test_tor_zero_is_the_coinvariants(self, name, method):
        F = build_named(name, N)
        assert tor(F, 0, method)[0].value.is_isomorphic(coinvariants(F).group)


class TestTor:
    @pytest.mark.parametrize("name", ["P(0)", "P(1)", "P(2)"])
    @pytest.mark.parametrize("method", ["bar", "pres"])
    def test_projectives_vanish_in_positive_degrees(self, name, method):
        results = tor(build_named(name, N), 2, method)
        assert _values(results) == ["Z", "0", "0"]
        assert all(r.method == method for r in results)

    @pytest.mark.parametrize("name", ["P(0)", "P(1)", "P(2)"])
    def test_projectives_at_four_by_resolution(self, name):
        results = tor(build_named(name, 4), 2, "pres")
        assert _values(results) == ["Z", "0", "0"]
        assert all(r.complete for r in results)

    @pytest.mark.parametrize("name", ["P(0)", "P(1)"])
    def test_projectives_at_four_by_bar_complex(self, name):
        results = tor(build_named(name, 4), 1, "bar")
        assert _values(results) == ["Z", "0"]

    @pytest.mark.parametrize("method", ["bar", "pres"])
    def test_additive_on_direct_sums(self, method):
        total = tor(build_named("P(1)+Z", N), 2, method)
        parts = zip(tor(build_named("P(1)", N), 2, method), tor(build_named("Z", N), 2, method))
        for t, (a, b) in zip(total, parts):
            assert t.value.is_isomorphic(FgAbGroup.direct_sum(a.value, b.value)), t.degree

    def test_augmentation_kernel_degree_two_at_four(self):
        results = tor(build_named("kerP(1)", 4), 2, "pres")
        assert _values(results) == ["0", "0", "Z/2"]
        assert not results[2].stabilized

    def test_tensor_with_z2(self):
        results = tor(build_named("Ptensor(1,2)", N), 2, "pres")
        assert _values(results) == ["Z/2", "0", "0"]

    @pytest.mark.parametrize("method", ["bar", "pres"])
    def test_augmentation_kernel_low_degrees(self, method):
        results = tor(build_named("kerP(1)", N), 1, method)
        assert _values(results) == ["0", "0"]

    def test_stability_flag(self):
        results = tor_bar(build_named("P(1)", N), 1)
        assert all(r.stabilized for r in results)
        assert not any(r.stabilized for r in tor_bar(build_named("P(1)", N), 1, check_stability=False))

    def test_pres_records_search_level(self):
        results = tor_pres(build_named("P(1)", N), 1, search_level=2)
        assert all(r.L == 2 for r in results)
        assert all(r.complete for r in results)
        assert results[0].to_dict()["invariants"] == {"free_rank": 1, "torsion": []}

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            tor(build_named("Z", N), 1, "cech")

    def test_chain_guard(self, monkeypatch):
        monkeypatch.setattr(homalg, "MAX_CHAINS", 10)
        with pytest.raises(ResourceGuardError):
            tor_bar(build_named("P(1)", N), 2)


class TestCrossCheck:
    @pytest.mark.parametrize("name", ["Z", "P(1)", "P(2)", "Psym(2)", "kerP(1)", "P(1)+Z"])
    def test_engines_agree(self, name):
        check = tor_cross_check(build_named(name, N), 2)
        assert check["verdict"] == "AGREE"
        assert [row["degree"] for row in check["rows"]] == [0, 1, 2]


class TestGroupHomology:
    def test_trivial_integers(self):
        values = group_homology(2, parse_coefficients("Z", 2), 3)
        assert [str(v) for v in values] == ["Z", "Z/2", "0", "Z/2"]

    def test_sign_representation(self):
        values = group_homology(2, parse_coefficients("sign", 2), 3)
        assert [str(v) for v in values] == ["Z/2", "0", "Z/2", "0"]

    def test_mod_two(self):
        values = group_homology(2, parse_coefficients("Z/2", 2), 3)
        assert [str(v) for v in values] == ["Z/2"] * 4

    def test_s3_low_degrees(self):
        values = group_homology(3, parse_coefficients("Z", 3), 1)
        assert [str(v) for v in values] == ["Z", "Z/2"]

    def test_guard(self):
        with pytest.raises(ResourceGuardError):
            group_homology(5, SigmaModule.trivial(5, FgAbGroup.free(1)), 1)

    @pytest.mark.parametrize("coefficients", ["Z", "Z/2", "sign"])
    def test_matches_tor_of_symmetric_tensor(self, coefficients):
        B = parse_coefficients(coefficients, 2)
        F = tensor_sigma(2, B, N)
        pres = tor_pres(F, 3, check_stability=False)
        assert [r.value.decompose() for r in pres] == [v.decompose() for v in group_homology(2, B, 3)]

    @pytest.mark.parametrize("coefficients", ["Z", "Z/2", "Z/3", "sign"])
    def test_symmetric_tensor_torsion_divides_two(self, coefficients):
        F = tensor_sigma(2, parse_coefficients(coefficients, 2), N)
        for r in tor_pres(F, 3, check_stability=False)[1:]:
            free_rank, torsion = r.value.decompose()
            assert free_rank == 0
            assert all(2 % t == 0 for t in torsion), (r.degree, torsion)


class TestRationalChecks:
    def test_collapse_for_representable(self):
        report = rational_collapse_check(build_named("P(1)", N), 2)
        assert report["collapses"]
        assert [r["rank"] for r in report["ranks"]] == [1, 0, 0]

    def test_annihilation_by_group_order(self):
        S = build_named("Psym(2)", N)
        x = S.element_by_label(2, "{1,2}")
        K, incl = functor_kernel(hom_from_P(2, S, x).natural_map())
        report = annihilation_check(incl, 2)
        assert report["kernel"] == "Z/2"
        assert report["bound"] == 2
        assert report["annihilated"]

    def test_collapse_with_injection(self):
        S = build_named("Psym(2)", N)
        x = S.element_by_label(2, "{1,2}")
        K, incl = functor_kernel(hom_from_P(2, S, x).natural_map())
        report = rational_collapse_check(K, 1, injection=incl, level=2)
        assert report["collapses"]
        assert report["annihilation"]["annihilated"]
