import json
from pathlib import Path

import pytest

from core.errors import PresentationError
from core.pmod import PMap, p_functor
from core.injcat import InjWord
from core.presentation_io import (
    functor_from_dict,
    functor_to_dict,
    load_functor,
    pmap_from_dict,
    pmap_to_dict,
    save_functor,
)
from core.tamemod import eq_up_to

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "fixtures"


class TestFunctorFiles:
    def test_save_and_load(self, tmp_path):
        P = p_functor(1, 3)
        path = tmp_path / "p1.json"
        save_functor(P, path)
        Q = load_functor(path)
        assert Q.N == 3
        assert Q.labels == P.labels
        assert all(a.is_isomorphic(b) for a, b in zip(P.levels, Q.levels))
        assert Q.is_valid
        assert json.loads(path.read_text())["schema"] == "tamemod-v1"

    def test_constant_fixture(self):
        F = load_functor(FIXTURES / "constant_z.json")
        assert F.is_valid
        assert [str(g) for g in F.levels] == ["Z"] * (F.N + 1)

    def test_malformed_fixture(self):
        with pytest.raises(PresentationError):
            load_functor(FIXTURES / "malformed.json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(PresentationError):
            load_functor(tmp_path / "absent.json")

    def test_not_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{ nope")
        with pytest.raises(PresentationError):
            load_functor(path)

    def test_wrong_number_of_levels(self):
        doc = functor_to_dict(p_functor(1, 2))
        doc["levels"].pop()
        with pytest.raises(PresentationError):
            functor_from_dict(doc)

    def test_transposition_out_of_range(self):
        doc = functor_to_dict(p_functor(1, 2))
        doc["transpositions"]["2,2"] = [[1, 0], [0, 1]]
        with pytest.raises(PresentationError):
            functor_from_dict(doc)

    def test_matrix_shape_is_checked(self):
        doc = functor_to_dict(p_functor(1, 2))
        doc["stab"][1] = [[1]]
        with pytest.raises(PresentationError):
            functor_from_dict(doc)


class TestPMapFiles:
    def test_augmentation_cokernel_fixture(self):
        F = load_functor(FIXTURES / "augmentation.json")
        assert F.display_name == "coker(P(1) -> P(0))"
        assert [str(g) for g in F.levels] == ["Z", "0", "0", "0"]

    def test_document_survives_a_round_trip(self):
        f = PMap.single(InjWord((2,), 2), coefficient=-1)
        g, N = pmap_from_dict(pmap_to_dict(f, 3))
        assert N == 3
        assert g.entries == f.entries

    def test_bad_word(self):
        doc = {"schema": "pmap-v1", "N": 2, "source": [1], "target": [0], "entries": {"0,0": [[1, "(1 1)@2"]]}}
        with pytest.raises(PresentationError):
            pmap_from_dict(doc)

    def test_loaded_functor_elements(self):
        P = load_functor(FIXTURES / "augmentation.json")
        x = P.generator_element(0, 0)
        assert eq_up_to(x, x.scaled(2)).verdict.startswith("distinct")
