import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app import cli

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "fixtures"


@pytest.fixture
def runner():
    return CliRunner()


def _run(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


class TestValidateCommand:
    def test_representable_is_valid(self, runner):
        result = _run(runner, "validate", "P(2)")
        assert result.exit_code == 0
        assert "verdict: yes" in result.stdout

    def test_sign_fixture_fails(self, runner):
        result = _run(runner, "validate", FIXTURES / "sign_functor.json")
        assert result.exit_code == 1
        assert "added_coordinate" in result.stdout

    def test_malformed_fixture_is_an_input_error(self, runner):
        result = _run(runner, "validate", FIXTURES / "malformed.json")
        assert result.exit_code == 2
        assert "error:" in result.stderr

    def test_unknown_name(self, runner):
        assert _run(runner, "validate", "Q(3)").exit_code == 2


class TestSemistableCommand:
    def test_constant_functor(self, runner):
        result = _run(runner, "semistable", "Z", "--trunc", 3)
        assert result.exit_code == 0
        assert "criteria_agree: yes" in result.stdout

    def test_representable_reports_a_transposition(self, runner):
        result = _run(runner, "semistable", "P(1)", "--trunc", 3)
        assert result.exit_code == 1
        assert "(1 2)" in result.stdout


class TestFiltrationCommand:
    def test_basis_element(self, runner):
        result = _run(runner, "filtration", "P(2)", "(2,5)", "--trunc", 6)
        assert result.exit_code == 0
        assert "filtration: 5" in result.stdout
        assert "witness: (5 6)" in result.stdout

    def test_bound_refused(self, runner):
        result = _run(runner, "filtration", "P(2)", "(2,5)", "--at-most", 4, "--trunc", 6)
        assert result.exit_code == 1

    def test_top_level_element_is_undetermined(self, runner):
        result = _run(runner, "filtration", "P(2)", "(2,5)", "--trunc", 5, "--format", "json")
        assert result.exit_code == 0
        summary = json.loads(result.stdout)["summary"]
        assert summary["filtration"] == "undetermined"
        assert summary["interval"] == [4, 5]

    def test_undetermined_bound(self, runner):
        result = _run(runner, "filtration", "P(2)", "(2,5)", "--at-most", 4, "--trunc", 5, "--format", "json")
        assert result.exit_code == 1
        summary = json.loads(result.stdout)["summary"]
        assert summary["determined"] is False
        assert summary["at_most"] == 4


class TestHomologyCommands:
    def test_tor_engines_agree(self, runner):
        result = _run(runner, "tor", "P(1)", "--method", "both", "--trunc", 3)
        assert result.exit_code == 0
        assert "verdict: AGREE" in result.stdout

    def test_group_homology(self, runner):
        result = _run(runner, "ghom", 2, "Z", "--pmax", 3, "--format", "json")
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert [row["value"] for row in payload["rows"]] == ["Z", "Z/2", "0", "Z/2"]
        assert payload["header"]["p_max"] == 3

    def test_group_homology_guard(self, runner):
        assert _run(runner, "ghom", 5, "Z").exit_code == 3

    def test_e2_semifree(self, runner):
        result = _run(runner, "e2", "semifree:2", "--qmax", 0, "--pmax", 2, "--trunc", 3, "--method", "pres",
                      "--workers", 1, "--format", "json")
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert [c["value"] for c in payload["cells"]] == ["Z", "Z/2", "0"]
        assert payload["summary"]["edge_consistent"] is True
        assert payload["header"]["stems"].endswith("stems.json")

    def test_e2_rejects_unknown_spectrum(self, runner):
        assert _run(runner, "e2", "cofree:1").exit_code == 2


class TestConstructionCommands:
    def test_tensor_sigma_writes_a_file(self, runner, tmp_path):
        out = tmp_path / "psym.json"
        result = _run(runner, "tensor-sigma", 2, "Z", "--trunc", 3, "-o", out)
        assert result.exit_code == 0
        assert json.loads(out.read_text())["N"] == 3
        assert _run(runner, "validate", out).exit_code == 0

    def test_kappa(self, runner):
        result = _run(runner, "kappa", 1, "--trunc", 3)
        assert result.exit_code == 0


class TestOutput:
    def test_text_output_is_deterministic(self, runner):
        first = _run(runner, "coinv", "kerP(1)", "--trunc", 3)
        second = _run(runner, "coinv", "kerP(1)", "--trunc", 3)
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        assert first.stdout.startswith("# coinv\n")

    def test_json_output_is_deterministic(self, runner):
        args = ("tor", "Z", "--trunc", 3, "--pmax", 1, "--format", "json")
        first, second = _run(runner, *args), _run(runner, *args)
        assert first.stdout == second.stdout
        payload = json.loads(first.stdout)
        assert payload["command"] == "tor"
        assert payload["header"]["N"] == 3
