import json

import numpy as np
import pytest

from app import cli
from app.reports import CheckReport
from config import checks, settings


@pytest.fixture
def symmetric_jacobian_file(write_json):
    return write_json("jacobian.json", {"alphabet": 2, "depth": 2, "log_values": np.log([0.7, 0.3, 0.3, 0.7]).tolist()})


@pytest.fixture
def bernoulli_file(write_json):
    return write_json("bernoulli.json", {"alphabet": 2, "depth": 1, "log_irn": np.log([0.9, 0.1]).tolist(), "base": [1.0]})


@pytest.fixture
def plus_minus_file(write_json):
    return write_json("xi.json", {"alphabet": 2, "depth": 1, "log_values": [1.0, -1.0]})


@pytest.fixture
def uniform_jacobian_file(write_json):
    return write_json("uniform.json", {"alphabet": 2, "depth": 1, "log_values": np.log([0.5, 0.5]).tolist()})


@pytest.fixture
def zero_potential_file(write_json):
    return write_json("zero.json", {"alphabet": 2, "depth": 1, "log_values": [0.0, 0.0]})


@pytest.fixture
def first_symbol_family_file(write_json):
    return write_json("family.json", {"alphabet": 2,
                                      "constraints": [{"alphabet": 2, "depth": 1, "log_values": [1.0, 0.0]}]})


@pytest.fixture
def moving_level_family_file(write_json):
    """f^v = (0, v) through an affine generator."""
    level = {"alphabet": 2, "depth": 1, "log_values": [0.0, 1.0]}
    zero = {"alphabet": 2, "depth": 1, "log_values": [0.0, 0.0]}
    return write_json("moving.json", {"alphabet": 2, "constraints": [level],
                                      "generator": {"kind": "affine", "base": [zero], "direction": [level]}})


def _json_output(capsys):
    return json.loads(capsys.readouterr().out)


class TestCommands:
    def test_pressure_prints_bare_value(self, write_json, capsys):
        path = write_json("zero.json", {"alphabet": 2, "depth": 1, "log_values": [0.0, 0.0]})
        assert cli.run(["pressure", "--potential", path]) == cli.EXIT_OK
        assert capsys.readouterr().out == "0.6931471805599453\n"

    def test_pressure_report_goes_to_out(self, write_json, tmp_path, capsys):
        path = write_json("zero.json", {"alphabet": 2, "depth": 1, "log_values": [0.0, 0.0]})
        out = tmp_path / "report.json"
        assert cli.run(["pressure", "--potential", path, "--out", str(out)]) == cli.EXIT_OK
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["values"]["eigenvalue"] == 2.0
        assert set(report["inputs"]) == {"potential"}

    def test_second_law(self, symmetric_jacobian_file, bernoulli_file, capsys):
        code = cli.run(["second-law", "--jacobian", symmetric_jacobian_file, "--measure", bernoulli_file])
        assert code == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["h1"] == pytest.approx(0.325083, abs=1e-6)
        assert report["values"]["h3"] == pytest.approx(report["values"]["h1"], abs=1e-10)
        assert all(check["pass"] for check in report["checks"])
        assert checks.SECOND_LAW_V1.tag in {check["check"] for check in report["checks"]}

    def test_rrty_labels(self, symmetric_jacobian_file, bernoulli_file, capsys):
        assert cli.run(["rrty", "--jacobian", symmetric_jacobian_file, "--measure", bernoulli_file]) == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["margin"] == pytest.approx(-0.0274286, abs=1e-7)
        assert report["labels"] == ["margin_negative", "entropy_increase"]

    def test_maxent(self, write_json, capsys):
        path = write_json("family.json", {"alphabet": 2,
                                          "constraints": [{"alphabet": 2, "depth": 1, "log_values": [1.0, 0.0]}]})
        assert cli.run(["maxent", "--family", path, "--x-target", "0.3"]) == cli.EXIT_OK
        assert _json_output(capsys)["values"]["z"][0] == pytest.approx(np.log(3.0 / 7.0), abs=1e-10)

    def test_entropy_production_from_matrix(self, write_json, circulant_chain, capsys):
        path = write_json("chain.json", {"matrix": circulant_chain.tolist(), "convention": "column"})
        assert cli.run(["entropy-production", "--matrix", path]) == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["e_p"] == pytest.approx(0.5 * np.log(3.5), abs=1e-9)
        assert len(report["checks"]) == 4

    def test_kl_taylor_csv(self, symmetric_jacobian_file, bernoulli_file, plus_minus_file, capsys):
        code = cli.run(["kl-taylor", "--measure", bernoulli_file, "--jacobian", symmetric_jacobian_file,
                        "--potential", plus_minus_file, "--format", "csv"])
        assert code == cli.EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "theta,kl,slope_pred,curvature_pred,second_moment_pred"
        assert len(lines) == 6

    def test_scalar_csv(self, symmetric_jacobian_file, bernoulli_file, capsys):
        cli.run(["rrty", "--jacobian", symmetric_jacobian_file, "--measure", bernoulli_file, "--format", "csv"])
        assert capsys.readouterr().out.splitlines()[0] == "margin,entropy_change"


class TestMeasureCommands:
    def test_equilibrium_table(self, zero_potential_file, capsys):
        assert cli.run(["equilibrium", "--potential", zero_potential_file, "--format", "csv"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "word_index,weight"
        assert len(lines) == 5

    def test_equilibrium_report(self, zero_potential_file, capsys):
        assert cli.run(["equilibrium", "--potential", zero_potential_file]) == cli.EXIT_OK
        report = _json_output(capsys)
        np.testing.assert_allclose(report["values"]["cylinder_weights"], [0.25] * 4, atol=1e-14)
        assert report["values"]["entropy"] == pytest.approx(np.log(2.0), abs=1e-12)
        assert all(check["pass"] for check in report["checks"])

    def test_entropy(self, bernoulli_file, capsys):
        assert cli.run(["entropy", "--measure", bernoulli_file]) == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["entropy"] == pytest.approx(0.325083, abs=1e-6)
        assert report["values"]["invariant"] is True

    def test_kl_against_uniform(self, bernoulli_file, uniform_jacobian_file, capsys):
        assert cli.run(["kl", "--measure", bernoulli_file, "--jacobian", uniform_jacobian_file]) == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["kl"] == pytest.approx(np.log(2.0) + 0.9 * np.log(0.9) + 0.1 * np.log(0.1), abs=1e-12)
        assert [check["check"] for check in report["checks"]] == [checks.KL_NONNEGATIVE.tag]

    def test_push(self, symmetric_jacobian_file, bernoulli_file, capsys):
        code = cli.run(["push", "--jacobian", symmetric_jacobian_file, "--measure", bernoulli_file, "--n", "2"])
        assert code == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["n"] == 2
        assert report["checks"][0]["check"] == checks.ITERATED_IRN.tag
        assert report["checks"][0]["pass"]

    def test_orbit(self, symmetric_jacobian_file, bernoulli_file, capsys):
        code = cli.run(["orbit", "--jacobian", symmetric_jacobian_file, "--measure", bernoulli_file, "--n", "4"])
        assert code == cli.EXIT_OK
        report = _json_output(capsys)
        assert [row["n"] for row in report["values"]["table"]] == [0, 1, 2, 3, 4]
        assert report["labels"] == ["deviation_decreasing"]
        assert report["checks"][0]["pass"]


class TestGeometryCommands:
    def test_fisher(self, uniform_jacobian_file, plus_minus_file, capsys):
        assert cli.run(["fisher", "--jacobian", uniform_jacobian_file, "--potential", plus_minus_file]) == cli.EXIT_OK
        values = _json_output(capsys)["values"]
        assert values["fisher"] == pytest.approx(1.0, abs=1e-14)
        assert values["asymptotic_variance"] == pytest.approx(1.0, abs=1e-13)
        assert values["pressure_second_derivative"] == pytest.approx(1.0, rel=1e-5)
        assert values["fisher_at_time_n"] == pytest.approx(0.0, abs=1e-15)

    def test_fisher_at_time_n(self, uniform_jacobian_file, plus_minus_file, capsys):
        code = cli.run(["fisher", "--jacobian", uniform_jacobian_file, "--potential", plus_minus_file, "--n", "8"])
        assert code == cli.EXIT_OK
        assert _json_output(capsys)["values"]["fisher_at_time_n"] == pytest.approx(7.0, rel=1e-6)

    def test_kl_taylor_report(self, uniform_jacobian_file, plus_minus_file, write_json, capsys):
        measure = write_json("uniform_measure.json", {"alphabet": 2, "depth": 1,
                                                      "log_irn": np.log([0.5, 0.5]).tolist(), "base": [1.0]})
        code = cli.run(["kl-taylor", "--measure", measure, "--jacobian", uniform_jacobian_file,
                        "--potential", plus_minus_file])
        assert code == cli.EXIT_OK
        values = _json_output(capsys)["values"]
        assert values["fitted_curvature"] == pytest.approx(1.0, rel=1e-3)
        assert values["second_moment_pred"] == pytest.approx(values["curvature_pred"], abs=1e-14)
        assert values["cubic_constant"] == pytest.approx(1e-2 / 12.0, rel=1e-2)


class TestThermoCommands:
    def test_operation_with_separate_jacobian(self, uniform_jacobian_file, bernoulli_file,
                                              symmetric_jacobian_file, capsys):
        code = cli.run(["thermo-op", "--jacobian", uniform_jacobian_file, "--measure", bernoulli_file,
                        "--jacobian1", symmetric_jacobian_file])
        assert code == cli.EXIT_OK
        report = _json_output(capsys)
        values = report["values"]
        # μ₃ puts weight .5·p(x₂) on [x₁x₂], so ∫log J₁ drops from .82 ln .7 + .18 ln .3 to .5 ln .7 + .5 ln .3
        assert values["dW"] == pytest.approx(0.32 * np.log(7.0 / 3.0), abs=1e-12)
        assert values["dQ"] == pytest.approx(0.0, abs=1e-14)
        assert values["dU"] == pytest.approx(values["dW"] + values["dQ"], abs=1e-12)
        assert report["labels"] == ["work_nonnegative"]
        assert report["checks"][0]["check"] == checks.FIRST_LAW_OPERATION.tag
        assert report["checks"][0]["pass"]
        assert set(report["inputs"]) == {"jacobian", "jacobian1", "measure"}

    def test_operation_defaults_to_measure_irn(self, uniform_jacobian_file, bernoulli_file, capsys):
        assert cli.run(["thermo-op", "--jacobian", uniform_jacobian_file, "--measure", bernoulli_file]) == cli.EXIT_OK
        assert _json_output(capsys)["values"]["dW"] == pytest.approx(0.4 * np.log(9.0), abs=1e-12)

    def test_energy_rate_fixed_multipliers(self, moving_level_family_file, capsys):
        code = cli.run(["energy-rate", "--family", moving_level_family_file, "--z=-1.0", "--v0", "1.0"])
        assert code == cli.EXIT_OK
        report = _json_output(capsys)
        upper = np.exp(-1.0) / (1.0 + np.exp(-1.0))
        assert report["values"]["dW"] == pytest.approx(upper, abs=1e-10)
        assert report["values"]["v0"] == 1.0
        assert report["checks"][0]["pass"]

    def test_energy_rate_maxent_mode(self, moving_level_family_file, capsys):
        code = cli.run(["energy-rate", "--family", moving_level_family_file, "--x-target", "0.3", "--v0", "1.0"])
        assert code == cli.EXIT_OK
        values = _json_output(capsys)["values"]
        assert values["dW"] == pytest.approx(0.3, abs=1e-9)
        assert values["dU"] == pytest.approx(0.0, abs=1e-8)

    def test_energy_rate_needs_a_mode(self, moving_level_family_file):
        assert cli.run(["energy-rate", "--family", moving_level_family_file]) == cli.EXIT_VALIDATION

    def test_gibbs_table(self, write_json, capsys):
        path = write_json("levels.json", {"alphabet": 2, "depth": 1, "log_values": [0.0, 1.0]})
        assert cli.run(["gibbs-eq", "--potential", path, "--beta-grid", "0.5,1,2", "--format", "csv"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "beta,E,h,dh_dE,E_from_pressure"
        assert len(lines) == 4

    def test_gibbs_report(self, write_json, capsys):
        path = write_json("levels.json", {"alphabet": 2, "depth": 1, "log_values": [0.0, 1.0]})
        assert cli.run(["gibbs-eq", "--potential", path]) == cli.EXIT_OK
        report = _json_output(capsys)
        assert len(report["values"]["table"]) == 20
        assert report["checks"][0]["check"] == checks.GIBBS_FUNDAMENTAL_EQUATION.tag
        assert report["checks"][0]["pass"]

    def test_susceptibility_at_origin(self, first_symbol_family_file, capsys):
        assert cli.run(["susceptibility", "--family", first_symbol_family_file]) == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["z"] == [0.0]
        assert report["values"]["SP"][0][0] == pytest.approx(0.25, abs=1e-6)
        assert report["values"]["SE"][0][0] == pytest.approx(-4.0, rel=1e-4)
        assert report["checks"][0]["pass"]

    def test_susceptibility_from_target(self, first_symbol_family_file, capsys):
        code = cli.run(["susceptibility", "--family", first_symbol_family_file, "--x-target", "0.3"])
        assert code == cli.EXIT_OK
        report = _json_output(capsys)
        assert report["values"]["z"][0] == pytest.approx(np.log(3.0 / 7.0), abs=1e-10)
        assert report["values"]["SP"][0][0] == pytest.approx(0.21, abs=1e-6)


class TestExitCodes:
    def test_missing_file(self, tmp_path):
        assert cli.run(["pressure", "--potential", str(tmp_path / "absent.json")]) == cli.EXIT_VALIDATION

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"alphabet\": 2,", encoding="utf-8")
        assert cli.run(["pressure", "--potential", str(path)]) == cli.EXIT_VALIDATION

    def test_schema_violation(self, write_json):
        path = write_json("short.json", {"alphabet": 2, "depth": 2, "log_values": [0.0, 0.0]})
        assert cli.run(["pressure", "--potential", path]) == cli.EXIT_VALIDATION

    def test_unknown_flag(self):
        assert cli.run(["pressure", "--bogus", "1"]) == cli.EXIT_VALIDATION

    def test_missing_option(self):
        assert cli.run(["pressure"]) == cli.EXIT_VALIDATION

    def test_option_out_of_range(self, write_json):
        path = write_json("zero.json", {"alphabet": 2, "depth": 1, "log_values": [0.0, 0.0]})
        assert cli.run(["equilibrium", "--potential", path, "--depth", "9"]) == cli.EXIT_VALIDATION

    def test_envelope(self, write_json):
        jacobian = write_json("j4.json", {"alphabet": 4, "depth": 2, "log_values": [np.log(0.25)] * 16})
        measure = write_json("m4.json", {"alphabet": 4, "depth": 1, "log_irn": [np.log(0.25)] * 4, "base": [1.0]})
        assert cli.run(["push", "--jacobian", jacobian, "--measure", measure, "--n", "8"]) == cli.EXIT_VALIDATION

    def test_non_convergence(self, write_json, monkeypatch):
        rng = np.random.default_rng(42)
        path = write_json("deep.json", {"alphabet": 2, "depth": 3, "log_values": rng.uniform(-1, 1, 8).tolist()})
        monkeypatch.setattr(settings, "PERRON_MAX_ITER", 2)
        assert cli.run(["pressure", "--potential", path]) == cli.EXIT_NUMERIC


class TestVerifyAll:
    def test_reports_are_reproducible(self, tmp_path):
        first, second = tmp_path / "first.json", tmp_path / "second.json"
        assert cli.run(["verify-all", "--seed", "42", "--trials", "2", "--out", str(first)]) == cli.EXIT_OK
        assert cli.run(["verify-all", "--seed", "42", "--trials", "2", "--out", str(second)]) == cli.EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        report = json.loads(first.read_text(encoding="utf-8"))
        assert {check["check"] for check in report["checks"]} == set(checks.CHECK_CATALOG)
        assert report["trials"] == 2


class TestCheckReport:
    def test_serializes_pass_flag(self):
        report = CheckReport.from_identity(checks.TOTAL_MASS, 0.0)
        payload = report.model_dump(by_alias=True)
        assert payload["pass"] is True
        assert payload["check"] == checks.TOTAL_MASS.tag

    def test_nan_fails(self):
        assert not CheckReport.from_identity(checks.TOTAL_MASS, float("nan")).passed

    def test_embeds_equation_reference(self):
        payload = CheckReport.from_identity(checks.FIRST_LAW_OPERATION, 0.0).model_dump(by_alias=True)
        assert payload["equation"] == checks.FIRST_LAW_OPERATION.equation == "X.6"

    def test_catalog_references_are_unique(self):
        references = [identity.equation for identity in checks.CHECK_CATALOG.values()]
        assert all(references)
        assert len(set(references)) == len(references)

    def test_command_reports_carry_references(self, symmetric_jacobian_file, bernoulli_file, capsys):
        cli.run(["second-law", "--jacobian", symmetric_jacobian_file, "--measure", bernoulli_file])
        for check in _json_output(capsys)["checks"]:
            assert check["equation"] == checks.CHECK_CATALOG[check["check"]].equation
