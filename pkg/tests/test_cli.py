"""Tests for the command line front end."""
import json
from types import SimpleNamespace
from unittest.mock import patch

import pytest

from spiked_spectra.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, build_parser, main

ADDITIVE = ["--model", "additive", "--n", "200", "--theta", "2"]


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_analytic_writes_theory_tables(tmp_path):
    assert main(["--out", str(tmp_path), *ADDITIVE, "analytic"]) == EXIT_OK
    for name in ("scenario_law.csv", "scenario_theory_profile.csv", "scenario_outlier.csv"):
        assert (tmp_path / name).is_file()
    outlier = (tmp_path / "scenario_outlier.csv").read_text(encoding="utf-8")
    assert outlier.splitlines()[1] == "2,true,2.5,0.75"


def test_analytic_json_format(tmp_path):
    assert main(["--out", str(tmp_path), "--format", "json", *ADDITIVE, "analytic"]) == EXIT_OK
    content = json.loads((tmp_path / "scenario_outlier.json").read_text(encoding="utf-8"))
    assert content[0]["location"] == pytest.approx(2.5)


def test_simulate_seed_override(tmp_path):
    """Test --seed selects the realization written by simulate."""
    assert main(["--out", str(tmp_path), "--seed", "3", *ADDITIVE, "simulate"]) == EXIT_OK
    lines = (tmp_path / "scenario_seed3_spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "index,eigenvalue,weight"
    assert len(lines) == 201


def test_missing_model_is_an_error(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "analytic"]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "command, artifact",
    [
        ("profile", "scenario_profile.csv"),
        ("outlier", "scenario_outliers.csv"),
        ("diagnose", "scenario_seed0_diagnostic.csv"),
    ],
)
def test_sampling_commands(tmp_path, command, artifact):
    code = main(["--out", str(tmp_path), *ADDITIVE, command])
    assert code in (0, 1)
    assert (tmp_path / artifact).is_file()
    report = json.loads((tmp_path / "scenario_report.json").read_text(encoding="utf-8"))
    assert report["n"] == 200


def test_config_file(tmp_path, scenario_file):
    out = tmp_path / "out"
    code = main(["--config", str(scenario_file), "--out", str(out), "outlier"])
    assert code in (0, 1)
    report = json.loads((out / "small_report.json").read_text(encoding="utf-8"))
    assert report["seeds"] == [0, 1]
    assert report["theory_outlier"]["location"] == pytest.approx(10 / 3)


def test_accept_only_oracle(tmp_path, capsys):
    code = main(["--out", str(tmp_path), "accept", "--only", "oracle", "--workers", "1"])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "acceptance_report.json").read_text(encoding="utf-8"))
    assert [criterion["name"] for criterion in report["criteria"]] == ["oracle"]
    assert "oracle: pass" in capsys.readouterr().out


@pytest.mark.parametrize("outcomes, expected", [((True, True), EXIT_OK), ((True, False), EXIT_FAILED)])
def test_figures_exit_status(tmp_path, capsys, outcomes, expected):
    """Test figures fails as soon as one scenario report fails."""
    reports = [
        SimpleNamespace(scenario=f"figure{index}", profile_sup_error=0.1, passed=passed)
        for index, passed in enumerate(outcomes)
    ]
    with patch("spiked_spectra.cli.run_figures", return_value=reports) as run:
        assert main(["--out", str(tmp_path), "figures"]) == expected
    run.assert_called_once()
    assert "figure1: profile sup-error 0.1" in capsys.readouterr().out
