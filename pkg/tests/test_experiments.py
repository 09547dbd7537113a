"""Tests for the scenario runner and the acceptance suite."""
import json
from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pytest

from spiked_spectra.const import (
    CURVE_OUTLIER,
    CURVE_PROFILE,
    MODEL_ADDITIVE,
    MODEL_MULTIPLICATIVE,
    TOL_OUTLIER_LOCATION,
    TOL_OUTLIER_MASS,
    TOL_PROFILE_SUP_ERROR,
)
from spiked_spectra.experiments import (
    AcceptanceSuite,
    Scenario,
    SeedResult,
    Theory,
    _route_error,
    figure_scenarios,
    interior_intervals,
    profile_grid,
    run_scenario,
    simulate,
    theory_tables,
)
from spiked_spectra.spectra.analytic import FreeAdditiveSolution
from spiked_spectra.spectra.closed_forms import additive_boundary_ratio, general_ratio_additive
from spiked_spectra.spectra.sampler import SpikedModelConfig
from spiked_spectra.utils.errors import ConfigError, ConvergenceError


@pytest.fixture
def small_scenario(additive_config):
    return Scenario(
        "small",
        additive_config,
        seeds=(0, 1),
        etas=(0.2, 0.1),
        workers=2,
        tolerances={TOL_OUTLIER_LOCATION: 0.5, TOL_OUTLIER_MASS: 0.3},
    )


@pytest.mark.parametrize(
    "options",
    [
        {"seeds": ()},
        {"seeds": (0,), "grid_step": 0.0},
        {"seeds": (0,), "margin": -1.0},
        {"seeds": (0,), "workers": 0},
        {"seeds": (0,), "curves": ("histogram",)},
        {"seeds": (0,), "tolerances": {"speed": 1.0}},
        {"seeds": (0,), "max_noise": 0.0},
    ],
)
def test_scenario_validation(additive_config, options):
    with pytest.raises(ConfigError):
        Scenario("bad", additive_config, **options)


def test_scenario_defaults(additive_config, multiplicative_config):
    scenario = Scenario("s", additive_config, seeds=(0,), energies=(0.0, 1.0), etas=(0.1,))
    assert scenario.trim == 0.2
    assert scenario.window == pytest.approx(200**0.1 / np.sqrt(200))
    assert scenario.diagnostic_points().tolist() == [0.1j, 1 + 0.1j]
    assert Scenario("m", multiplicative_config, seeds=(0,)).trim == 0.4


def test_theory_closed_forms(additive_config, multiplicative_config):
    theory = Theory(additive_config)
    assert theory.law is not None
    assert theory.support() == [(-2.0, 2.0)]
    outlier = theory.outlier()
    assert (outlier.location, outlier.mass) == pytest.approx((10 / 3, 8 / 9))
    assert theory.edge_profiles() is None
    theory = Theory(multiplicative_config)
    assert theory.edge_profiles() == pytest.approx({"edge": 2.0, "squared_gap": 2 / 3})


def test_theory_kernel_atom_is_not_an_outlier():
    config = SpikedModelConfig(model=MODEL_MULTIPLICATIVE, n=100, m=50, theta=2.0)
    theory = Theory(config)
    assert theory.support()[0] == (0.0, 0.0)
    assert len(theory.bulk_intervals()) == 1
    assert not theory.outlier().exists


def test_theory_general_base(two_atom_base):
    """Test a non-Dirac base goes through the fixed-point solver."""
    config = SpikedModelConfig(model=MODEL_ADDITIVE, n=100, theta=3.0, base_spectrum=two_atom_base)
    theory = Theory(config)
    assert theory.law is None
    curve = theory.profile_curve(np.array([1.0, 10.0]))
    assert curve[0] > 0 and np.isnan(curve[1])
    density, atoms = theory.density_curve(np.array([1.0]))
    assert density[0] > 0
    assert len(atoms) == 1 and atoms[0][0] > 3.0


def test_profile_grid_and_interior(additive_config):
    scenario = Scenario("g", additive_config, seeds=(0,), grid_start=-1.0, grid_stop=1.0, grid_step=0.5)
    theory = Theory(additive_config)
    assert profile_grid(scenario, theory).tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    default = profile_grid(Scenario("d", additive_config, seeds=(0,)), theory)
    assert default[0] == -2.0 and default[-1] == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        profile_grid(Scenario("r", additive_config, seeds=(0,), grid_start=1.0, grid_stop=0.0), theory)
    (interval,) = interior_intervals([(-2.0, 2.0), (0.0, 0.3)], 0.2)
    assert interval == pytest.approx((-1.8, 1.8))


def test_simulate_normalization(additive_config):
    realized, measure = simulate(additive_config)
    assert measure.n == 200
    assert abs(measure.weights.sum() - 1) < 1e-8
    assert realized.matrix[0, 0] == pytest.approx(3.0, abs=0.5)


def test_run_scenario(small_scenario):
    """Test a small additive scenario locates the outlier and flags by tolerance."""
    report = run_scenario(small_scenario)
    assert report.failed_seeds == []
    assert set(report.flags) == {TOL_OUTLIER_LOCATION, TOL_OUTLIER_MASS}
    assert report.passed
    assert report.outlier_location == pytest.approx(10 / 3, abs=0.5)
    assert report.profile is not None
    assert report.local_law_summary is not None
    for result in report.results:
        assert result.weight_sum_error < 1e-8
        assert result.moment_error < 1e-6
    content = report.to_dict()
    assert content["seeds"] == [0, 1]
    json.dumps(content)


def test_run_scenario_writes_artifacts(small_scenario, tmp_path):
    scenario = replace(small_scenario, outputs=str(tmp_path))
    run_scenario(scenario)
    names = {path.name for path in tmp_path.iterdir()}
    for name in (
        "small_seed0_spectrum.csv",
        "small_seed1_diagnostic.csv",
        "small_law.csv",
        "small_profile.csv",
        "small_outliers.csv",
        "small_report.json",
    ):
        assert name in names


def test_run_scenario_is_deterministic(small_scenario, tmp_path):
    contents = []
    for attempt in ("first", "second"):
        directory = tmp_path / attempt
        run_scenario(replace(small_scenario, outputs=str(directory)))
        contents.append({path.name: path.read_bytes() for path in directory.iterdir()})
    assert contents[0] == contents[1]


def test_failed_seeds_are_recorded(small_scenario):
    """Test a numerical failure is reported per seed, not raised."""
    with patch(
        "spiked_spectra.experiments.sample", side_effect=ConvergenceError("boom")
    ):
        report = run_scenario(small_scenario)
    assert report.failed_seeds == [0, 1]
    assert report.results[0].error == "boom"
    assert not report.passed


def test_absent_outlier_flags(additive_config):
    scenario = Scenario(
        "subcritical",
        SpikedModelConfig(model=MODEL_ADDITIVE, n=200, theta=0.5),
        seeds=(0,),
        energies=(),
        curves=(CURVE_OUTLIER,),
        margin=0.3,
        tolerances={TOL_OUTLIER_MASS: 0.5},
    )
    report = run_scenario(scenario)
    assert not report.theory_outlier.exists
    assert report.flags == {TOL_OUTLIER_MASS: True}


def test_subcritical_weight_is_a_seed_mean():
    """Test the no-outlier weight bound applies to the mean over seeds of the largest weight."""
    weights = {0: 0.0506, 1: 0.0500, 2: 0.0316, 3: 0.0608, 4: 0.0441}

    def fake_seed(scenario, theory, expected, support, grid, seed):
        return SeedResult(seed=seed, max_weight=weights[seed])

    for bound, passed in ((0.05, True), (0.045, False)):
        scenario = Scenario(
            "subcritical",
            SpikedModelConfig(model=MODEL_ADDITIVE, n=2000, theta=0.9),
            seeds=tuple(weights),
            energies=(),
            curves=(CURVE_OUTLIER,),
            margin=0.2,
            tolerances={TOL_OUTLIER_MASS: bound},
        )
        with patch("spiked_spectra.experiments._run_seed", side_effect=fake_seed):
            report = run_scenario(scenario)
        assert report.max_weight == pytest.approx(0.04742)
        assert report.flags == {TOL_OUTLIER_MASS: passed}
        assert report.to_dict()["max_weight"] == pytest.approx(0.04742)


def test_profile_flag_needs_resolved_coverage(additive_config):
    """Test a noise-restricted sup-error only passes when enough windows are resolved."""
    options = dict(
        seeds=(0, 1, 2),
        energies=(),
        curves=(CURVE_PROFILE,),
        tolerances={TOL_PROFILE_SUP_ERROR: 10.0},
    )
    loose = run_scenario(Scenario("loose", additive_config, max_noise=100.0, **options))
    assert loose.profile_coverage == pytest.approx(1.0)
    assert loose.flags == {TOL_PROFILE_SUP_ERROR: True}
    strict = run_scenario(Scenario("strict", additive_config, max_noise=1e-3, **options))
    assert strict.profile_coverage == 0.0
    assert strict.flags == {TOL_PROFILE_SUP_ERROR: False}
    plain = run_scenario(Scenario("plain", additive_config, **options))
    assert plain.profile_coverage == pytest.approx(1.0)


def test_ratio_routes_agree(two_atom_base):
    """Test the density-ratio profile matches the boundary-value formula inside the bulk."""
    solution = FreeAdditiveSolution(two_atom_base)
    error = _route_error(
        solution,
        general_ratio_additive(3.0, solution),
        lambda boundary, x: additive_boundary_ratio(3.0, boundary, x),
        points=40,
    )
    assert error < 1e-2


def test_theory_tables(small_scenario):
    tables = theory_tables(small_scenario)
    assert set(tables) == {"law", "theory_profile", "outlier"}
    assert "true" in tables["outlier"].to_csv()


def test_figure_scenarios():
    names = [scenario.name for scenario in figure_scenarios()]
    assert names == [
        "profile_additive_theta2",
        "profile_additive_theta-4",
        "profile_covariance_alpha4",
        "profile_covariance_alpha2",
        "pooled_covariance_n2000",
        "pooled_covariance_n3000",
    ]
    pooled = figure_scenarios()[-1]
    assert len(pooled.seeds) == 10 and pooled.window_scale == 1.0


def test_acceptance_oracle():
    report = AcceptanceSuite(workers=1).run(only=["oracle"])
    assert [criterion.name for criterion in report.criteria] == ["oracle"]
    assert report.passed
    assert json.loads(report.to_json())["passed"] is True


def test_acceptance_records_errors():
    suite = AcceptanceSuite(workers=1)
    with patch.object(AcceptanceSuite, "oracle", side_effect=ConvergenceError("bad")):
        report = suite.run(only=["oracle"])
    assert not report.passed
    assert report.criteria[0].details == {"error": "bad"}


def test_acceptance_sampler_convergence():
    report = AcceptanceSuite(workers=1).run(only=["sampler_convergence"])
    (criterion,) = report.criteria
    assert criterion.passed
    distances = criterion.details["kolmogorov_distance"]
    assert set(distances) == {MODEL_ADDITIVE, MODEL_MULTIPLICATIVE}
    assert max(distances.values()) < 0.02


def test_acceptance_criteria_names():
    names = [name for name, _ in AcceptanceSuite().criteria()]
    assert names == [
        "oracle",
        "outliers_additive",
        "outliers_multiplicative",
        "profiles",
        "general_base",
        "normalization",
        "sampler_convergence",
        "local_law_scaling",
        "determinism",
    ]
