"""Tests for the fixed-point solvers and the outlier equations."""
import logging

import numpy as np
import pytest

from spiked_spectra.spectra.analytic import (
    FreeAdditiveSolution,
    FreeMultiplicativeSolution,
    OutlierReport,
    SolverSettings,
    atom_mass_from_residue,
    find_outlier_additive,
    find_outlier_multiplicative,
    outlier_F,
    outlier_mass_additive,
    outlier_mass_multiplicative,
    solve_free_additive,
    solve_free_multiplicative,
    spiked_stieltjes_additive,
    spiked_stieltjes_multiplicative,
    subordination_w,
)
from spiked_spectra.spectra.closed_forms import (
    general_ratio_additive,
    general_ratio_multiplicative,
    marchenko_pastur_evaluator,
    marchenko_pastur_stieltjes,
    semicircle_stieltjes,
    spiked_mp_law,
    spiked_semicircle_law,
)
from spiked_spectra.spectra.measures import AtomicMeasure
from spiked_spectra.utils.errors import DomainError, NonConvergence, SupportError


def test_additive_oracle(semicircle_solution):
    """Test the delta_0 fixed point reproduces the semicircle transform."""
    z = np.linspace(-6.0, 6.0, 200) + 0.01j
    assert np.max(np.abs(semicircle_solution(z) - semicircle_stieltjes(z))) <= 1e-8


@pytest.mark.parametrize("alpha", [0.5, 4.0])
def test_multiplicative_oracle(alpha):
    """Test the delta_1 fixed point reproduces Marchenko-Pastur."""
    z = np.linspace(-2.0, 12.0, 200) + 0.01j
    solved = solve_free_multiplicative(AtomicMeasure.dirac(1.0), alpha, z)
    assert np.max(np.abs(solved - marchenko_pastur_stieltjes(alpha, z))) <= 1e-8


def test_scalar_in_scalar_out(semicircle_solution):
    value = solve_free_additive(AtomicMeasure.dirac(0.0), 0.5 + 0.5j)
    assert isinstance(value, complex)
    assert value == pytest.approx(semicircle_solution(0.5 + 0.5j))


def test_residual_below_tolerance(mp_small_solution, two_atom_base):
    z = np.array([0.3 + 0.05j, 1.0 + 0.01j, 4.0 + 0.2j])
    assert np.all(mp_small_solution.residual(z) < 1e-10)
    general = FreeAdditiveSolution(two_atom_base)
    assert np.all(general.residual(z) < 1e-10)
    assert np.all(general(z).imag > 0)


def test_guard(semicircle_solution):
    with pytest.raises(DomainError):
        semicircle_solution(0.5 + 1e-6j)
    with pytest.raises(DomainError):
        semicircle_solution.evaluator()(0.5 + 1e-6j)


def test_solver_settings_validation():
    with pytest.raises(DomainError):
        SolverSettings(damping=0.0)
    with pytest.raises(DomainError):
        SolverSettings(tolerance=-1.0)
    assert SolverSettings().with_damping(0.3).damping == 0.3


def test_non_convergence_reports(caplog):
    """Test the damping fallback is logged before giving up."""
    solution = FreeAdditiveSolution(AtomicMeasure.dirac(0.0), SolverSettings(max_iterations=1))
    with caplog.at_level(logging.WARNING):
        with pytest.raises(NonConvergence) as error:
            solution(1j)
    assert "retrying" in caplog.text
    assert error.value.iterations == 1
    assert error.value.worst_residual > 0


def test_semicircle_support(semicircle_solution):
    (interval,) = semicircle_solution.support()
    assert interval == pytest.approx((-2.0, 2.0), abs=2e-3)
    assert semicircle_solution.in_support(0.0)
    assert not semicircle_solution.in_support(2.5)


def test_marchenko_pastur_support(mp_solution, mp_small_solution):
    (interval,) = mp_solution.support()
    assert interval == pytest.approx((1.0, 9.0), abs=2e-3)
    zero, bulk = mp_small_solution.support()
    assert zero == (0.0, 0.0)
    assert bulk == pytest.approx(((1 - np.sqrt(0.5)) ** 2, (1 + np.sqrt(0.5)) ** 2), abs=2e-3)


def test_boundary_density_integrates_to_one(two_atom_base):
    solution = FreeAdditiveSolution(two_atom_base)
    grid = np.linspace(-5.0, 5.0, 10001)
    density = solution.boundary_density(grid)
    assert np.all(density >= 0)
    assert np.sum(density) * (grid[1] - grid[0]) == pytest.approx(1.0, abs=1e-3)
    assert density == pytest.approx(density[::-1], abs=1e-6)


def test_complement(semicircle_solution):
    left, right = semicircle_solution.complement()
    assert left[0] == -np.inf and left[1] == pytest.approx(-2.0, abs=3e-3)
    assert right[1] == np.inf and right[0] == pytest.approx(2.0, abs=3e-3)


def test_spiked_transform_matches_closed_form(semicircle_solution, mp_solution):
    z = np.array([0.3 + 0.1j, 2.5 + 0.05j, -1.0 + 1.0j])
    law = spiked_semicircle_law(2.0)
    assert np.allclose(spiked_stieltjes_additive(2.0, semicircle_solution, z), law.stieltjes(z))
    law = spiked_mp_law(4.0, 2.0)
    z = np.array([5.0 + 0.1j, 10.0 + 0.05j, 0.5 + 0.5j])
    assert np.allclose(spiked_stieltjes_multiplicative(2.0, mp_solution, z), law.stieltjes(z))
    with pytest.raises(DomainError):
        spiked_stieltjes_multiplicative(0.0, mp_solution, z)


def test_subordination_w(semicircle_solution):
    assert subordination_w(semicircle_solution, 2.5) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(SupportError):
        subordination_w(semicircle_solution, 0.0)


def test_outlier_F(mp_solution):
    """Test F(y) = alpha y - y - s(1/y) at the theta = 2 outlier."""
    assert outlier_F(mp_solution, 0.1) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(SupportError):
        outlier_F(mp_solution, 0.0)
    with pytest.raises(SupportError):
        outlier_F(mp_solution, 0.2)


@pytest.mark.parametrize("theta", [1.1, 1.5, 2.0, 3.0, -2.0, -4.0])
def test_additive_outlier(semicircle_solution, theta):
    """Test location theta + 1/theta and mass 1 - 1/theta^2, near the threshold too."""
    report = find_outlier_additive(theta, semicircle_solution)
    assert report.exists
    assert report.location == pytest.approx(theta + 1 / theta, abs=1e-6)
    assert report.mass == pytest.approx(1 - 1 / theta**2, abs=1e-6)


def test_real_value_off_the_bulk(semicircle_solution, mp_solution):
    x = np.array([-3.0, 2.01, 2.5, 6.0])
    exact = (-x + np.sign(x) * np.sqrt(x**2 - 4)) / 2
    assert np.max(np.abs(semicircle_solution.real_value(x) - exact)) <= 1e-10
    assert mp_solution.real_value(10.0) == pytest.approx(-0.2, abs=1e-10)


def test_zero_weight_atoms_leave_the_outlier_unchanged(two_atom_base):
    padded = AtomicMeasure(
        np.append(two_atom_base.locations, [0.0, 7.0]),
        np.append(two_atom_base.weights, [0.0, 0.0]),
    )
    plain = find_outlier_additive(3.0, FreeAdditiveSolution(two_atom_base))
    extended = find_outlier_additive(3.0, FreeAdditiveSolution(padded))
    assert extended.location == pytest.approx(plain.location, abs=1e-9)
    assert extended.mass == pytest.approx(plain.mass, abs=1e-9)


@pytest.mark.parametrize("theta", [0.5, -0.9, 0.0])
def test_additive_no_outlier(semicircle_solution, theta):
    assert find_outlier_additive(theta, semicircle_solution) == OutlierReport.absent(
        theta, "additive"
    )
    assert outlier_mass_additive(theta, semicircle_solution) is None


@pytest.mark.parametrize(
    "alpha, theta, location, mass",
    [(4.0, 2.0, 10.0, 0.6), (4.0, 0.25, 2 / 3, 0.8333333), (0.5, 4.0, 10 / 3, 0.4666667)],
)
def test_multiplicative_outlier(alpha, theta, location, mass):
    solution = FreeMultiplicativeSolution(AtomicMeasure.dirac(1.0), alpha)
    report = find_outlier_multiplicative(theta, solution)
    assert report.exists
    assert report.location == pytest.approx(location, abs=1e-4)
    assert report.mass == pytest.approx(mass, abs=1e-3)


def test_multiplicative_no_outlier(mp_solution):
    assert not find_outlier_multiplicative(1.4, mp_solution).exists
    assert outlier_mass_multiplicative(1.4, mp_solution) is None
    with pytest.raises(DomainError):
        find_outlier_multiplicative(-1.0, mp_solution)


def test_general_base_outlier_matches_residue(two_atom_base):
    """Test 1/w'(x) against the residue of the spiked transform."""
    solution = FreeAdditiveSolution(two_atom_base)
    report = find_outlier_additive(3.0, solution)
    assert report.exists and report.location > 3.0
    residue = atom_mass_from_residue(solution.spiked(3.0), report.location, eps=1e-4)
    assert residue == pytest.approx(report.mass, abs=1e-3)


def test_atom_mass_from_residue():
    law = spiked_semicircle_law(2.0)
    assert atom_mass_from_residue(law.evaluator(), 2.5, eps=1e-9) == pytest.approx(0.75, abs=1e-6)
    assert atom_mass_from_residue(marchenko_pastur_evaluator(0.5), 0.0, eps=1e-9) == pytest.approx(
        0.5, abs=1e-6
    )


def test_general_ratios(semicircle_solution, mp_solution):
    ratio = general_ratio_additive(2.0, semicircle_solution)
    assert ratio(0.0) == pytest.approx(0.2, rel=1e-3)
    ratio = general_ratio_multiplicative(2.0, mp_solution)
    assert ratio(5.0) == pytest.approx(0.4, rel=1e-3)
