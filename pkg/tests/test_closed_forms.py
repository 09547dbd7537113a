"""Tests for the closed-form laws and profiles."""
import numpy as np
import pytest

from spiked_spectra.spectra.closed_forms import (
    additive_boundary_ratio,
    edge_profile_multiplicative,
    edge_profile_squared_gap,
    marchenko_pastur_atom,
    marchenko_pastur_density,
    marchenko_pastur_edges,
    marchenko_pastur_stieltjes,
    multiplicative_boundary_ratio,
    overlap_profile_additive,
    overlap_profile_multiplicative,
    ratio_general,
    semicircle_cdf,
    semicircle_density,
    semicircle_stieltjes,
    spiked_mp_law,
    spiked_semicircle_law,
)
from spiked_spectra.spectra.measures import density_from_stieltjes
from spiked_spectra.utils.errors import DivisionNearZero, DomainError


def test_semicircle_stieltjes_solves_quadratic():
    """Test s^2 + z s + 1 = 0 on the upper branch."""
    z = np.array([1j, 0.5 + 0.01j, -3 + 0.2j, 5j])
    s = semicircle_stieltjes(z)
    assert np.allclose(s**2 + z * s + 1, 0, atol=1e-12)
    assert np.all(s.imag > 0)


def test_semicircle_density_and_cdf():
    assert semicircle_density(0.0) == pytest.approx(1 / np.pi)
    assert semicircle_density(2.5) == 0.0
    assert semicircle_cdf(0.0) == pytest.approx(0.5)
    assert semicircle_cdf(-3.0) == pytest.approx(0.0)
    assert semicircle_cdf(2.0) == pytest.approx(1.0)


def test_marchenko_pastur_density():
    """Test alpha = 1 gives 1/(2 pi) at x = 2."""
    assert marchenko_pastur_edges(1.0) == pytest.approx((0.0, 4.0))
    assert marchenko_pastur_density(1.0, 2.0) == pytest.approx(1 / (2 * np.pi))
    assert marchenko_pastur_density(4.0, 0.5) == 0.0
    assert marchenko_pastur_atom(0.5) == pytest.approx(0.5)
    assert marchenko_pastur_atom(4.0) == 0.0
    with pytest.raises(DomainError):
        marchenko_pastur_edges(0.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 4.0])
def test_marchenko_pastur_stieltjes_inverts_to_density(alpha):
    a, b = marchenko_pastur_edges(alpha)
    x = np.linspace(a, b, 9)[1:-1]
    recovered = density_from_stieltjes(
        spiked_mp_law(alpha, 1.0).base_evaluator(), x, 1e-9
    )
    assert np.allclose(recovered, marchenko_pastur_density(alpha, x), atol=1e-6)


def test_marchenko_pastur_stieltjes_positive_outside():
    """Test s is real and positive left of the bulk when alpha > 1."""
    value = marchenko_pastur_stieltjes(4.0, 2 / 3 + 1e-12j)
    assert value.real == pytest.approx(0.5)


def test_spiked_semicircle_outlier():
    """Test theta = 2 has an atom at 5/2 of mass 3/4."""
    law = spiked_semicircle_law(2.0)
    assert law.atoms == ((2.5, 0.75),)
    assert law.density(0.0) == pytest.approx(1 / (5 * np.pi))
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("theta", [0.0, 0.5, 1.0, -1.0])
def test_spiked_semicircle_without_outlier(theta):
    law = spiked_semicircle_law(theta)
    assert law.atoms == ()
    assert law.total_mass() == pytest.approx(1.0, abs=1e-6)


def test_negative_spike_outlier_left():
    law = spiked_semicircle_law(-4.0)
    ((location, mass),) = law.atoms
    assert location == pytest.approx(-4.25)
    assert mass == pytest.approx(15 / 16)


@pytest.mark.parametrize(
    "alpha, theta, location, mass",
    [
        (4.0, 2.0, 10.0, 0.6),
        (4.0, 0.25, 2 / 3, 0.8333333333),
        (0.5, 4.0, 10 / 3, 0.4666666667),
    ],
)
def test_spiked_mp_outliers(alpha, theta, location, mass):
    law = spiked_mp_law(alpha, theta)
    outliers = [atom for atom in law.atoms if atom[0] != 0.0]
    assert len(outliers) == 1
    assert outliers[0][0] == pytest.approx(location)
    assert outliers[0][1] == pytest.approx(mass, rel=1e-8)


def test_spiked_mp_zero_atom():
    """Test the kernel atom (1 - alpha) / (alpha(theta - 1) + 1)."""
    (atom,) = spiked_mp_law(0.5, 2.0).atoms
    assert atom == pytest.approx((0.0, 1 / 3))
    assert spiked_mp_law(0.5, 4.0).atoms[0] == pytest.approx((0.0, 0.2))
    assert spiked_mp_law(4.0, 0.0).atoms == ((0.0, 1.0),)
    with pytest.raises(DomainError):
        spiked_mp_law(4.0, -1.0)


@pytest.mark.parametrize(
    "alpha, theta", [(4.0, 2.0), (4.0, 1.0), (4.0, 0.25), (0.5, 2.0), (0.5, 4.0), (1.0, 2.0)]
)
def test_spiked_mp_total_mass(alpha, theta):
    assert spiked_mp_law(alpha, theta).total_mass() == pytest.approx(1.0, abs=1e-5)


def test_spiked_density_inverts_stieltjes():
    law = spiked_semicircle_law(2.0)
    x = np.array([-1.5, 0.0, 0.5, 1.5])
    recovered = density_from_stieltjes(law.evaluator(), x, 1e-9)
    assert np.allclose(recovered, law.density(x), atol=1e-6)


def test_law_cdf_ends_at_one():
    law = spiked_mp_law(4.0, 2.0)
    assert law.cdf(0.5) == pytest.approx(0.0)
    assert law.cdf(9.5) == pytest.approx(0.4, abs=1e-5)
    assert law.cdf(11.0) == pytest.approx(1.0, abs=1e-5)


def test_additive_profile():
    assert overlap_profile_additive(2.0, 0.0) == pytest.approx(0.2)
    x = np.array([-1.0, 1.0])
    law = spiked_semicircle_law(2.0)
    assert np.allclose(law.profile(x), law.density(x) / semicircle_density(x))
    with pytest.raises(DomainError):
        overlap_profile_additive(2.0, 2.5)


def test_multiplicative_profile():
    assert overlap_profile_multiplicative(4.0, 2.0, 5.0) == pytest.approx(0.4)
    x = np.array([2.0, 5.0, 8.0])
    law = spiked_mp_law(4.0, 2.0)
    assert np.allclose(law.profile(x), law.density(x) / marchenko_pastur_density(4.0, x))
    with pytest.raises(DomainError):
        overlap_profile_multiplicative(4.0, 2.0, 0.5)


def test_edge_profiles_differ():
    """Test the right-edge value against the squared-gap expression."""
    assert edge_profile_multiplicative(4.0, 2.0) == pytest.approx(2.0)
    assert edge_profile_squared_gap(4.0, 2.0) == pytest.approx(2 / 3)
    assert overlap_profile_multiplicative(4.0, 2.0, 9.0) == pytest.approx(
        edge_profile_multiplicative(4.0, 2.0)
    )


def test_ratio_general_division_guard():
    with pytest.raises(DivisionNearZero):
        ratio_general(semicircle_density, semicircle_density, np.array([0.0, 2.5]))
    assert ratio_general(semicircle_density, semicircle_density, 1.0) == pytest.approx(1.0)


def test_boundary_ratios_match_profiles():
    x = np.array([-1.0, 0.0, 1.5])
    boundary = semicircle_stieltjes(x + 1e-12j)
    assert np.allclose(additive_boundary_ratio(2.0, boundary, x), overlap_profile_additive(2.0, x))
    x = np.array([2.0, 5.0, 8.0])
    boundary = marchenko_pastur_stieltjes(4.0, x + 1e-12j)
    assert np.allclose(
        multiplicative_boundary_ratio(4.0, 2.0, boundary, x),
        overlap_profile_multiplicative(4.0, 2.0, x),
    )
