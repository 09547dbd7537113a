"""Version 0.1.0"""
# Closed Forms Module
# Semicircle and Marchenko-Pastur laws, their rank-one spiked versions
# and the explicit overlap profiles.

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from spiked_spectra.const import (
    DIVISION_THRESHOLD,
    MODEL_ADDITIVE,
    MODEL_MULTIPLICATIVE,
    SOURCE_CLOSED_FORM,
)
from spiked_spectra.spectra.analytic import (
    FreeAdditiveSolution,
    FreeMultiplicativeSolution,
)
from spiked_spectra.spectra.measures import (
    StieltjesEvaluator,
    _complex_input,
    _output,
    _real_input,
    branch_sqrt,
    density_from_stieltjes,
)
from spiked_spectra.utils.errors import DivisionNearZero, DomainError

_LOGGER = logging.getLogger(__name__)

MASS_STEP = 1e-4


def semicircle_density(x):
    arr, scalar = _real_input(x)
    inside = np.abs(arr) <= 2
    values = np.zeros(arr.shape)
    values[inside] = np.sqrt(4 - arr[inside] ** 2) / (2 * np.pi)
    return _output(values, scalar)


def semicircle_cdf(x):
    arr, scalar = _real_input(x)
    clipped = np.clip(arr, -2.0, 2.0)
    values = (
        0.5
        + clipped * np.sqrt(4 - clipped**2) / (4 * np.pi)
        + np.arcsin(clipped / 2) / np.pi
    )
    return _output(values, scalar)


def semicircle_stieltjes(z):
    """(-z + sqrt(z^2 - 4)) / 2 on the upper branch."""
    points, scalar = _complex_input(z)
    values = (-points + np.atleast_1d(branch_sqrt(points**2 - 4))) / 2
    return _output(values, scalar)


def semicircle_evaluator() -> StieltjesEvaluator:
    return StieltjesEvaluator(rule=semicircle_stieltjes, label="semicircle")


def _check_alpha(alpha):
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")


def marchenko_pastur_edges(alpha: float) -> Tuple[float, float]:
    _check_alpha(alpha)
    root = np.sqrt(alpha)
    return (1 - root) ** 2, (1 + root) ** 2


def marchenko_pastur_atom(alpha: float) -> float:
    """Mass of the atom at 0, present when alpha < 1."""
    _check_alpha(alpha)
    return max(1.0 - alpha, 0.0)


def marchenko_pastur_density(alpha: float, x):
    """Absolutely continuous part on (a, b); the atom is marchenko_pastur_atom."""
    a, b = marchenko_pastur_edges(alpha)
    arr, scalar = _real_input(x)
    inside = (arr > a) & (arr < b)
    values = np.zeros(arr.shape)
    xs = arr[inside]
    values[inside] = np.sqrt((b - xs) * (xs - a)) / (2 * np.pi * xs)
    return _output(values, scalar)


def marchenko_pastur_stieltjes(alpha: float, z):
    """(alpha - z - 1 + sqrt((z - b)(z - a))) / (2z), atom at 0 included."""
    a, b = marchenko_pastur_edges(alpha)
    points, scalar = _complex_input(z)
    values = (alpha - points - 1 + np.atleast_1d(branch_sqrt((points - b) * (points - a)))) / (
        2 * points
    )
    return _output(values, scalar)


def marchenko_pastur_evaluator(alpha: float) -> StieltjesEvaluator:
    _check_alpha(alpha)
    return StieltjesEvaluator(
        rule=lambda z: marchenko_pastur_stieltjes(alpha, z),
        label=f"marchenko-pastur alpha={alpha!r}",
    )


@dataclass(frozen=True)
class RankOneLaw:
    """Limit of the spectral measure in the spike direction for a rank-one perturbation.

    atoms holds (location, mass) pairs; the bulk density lives on support.
    """

    model: str
    theta: float
    alpha: Optional[float]
    support: Tuple[float, float]
    atoms: Tuple[Tuple[float, float], ...] = ()

    def density(self, x):
        arr, scalar = _real_input(x)
        lo, hi = self.support
        inside = (arr > lo) & (arr < hi)
        xs = arr[inside]
        theta = self.theta
        values = np.zeros(arr.shape)
        if self.model == MODEL_ADDITIVE:
            values[inside] = np.sqrt(4 - xs**2) / (2 * np.pi * (theta**2 + 1 - theta * xs))
        else:
            alpha = self.alpha
            values[inside] = (
                theta
                * np.sqrt((hi - xs) * (xs - lo))
                / (
                    2
                    * np.pi
                    * xs
                    * (xs * (1 - theta) + theta * (alpha * theta - alpha + 1))
                )
            )
        return _output(values, scalar)

    def base_stieltjes(self, z):
        if self.model == MODEL_ADDITIVE:
            return semicircle_stieltjes(z)
        return marchenko_pastur_stieltjes(self.alpha, z)

    def stieltjes(self, z):
        """Spiked transform written through the unspiked closed form."""
        points, scalar = _complex_input(z)
        s = np.atleast_1d(self.base_stieltjes(points))
        theta = self.theta
        if self.model == MODEL_ADDITIVE:
            values = 1.0 / (theta - s - points)
        else:
            values = 1.0 / (theta * (self.alpha - 1) - points * theta * s - points)
        return _output(values, scalar)

    def evaluator(self) -> StieltjesEvaluator:
        return StieltjesEvaluator(
            rule=self.stieltjes,
            source=SOURCE_CLOSED_FORM,
            label=f"spiked {self.model} theta={self.theta!r}",
        )

    def base_evaluator(self) -> StieltjesEvaluator:
        if self.model == MODEL_ADDITIVE:
            return semicircle_evaluator()
        return marchenko_pastur_evaluator(self.alpha)

    def profile(self, x):
        if self.model == MODEL_ADDITIVE:
            return overlap_profile_additive(self.theta, x)
        return overlap_profile_multiplicative(self.alpha, self.theta, x)

    @property
    def atom_mass(self) -> float:
        return float(sum(mass for _, mass in self.atoms))

    def _bulk_nodes(self, step):
        # x = c - r cos(phi) clears the edge and 1/x singularities
        lo, hi = self.support
        centre, radius = (lo + hi) / 2, (hi - lo) / 2
        count = max(int(np.ceil((hi - lo) / step)), 16)
        width = np.pi / count
        phi = (np.arange(count) + 0.5) * width
        values = np.atleast_1d(self.density(centre - radius * np.cos(phi))) * radius * np.sin(phi)
        return width, values, centre, radius

    def bulk_mass(self, step: float = MASS_STEP) -> float:
        width, values, _, _ = self._bulk_nodes(step)
        return float(width * values.sum())

    def total_mass(self, step: float = MASS_STEP) -> float:
        return self.bulk_mass(step) + self.atom_mass

    def cdf(self, x, step: float = MASS_STEP):
        arr, scalar = _real_input(x)
        width, values, centre, radius = self._bulk_nodes(step)
        edges = centre - radius * np.cos(np.linspace(0.0, np.pi, values.size + 1))
        cumulative = np.concatenate(([0.0], np.cumsum(values) * width))
        result = np.interp(arr, edges, cumulative, left=0.0, right=cumulative[-1])
        for location, mass in self.atoms:
            result = result + np.where(arr >= location, mass, 0.0)
        return _output(result, scalar)


def spiked_semicircle_law(theta: float) -> RankOneLaw:
    atoms = ()
    if abs(theta) > 1:
        atoms = ((theta + 1 / theta, 1 - 1 / theta**2),)
    return RankOneLaw(
        model=MODEL_ADDITIVE, theta=float(theta), alpha=None, support=(-2.0, 2.0), atoms=atoms
    )


def spiked_mp_law(alpha: float, theta: float) -> RankOneLaw:
    a, b = marchenko_pastur_edges(alpha)
    if theta < 0:
        raise DomainError(f"covariance spikes must be non-negative, got {theta!r}")
    atoms = []
    if theta == 0:
        # the spike direction spans a kernel vector
        atoms.append((0.0, 1.0))
    elif alpha < 1:
        atoms.append((0.0, (1 - alpha) / (alpha * (theta - 1) + 1)))
    if theta not in (0, 1) and abs(theta - 1) > 1 / np.sqrt(alpha):
        location = theta * (alpha * theta - alpha + 1) / (theta - 1)
        mass = (1 - 1 / (alpha * (theta - 1) ** 2)) / (1 + 1 / (alpha * (theta - 1)))
        atoms.append((location, mass))
    _LOGGER.debug("Spiked MP law alpha=%s theta=%s atoms=%s", alpha, theta, atoms)
    return RankOneLaw(
        model=MODEL_MULTIPLICATIVE,
        theta=float(theta),
        alpha=float(alpha),
        support=(a, b),
        atoms=tuple(sorted(atoms)),
    )


def overlap_profile_additive(theta: float, x):
    """1 / (theta^2 - theta x + 1) on [-2, 2]."""
    arr, scalar = _real_input(x)
    if np.any(np.abs(arr) > 2):
        raise DomainError("the additive profile is defined on the bulk [-2, 2]")
    return _output(1.0 / (theta**2 - theta * arr + 1), scalar)


def overlap_profile_multiplicative(alpha: float, theta: float, x):
    """theta / (x(1 - theta) + theta(alpha theta - alpha + 1)) on [a, b]."""
    a, b = marchenko_pastur_edges(alpha)
    arr, scalar = _real_input(x)
    if np.any((arr < a) | (arr > b)):
        raise DomainError(f"the multiplicative profile is defined on the bulk [{a}, {b}]")
    return _output(theta / (arr * (1 - theta) + theta * (alpha * theta - alpha + 1)), scalar)


def edge_profile_multiplicative(alpha: float, theta: float) -> float:
    """Profile at the right edge b: theta / (1 + sqrt(alpha)(1 - theta))^2."""
    _check_alpha(alpha)
    return theta / (1 + np.sqrt(alpha) * (1 - theta)) ** 2


def edge_profile_squared_gap(alpha: float, theta: float) -> float:
    """theta / (1 + sqrt(alpha)(1 - theta)^2), the edge value with the square on the gap only."""
    _check_alpha(alpha)
    return theta / (1 + np.sqrt(alpha) * (1 - theta) ** 2)


def ratio_general(f_spiked_density: Callable, f_bulk_density: Callable, x):
    """Pointwise f_spiked / f_bulk where the bulk density is above DIVISION_THRESHOLD."""
    arr, scalar = _real_input(x)
    bulk = np.atleast_1d(np.asarray(f_bulk_density(arr), dtype=float))
    if np.any(bulk <= DIVISION_THRESHOLD):
        raise DivisionNearZero(
            f"bulk density below {DIVISION_THRESHOLD} at x={arr[bulk <= DIVISION_THRESHOLD][0]!r}"
        )
    spiked = np.atleast_1d(np.asarray(f_spiked_density(arr), dtype=float))
    return _output(spiked / bulk, scalar)


def general_ratio_additive(theta: float, free_add: FreeAdditiveSolution) -> Callable:
    """x -> f_{sc,A,theta}(x) / f_{sc,A}(x) through the fixed-point solver."""
    spiked, bulk = free_add.spiked(theta), free_add.evaluator()
    eta = free_add.boundary_eta
    return lambda x: ratio_general(
        lambda xs: density_from_stieltjes(spiked, xs, eta),
        lambda xs: density_from_stieltjes(bulk, xs, eta),
        x,
    )


def general_ratio_multiplicative(theta: float, free_mult: FreeMultiplicativeSolution) -> Callable:
    """x -> f_{alpha,Sigma,theta}(x) / f_{alpha,Sigma}(x) through the fixed-point solver."""
    spiked, bulk = free_mult.spiked(theta), free_mult.evaluator()
    eta = free_mult.boundary_eta
    return lambda x: ratio_general(
        lambda xs: density_from_stieltjes(spiked, xs, eta),
        lambda xs: density_from_stieltjes(bulk, xs, eta),
        x,
    )


def additive_boundary_ratio(theta: float, boundary, x):
    """1 / ((theta - a - x)^2 + b^2) with a + ib the bulk boundary value at x."""
    values = np.asarray(boundary, dtype=complex)
    arr = np.asarray(x, dtype=float)
    result = 1.0 / ((theta - values.real - arr) ** 2 + values.imag**2)
    return result.item() if result.ndim == 0 else result


def multiplicative_boundary_ratio(alpha: float, theta: float, boundary, x):
    """x theta / |theta(alpha - 1) - x theta s - x|^2 with s the bulk boundary value."""
    values = np.asarray(boundary, dtype=complex)
    arr = np.asarray(x, dtype=float)
    result = arr * theta / np.abs(theta * (alpha - 1) - arr * theta * values - arr) ** 2
    return result.item() if result.ndim == 0 else result
