"""Version 0.1.0"""
# Measures Module
# Atomic and weighted spectral measures, the upper-half-plane square root,
# Stieltjes transforms, density inversion and moments.
# Every other module of the package is built on these primitives.

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Callable, Iterable, Tuple, Union

import numpy as np

from spiked_spectra.const import (
    ATOM_MERGE_TOLERANCE,
    ATOMIC_MASS_TOLERANCE,
    ETA_CLOSED_FORM,
    ETA_FIXED_POINT,
    MAX_MOMENT_ORDER,
    SOURCE_CLOSED_FORM,
    SOURCE_EMPIRICAL,
    SOURCE_FIXED_POINT,
    SPECTRAL_MASS_TOLERANCE,
)
from spiked_spectra.utils.errors import DomainError, MeasureError, PoleError

_LOGGER = logging.getLogger(__name__)

# E + i*eta; numpy complex arrays are accepted wherever a point is.
ComplexPoint = complex


def _complex_input(z):
    arr = np.asarray(z, dtype=complex)
    return np.atleast_1d(arr), arr.ndim == 0


def _real_input(x):
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _output(values, scalar):
    if scalar:
        return values.reshape(-1)[0].item()
    return values


def branch_sqrt(z):
    """Square root whose imaginary part is never negative.

    Same values as sign(Im z) (|z| + z) / sqrt(2 (|z| + Re z)) with
    sign(0) = +1, so the negative real axis maps to +i sqrt(|z|); computed
    from the principal root to avoid the cancellation in |z| + Re z.
    """
    arr, scalar = _complex_input(z)
    principal = np.sqrt(arr.real + 1j * np.abs(arr.imag))
    result = np.where(arr.imag < 0, -np.conj(principal), principal)
    return _output(result, scalar)


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite probability measure sum_k w_k delta_{x_k}, locations increasing."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        locations = np.asarray(self.locations, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if locations.size == 0 or locations.size != weights.size:
            raise MeasureError(
                f"need matching non-empty locations and weights, got "
                f"{locations.size} and {weights.size}"
            )
        if not (np.all(np.isfinite(locations)) and np.all(np.isfinite(weights))):
            raise MeasureError("atoms must be finite")
        if np.any(weights < 0):
            raise MeasureError("atom weights must be non-negative")
        total = weights.sum()
        if abs(total - 1.0) > ATOMIC_MASS_TOLERANCE:
            raise MeasureError(f"atom weights sum to {total!r}, expected 1")

        order = np.argsort(locations, kind="stable")
        locations, weights = locations[order], weights[order]
        # merge near-duplicates emitted by eigensolvers
        starts = np.concatenate(([True], np.diff(locations) > ATOM_MERGE_TOLERANCE))
        groups = np.cumsum(starts) - 1
        merged_weights = np.bincount(groups, weights=weights)
        merged_locations = locations[starts]
        if merged_locations.size < locations.size:
            _LOGGER.debug(
                "Merged %s duplicate atoms", locations.size - merged_locations.size
            )
        merged_locations.setflags(write=False)
        merged_weights.setflags(write=False)
        object.__setattr__(self, "locations", merged_locations)
        object.__setattr__(self, "weights", merged_weights)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[float, float]]) -> "AtomicMeasure":
        pairs = [(float(x), float(w)) for x, w in atoms]
        if not pairs:
            raise MeasureError("an atomic measure needs at least one atom")
        locations, weights = zip(*pairs)
        return cls(np.array(locations), np.array(weights))

    @classmethod
    def dirac(cls, location: float = 0.0) -> "AtomicMeasure":
        return cls(np.array([location]), np.array([1.0]))

    @property
    def atoms(self):
        return list(zip(self.locations.tolist(), self.weights.tolist()))

    def __len__(self):
        return self.locations.size

    def __repr__(self):
        return f"AtomicMeasure({self.atoms!r})"

    def charged(self) -> "AtomicMeasure":
        """Copy without zero-weight atoms."""
        keep = self.weights > 0
        if np.all(keep):
            return self
        return AtomicMeasure(self.locations[keep], self.weights[keep])

    def is_dirac(self, location: float) -> bool:
        charged = self.charged()
        return len(charged) == 1 and charged.locations[0] == location

    def mean(self) -> float:
        return float(np.dot(self.weights, self.locations))


@dataclass(frozen=True, eq=False)
class WeightedSpectralMeasure:
    """Eigenvalues (descending) carrying non-negative weights summing to one.

    Uniform weights give the empirical spectral measure; weights
    <phi_i, v>^2 give the spectral measure in the direction v.
    """

    eigenvalues: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        eigenvalues = np.asarray(self.eigenvalues, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if eigenvalues.size == 0 or eigenvalues.size != weights.size:
            raise MeasureError(
                f"need matching non-empty eigenvalues and weights, got "
                f"{eigenvalues.size} and {weights.size}"
            )
        if np.any(weights < 0):
            raise MeasureError("spectral weights must be non-negative")
        total = weights.sum()
        if abs(total - 1.0) > SPECTRAL_MASS_TOLERANCE:
            raise MeasureError(f"spectral weights sum to {total!r}, expected 1")
        order = np.argsort(-eigenvalues, kind="stable")
        eigenvalues, weights = eigenvalues[order], weights[order]
        eigenvalues.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, eigenvalues) -> "WeightedSpectralMeasure":
        eigenvalues = np.asarray(eigenvalues, dtype=float).ravel()
        return cls(eigenvalues, np.full(eigenvalues.size, 1.0 / eigenvalues.size))

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def points(self):
        return list(zip(self.eigenvalues.tolist(), self.weights.tolist()))

    def ascending(self):
        """Eigenvalues and weights in increasing eigenvalue order."""
        return self.eigenvalues[::-1], self.weights[::-1]

    def __len__(self):
        return self.n


Measure = Union[AtomicMeasure, WeightedSpectralMeasure]


def _support_and_weights(measure: Measure):
    if isinstance(measure, AtomicMeasure):
        return measure.locations, measure.weights
    return measure.eigenvalues, measure.weights


def stieltjes_of_atomic(measure: AtomicMeasure, z):
    """sum_k w_k / (x_k - z); real z is allowed away from the atoms."""
    points, scalar = _complex_input(z)
    if np.any(points.imag < 0):
        raise DomainError("Stieltjes transforms are evaluated on Im(z) >= 0")
    on_axis = points.imag == 0
    if np.any(on_axis):
        gaps = np.abs(points.real[on_axis, None] - measure.locations[None, :])
        if np.any(gaps <= ATOM_MERGE_TOLERANCE):
            raise PoleError("z coincides with an atom of the measure")
    values = (measure.weights[None, :] / (measure.locations[None, :] - points[:, None])).sum(
        axis=1
    )
    return _output(values, scalar)


def stieltjes_of_spectral(measure: WeightedSpectralMeasure, z):
    """Empirical transform sum_i w_i / (lambda_i - z), i.e. <v, (M - z)^-1 v>."""
    points, scalar = _complex_input(z)
    if np.any(points.imag <= 0):
        raise DomainError("empirical Stieltjes transforms need Im(z) > 0")
    values = np.empty(points.size, dtype=complex)
    # 256 points per block
    for start in range(0, points.size, 256):
        chunk = points[start : start + 256]
        values[start : start + 256] = (
            measure.weights[None, :] / (measure.eigenvalues[None, :] - chunk[:, None])
        ).sum(axis=1)
    return _output(values, scalar)


@dataclass(frozen=True)
class StieltjesEvaluator:
    """Function-like object z -> s(z) on the upper half-plane."""

    rule: Callable[[np.ndarray], np.ndarray]
    source: str = SOURCE_CLOSED_FORM
    guard: float = 0.0
    label: str = ""

    def __call__(self, z):
        points, scalar = _complex_input(z)
        if np.any(points.imag <= 0) or np.any(points.imag < self.guard):
            raise DomainError(
                f"{self.label or self.source} evaluator needs Im(z) >= "
                f"{max(self.guard, 0.0)!r} (and > 0)"
            )
        values = np.asarray(self.rule(points), dtype=complex).reshape(points.shape)
        return _output(values, scalar)

    @property
    def boundary_eta(self) -> float:
        """Distance to the real axis used for boundary limits."""
        if self.source == SOURCE_FIXED_POINT:
            return max(ETA_FIXED_POINT, self.guard)
        return max(ETA_CLOSED_FORM, self.guard)

    def boundary_value(self, x):
        """s(x + i0), approximated at boundary_eta."""
        arr, scalar = _real_input(x)
        return _output(np.atleast_1d(self(arr + 1j * self.boundary_eta)), scalar)


def empirical_evaluator(measure: WeightedSpectralMeasure) -> StieltjesEvaluator:
    return StieltjesEvaluator(
        rule=lambda z: stieltjes_of_spectral(measure, z),
        source=SOURCE_EMPIRICAL,
        label="empirical",
    )


def density_from_stieltjes(s: StieltjesEvaluator, x, eta: float):
    """Im(s(x + i eta)) / pi, the inversion formula at a fixed small eta."""
    if eta <= 0 or eta < s.guard:
        raise DomainError(
            f"eta={eta!r} is below the guard {s.guard!r} of the "
            f"{s.label or s.source} evaluator"
        )
    arr, scalar = _real_input(x)
    values = np.atleast_1d(s(arr + 1j * eta))
    return _output(values.imag / np.pi, scalar)


def moment(measure: Measure, k: int) -> float:
    """k-th moment sum_i w_i x_i^k."""
    if int(k) != k or k < 0 or k > MAX_MOMENT_ORDER:
        raise DomainError(f"moment order must be an integer in [0, {MAX_MOMENT_ORDER}]")
    points, weights = _support_and_weights(measure)
    return float(np.dot(weights, points ** int(k)))


def kolmogorov_distance(measure: Measure, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_x |F_measure(x) - cdf(x)|, attained at the jump points."""
    points, weights = _support_and_weights(measure)
    order = np.argsort(points, kind="stable")
    points, weights = points[order], weights[order]
    upper = np.cumsum(weights)
    lower = upper - weights
    reference = np.asarray(cdf(points), dtype=float)
    return float(max(np.max(upper - reference), np.max(reference - lower)))
