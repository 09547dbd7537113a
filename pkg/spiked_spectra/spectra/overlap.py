"""Version 0.1.0"""
# Overlap Module
# Quantities read off eigenpairs: the spectral measure in the spike
# direction, windowed square-projection profiles, outlier clusters and
# the local-law error diagnostic.

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from spiked_spectra.const import (
    CLUSTER_TOLERANCE,
    DEFAULT_MARGIN,
    DEFAULT_TAU,
    DEFAULT_WINDOW_EXPONENT,
    DEFAULT_WINDOW_SCALE,
)
from spiked_spectra.spectra.eig import EigenDecomposition
from spiked_spectra.spectra.measures import StieltjesEvaluator, WeightedSpectralMeasure
from spiked_spectra.utils.errors import DomainError, NormError

_LOGGER = logging.getLogger(__name__)

Interval = Tuple[float, float]


def spectral_measure_in_direction(
    decomp: EigenDecomposition, v
) -> WeightedSpectralMeasure:
    """Eigenvalues weighted by <phi_i, v>^2."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != decomp.n:
        raise NormError(f"direction has {v.size} entries, matrix has {decomp.n}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1) > 1e-10:
        raise NormError(f"direction must be a unit vector, |v| = {norm!r}")
    weights = (decomp.eigenvectors.T @ v) ** 2
    return WeightedSpectralMeasure(decomp.eigenvalues, weights)


@dataclass(frozen=True, eq=False)
class OverlapProfile:
    """Windowed profile; estimates are NaN where the window holds no eigenvalue."""

    grid: np.ndarray
    estimates: np.ndarray
    counts: np.ndarray
    masses: np.ndarray
    window_half_width: float
    n: int
    theory: Optional[np.ndarray] = None

    @property
    def present(self) -> np.ndarray:
        return self.counts >= 1

    def with_theory(self, theory) -> "OverlapProfile":
        return OverlapProfile(
            grid=self.grid,
            estimates=self.estimates,
            counts=self.counts,
            masses=self.masses,
            window_half_width=self.window_half_width,
            n=self.n,
            theory=np.asarray(theory, dtype=float),
        )

    def abs_errors(self) -> np.ndarray:
        if self.theory is None:
            return np.full(self.grid.shape, np.nan)
        return np.abs(self.estimates - self.theory)

    def standard_errors(self) -> np.ndarray:
        """theory * sqrt(2 / count): spread of a window mean of count scaled chi^2_1 weights."""
        errors = np.full(self.grid.shape, np.inf)
        if self.theory is None:
            return errors
        present = self.present
        errors[present] = np.abs(self.theory[present]) * np.sqrt(2.0 / self.counts[present])
        return errors

    def resolved(self, lo: float = -np.inf, hi: float = np.inf, max_noise: float = np.inf):
        """Present grid points of [lo, hi] whose standard error is at most max_noise."""
        keep = self.present & (self.grid >= lo) & (self.grid <= hi)
        if np.isfinite(max_noise):
            keep &= self.standard_errors() <= max_noise
        return keep

    def coverage(self, lo: float = -np.inf, hi: float = np.inf, max_noise: float = np.inf) -> float:
        inside = (self.grid >= lo) & (self.grid <= hi)
        if not np.any(inside):
            return 0.0
        return float(np.count_nonzero(self.resolved(lo, hi, max_noise)) / np.count_nonzero(inside))

    def sup_error(self, lo: float = -np.inf, hi: float = np.inf, max_noise: float = np.inf) -> float:
        """Largest error over resolved grid points of [lo, hi]; inf if none."""
        keep = self.resolved(lo, hi, max_noise)
        if self.theory is None or not np.any(keep):
            return float("inf")
        return float(np.max(self.abs_errors()[keep]))


def window_half_width(
    n: int,
    exponent: float = DEFAULT_WINDOW_EXPONENT,
    scale: float = DEFAULT_WINDOW_SCALE,
) -> float:
    """n^exponent / n^scale; the default is n^0.1 / sqrt(n)."""
    return float(n**exponent / n**scale)


def windowed_profile(
    measure: WeightedSpectralMeasure, grid, epsilon: float
) -> OverlapProfile:
    if epsilon <= 0:
        raise DomainError(f"window half-width must be positive, got {epsilon!r}")
    grid = np.asarray(grid, dtype=float).ravel()
    eigenvalues, weights = measure.ascending()
    cumulative = np.concatenate(([0.0], np.cumsum(weights)))
    first = np.searchsorted(eigenvalues, grid - epsilon, side="left")
    last = np.searchsorted(eigenvalues, grid + epsilon, side="right")
    counts = last - first
    masses = cumulative[last] - cumulative[first]
    estimates = np.full(grid.shape, np.nan)
    present = counts >= 1
    estimates[present] = measure.n * masses[present] / counts[present]
    _LOGGER.debug(
        "Profile on %s points, eps=%s, %s empty windows",
        grid.size,
        epsilon,
        int(np.count_nonzero(~present)),
    )
    return OverlapProfile(
        grid=grid,
        estimates=estimates,
        counts=counts,
        masses=masses,
        window_half_width=float(epsilon),
        n=measure.n,
    )


def pool_profiles(profiles: Sequence[OverlapProfile]) -> OverlapProfile:
    """Profile of several independent matrices of the same size, windows merged."""
    if not profiles:
        raise DomainError("nothing to pool")
    head = profiles[0]
    for profile in profiles[1:]:
        if profile.n != head.n or not np.array_equal(profile.grid, head.grid):
            raise DomainError("pooled profiles need the same grid and matrix size")
    counts = np.sum([profile.counts for profile in profiles], axis=0)
    masses = np.sum([profile.masses for profile in profiles], axis=0)
    estimates = np.full(head.grid.shape, np.nan)
    present = counts >= 1
    estimates[present] = head.n * masses[present] / counts[present]
    return OverlapProfile(
        grid=head.grid,
        estimates=estimates,
        counts=counts,
        masses=masses,
        window_half_width=head.window_half_width,
        n=head.n,
        theory=head.theory,
    )


def _distance_to_support(eigenvalues, support: Iterable[Interval]):
    distance = np.full(eigenvalues.shape, np.inf)
    for lo, hi in support:
        gap = np.maximum(np.maximum(lo - eigenvalues, eigenvalues - hi), 0.0)
        distance = np.minimum(distance, gap)
    return distance


def partition_spectrum(
    measure: WeightedSpectralMeasure, support: Iterable[Interval], margin: float = DEFAULT_MARGIN
):
    """Split the (eigenvalue, weight) points into outliers and bulk."""
    if margin <= 0:
        raise DomainError(f"margin must be positive, got {margin!r}")
    support = list(support)
    outside = _distance_to_support(measure.eigenvalues, support) > margin
    points = np.column_stack((measure.eigenvalues, measure.weights))
    return points[outside], points[~outside]


def extract_outliers(
    measure: WeightedSpectralMeasure, bulk_support: Iterable[Interval], margin: float = DEFAULT_MARGIN
) -> List[Tuple[float, float]]:
    """Outlier clusters (mean location, summed weight), largest first."""
    outliers, _ = partition_spectrum(measure, bulk_support, margin)
    clusters: List[List[float]] = []
    for eigenvalue, weight in outliers:
        if clusters and clusters[-1][-1] - eigenvalue <= CLUSTER_TOLERANCE:
            clusters[-1][0] += eigenvalue
            clusters[-1][1] += weight
            clusters[-1][2] += 1
            clusters[-1][3] = eigenvalue
        else:
            clusters.append([eigenvalue, weight, 1, eigenvalue])
    return [(total / count, weight) for total, weight, count, _ in clusters]


@dataclass(frozen=True, eq=False)
class LocalLawDiagnostic:
    energies: np.ndarray
    etas: np.ndarray
    abs_shat: np.ndarray
    psi: np.ndarray
    ratio: np.ndarray
    n: int
    tau: float

    @property
    def summary(self) -> float:
        """max |s_hat| / psi over the grid."""
        return float(np.max(self.ratio))

    def median_by_eta(self):
        """Sorted distinct etas and the median |s_hat| at each."""
        levels = np.unique(self.etas)
        return levels, np.array([np.median(self.abs_shat[self.etas == eta]) for eta in levels])


def check_local_law_domain(points, n: int, tau: float = DEFAULT_TAU) -> None:
    points = np.asarray(points, dtype=complex).ravel()
    lower = n ** (-1 + tau)
    inside = (points.imag >= lower) & (points.imag <= 1 / tau) & (np.abs(points.real) <= 1 / tau)
    if not np.all(inside):
        bad = points[~inside][0]
        raise DomainError(
            f"z={bad!r} outside the local-law domain n^(-1+tau) <= eta <= 1/tau, |E| <= 1/tau"
        )


def local_law_diagnostic(
    empirical: StieltjesEvaluator,
    theory: StieltjesEvaluator,
    grid,
    n: int,
    tau: float = DEFAULT_TAU,
    envelope: Optional[StieltjesEvaluator] = None,
) -> LocalLawDiagnostic:
    """|s_emp - s_theory| against psi = sqrt(Im s / (n eta)) + 1 / (n eta).

    envelope is the transform whose imaginary part enters psi, the bulk law
    when the compared quantities are spiked; it defaults to theory.
    """
    points = np.asarray(grid, dtype=complex).ravel()
    check_local_law_domain(points, n, tau)
    envelope = envelope or theory
    abs_shat = np.abs(np.atleast_1d(empirical(points)) - np.atleast_1d(theory(points)))
    n_eta = n * points.imag
    density = np.maximum(np.atleast_1d(envelope(points)).imag, 0.0)
    psi = np.sqrt(density / n_eta) + 1 / n_eta
    return LocalLawDiagnostic(
        energies=points.real,
        etas=points.imag,
        abs_shat=abs_shat,
        psi=psi,
        ratio=abs_shat / psi,
        n=n,
        tau=tau,
    )


def scaling_exponent(etas, values) -> float:
    """Least-squares slope of log(values) against log(etas)."""
    etas = np.asarray(etas, dtype=float)
    values = np.asarray(values, dtype=float)
    if etas.size < 2 or np.any(etas <= 0) or np.any(values <= 0):
        raise DomainError("the slope needs at least two positive points")
    slope, _ = np.polyfit(np.log(etas), np.log(values), 1)
    return float(slope)
