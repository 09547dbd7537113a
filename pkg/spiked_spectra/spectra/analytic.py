"""Version 0.1.0"""
# Analytic Module
# Fixed-point solvers for the free additive convolution with the semicircle
# and the free multiplicative convolution with Marchenko-Pastur, the spiked
# transforms built on them, the support scan and the outlier equations.

from __future__ import annotations

from dataclasses import dataclass, replace
import logging
import threading
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from spiked_spectra.const import (
    ALGEBRAIC_ATOM_LIMIT,
    BISECTION_XTOL,
    DEFAULT_DAMPING,
    DEFAULT_GUARD,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    DENSITY_THRESHOLD,
    ETA_FIXED_POINT,
    F_PRIME_STEP,
    FALLBACK_DAMPING,
    MODEL_ADDITIVE,
    MODEL_MULTIPLICATIVE,
    POLISH_STEPS,
    REAL_AXIS_STEPS,
    SCAN_PADDING,
    SCAN_STEP,
    SOURCE_FIXED_POINT,
    TANGENCY_THRESHOLD,
    W_PRIME_STEP,
)
from spiked_spectra.spectra.measures import (
    AtomicMeasure,
    StieltjesEvaluator,
    _complex_input,
    _output,
    _real_input,
)
from spiked_spectra.utils.errors import (
    DomainError,
    NonConvergence,
    SupportError,
)

_LOGGER = logging.getLogger(__name__)

Interval = Tuple[float, float]


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    damping: float = DEFAULT_DAMPING
    guard: float = DEFAULT_GUARD

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping!r}")
        if self.tolerance <= 0 or self.max_iterations < 1 or self.guard <= 0:
            raise DomainError("tolerance, max_iterations and guard must be positive")

    def with_damping(self, damping: float) -> "SolverSettings":
        return replace(self, damping=damping)


@dataclass(frozen=True)
class OutlierReport:
    spike: float
    model: str
    exists: bool
    location: Optional[float] = None
    mass: Optional[float] = None

    def __post_init__(self):
        if not self.exists and (self.location is not None or self.mass is not None):
            raise ValueError("an absent outlier carries no location or mass")
        if self.exists and not 0 < self.mass <= 1 + 1e-9:
            raise ValueError(f"outlier mass {self.mass!r} outside (0, 1]")

    @classmethod
    def absent(cls, spike, model):
        return cls(spike=spike, model=model, exists=False)


def _iterate(update, z, start, tolerance, max_iterations, damping):
    """Damped iteration s <- (1-d) s + d T(s) on every point of z at once.

    A point is frozen at the first iterate whose residual |T(s) - s| is
    below tolerance * max(1, |s|). Returns the frozen values, the last
    iterates and the indices still running.
    """
    s = start.copy()
    result = np.full(z.shape, np.nan, dtype=complex)
    active = np.arange(z.size)
    if active.size == 0:
        return result, s, active
    for iteration in range(max_iterations):
        current = s[active]
        image = update(current, z[active])
        done = np.abs(image - current) < tolerance * np.maximum(1.0, np.abs(current))
        if np.any(done):
            result[active[done]] = current[done]
            active, current, image = active[~done], current[~done], image[~done]
            if active.size == 0:
                _LOGGER.debug("Fixed point reached after %s iterations", iteration + 1)
                break
        s[active] = (1 - damping) * current + damping * image
    return result, s, active


def _polish(update, derivative, s, z):
    # Newton steps on s - T(s); a step is kept only if it lowers the residual
    for _ in range(POLISH_STEPS):
        residual = s - update(s, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            candidate = s - residual / (1 - derivative(s, z))
        improved = np.isfinite(candidate)
        improved[improved] = np.abs(
            candidate[improved] - update(candidate[improved], z[improved])
        ) <= np.abs(residual[improved])
        s = np.where(improved, candidate, s)
    return s


def _solve(update, derivative, z, settings: SolverSettings):
    start = np.full(z.shape, 1j, dtype=complex)
    result, last, pending = _iterate(
        update, z, start, settings.tolerance, settings.max_iterations, settings.damping
    )
    if pending.size and settings.damping > FALLBACK_DAMPING:
        _LOGGER.warning(
            "%s of %s points did not converge with damping %s, retrying with %s",
            pending.size,
            z.size,
            settings.damping,
            FALLBACK_DAMPING,
        )
        retry, last_retry, still = _iterate(
            update,
            z[pending],
            last[pending],
            settings.tolerance,
            settings.max_iterations,
            FALLBACK_DAMPING,
        )
        result[pending] = retry
        pending = pending[still]
    if pending.size:
        worst = float(np.max(np.abs(update(last[pending], z[pending]) - last[pending])))
        raise NonConvergence(
            f"fixed point not reached at {pending.size} point(s), e.g. z={z[pending[0]]!r}; "
            "lower the damping or move further from the real axis",
            iterations=settings.max_iterations,
            damping=min(settings.damping, FALLBACK_DAMPING),
            worst_residual=worst,
        )
    result = _polish(update, derivative, result, z)
    residual = np.abs(result - update(result, z))
    if np.any(residual >= settings.tolerance * np.maximum(1.0, np.abs(result))):
        raise NonConvergence("self-consistency residual above tolerance after polishing")
    if np.any(result.imag <= 0):
        raise NonConvergence("fixed point left the upper half-plane")
    return result


def _companion_roots(coefficients):
    """Roots of a batch of polynomials, coefficients ordered low to high."""
    degree = coefficients.shape[1] - 1
    monic = coefficients[:, :degree] / coefficients[:, degree : degree + 1]
    companion = np.zeros((coefficients.shape[0], degree, degree), dtype=complex)
    if degree > 1:
        companion[:, np.arange(1, degree), np.arange(degree - 1)] = 1.0
    companion[:, :, -1] = -monic
    return np.linalg.eigvals(companion)


def _intervals_from_mask(grid, mask) -> List[Interval]:
    intervals = []
    if not np.any(mask):
        return intervals
    edges = np.diff(mask.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    stops = list(np.flatnonzero(edges == -1))
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        stops.append(mask.size - 1)
    for first, last in zip(starts, stops):
        intervals.append((float(grid[first]), float(grid[last])))
    return intervals


class _FreeSolution:
    """Shared machinery of the additive and multiplicative solutions."""

    model = ""

    def __init__(self, base: AtomicMeasure, settings: Optional[SolverSettings] = None):
        self.base = base
        self.settings = settings or SolverSettings()
        # zero-weight atoms change nothing downstream
        self._atoms = base.charged()
        self._locations = self._atoms.locations
        self._weights = self._atoms.weights
        self._support: Optional[List[Interval]] = None
        self._support_lock = threading.Lock()

    # subclasses provide the map, its derivative and the boundary polynomial
    def _update(self, s, z):
        raise NotImplementedError

    def _derivative(self, s, z):
        raise NotImplementedError

    def _boundary_polynomials(self, x):
        raise NotImplementedError

    def _scan_grid(self):
        raise NotImplementedError

    def _from_solved(self, solved, z):
        return solved

    def stieltjes(self, z):
        points, scalar = _complex_input(z)
        if np.any(points.imag < self.settings.guard):
            raise DomainError(
                f"Im(z) must be at least {self.settings.guard!r} for the fixed-point solver"
            )
        solved = _solve(self._update, self._derivative, points, self.settings)
        return _output(self._from_solved(solved, points), scalar)

    __call__ = stieltjes

    def residual(self, z, s=None):
        """|s - T(s)| for the equation the solver iterates."""
        points, scalar = _complex_input(z)
        values = np.atleast_1d(self.stieltjes(points) if s is None else np.asarray(s))
        values = self._to_iterated(values, points)
        return _output(np.abs(values - self._update(values, points)), scalar)

    def _to_iterated(self, s, z):
        return s

    def evaluator(self) -> StieltjesEvaluator:
        return StieltjesEvaluator(
            rule=self.stieltjes,
            source=SOURCE_FIXED_POINT,
            guard=self.settings.guard,
            label=f"{self.model} fixed point",
        )

    @property
    def boundary_eta(self) -> float:
        return max(ETA_FIXED_POINT, self.settings.guard)

    def boundary_value(self, x):
        """s(x + i eta) at the fixed-point boundary distance."""
        arr, scalar = _real_input(x)
        return _output(np.atleast_1d(self.stieltjes(arr + 1j * self.boundary_eta)), scalar)

    def real_value(self, x):
        """s(x) on the real axis off the bulk.

        Newton on the real fixed-point equation, started from the boundary
        value; the start lies within O(eta) of the branch continued from
        the upper half-plane.
        """
        arr, scalar = _real_input(x)
        points = arr.astype(complex)
        start = np.atleast_1d(self.boundary_value(arr)).real.astype(complex)
        s = self._to_iterated(start, points)
        for _ in range(REAL_AXIS_STEPS):
            with np.errstate(divide="ignore", invalid="ignore"):
                step = (s - self._update(s, points)) / (1 - self._derivative(s, points))
            step = np.where(np.isfinite(step), step.real, 0.0)
            s = (s - step).real.astype(complex)
            if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(s))):
                break
        values = self._from_solved(s, points).real
        drift = np.abs(values - start.real) > np.sqrt(self.boundary_eta)
        if np.any(drift):
            _LOGGER.warning("Real-axis Newton left the boundary branch at %s", arr[drift])
            values = np.where(drift, start.real, values)
        return _output(values, scalar)

    def boundary_density(self, x):
        """Density of the free convolution at x (limit from the upper half-plane)."""
        arr, scalar = _real_input(x)
        if len(self._atoms) <= ALGEBRAIC_ATOM_LIMIT:
            values = np.zeros(arr.shape)
            regular = self._regular_points(arr)
            if np.any(regular):
                roots = _companion_roots(self._boundary_polynomials(arr[regular]))
                values[regular] = np.maximum(self._root_density(roots, arr[regular]), 0.0)
        else:
            eta = self.boundary_eta
            near = np.atleast_1d(self.stieltjes(arr + 0.5j * eta)).imag
            far = np.atleast_1d(self.stieltjes(arr + 1j * eta)).imag
            values = np.maximum(2 * near - far, 0.0) / np.pi
        return _output(values, scalar)

    def _regular_points(self, x):
        return np.ones(x.shape, dtype=bool)

    def _root_density(self, roots, x):
        return roots.imag.max(axis=1) / np.pi

    def support(self) -> List[Interval]:
        """Bulk intervals, from a density scan on a grid of step SCAN_STEP."""
        with self._support_lock:
            if self._support is None:
                grid = self._scan_grid()
                density = np.atleast_1d(self.boundary_density(grid))
                self._support = self._extra_support() + _intervals_from_mask(
                    grid, density > DENSITY_THRESHOLD
                )
                _LOGGER.debug(
                    "Support scan of %s points found %s", grid.size, self._support
                )
            return list(self._support)

    def _extra_support(self) -> List[Interval]:
        return []

    def in_support(self, x: float) -> bool:
        for lo, hi in self._extra_support():
            if lo <= x <= hi:
                return True
        return bool(np.atleast_1d(self.boundary_density(x))[0] > DENSITY_THRESHOLD)

    def complement(self, lower: float = -np.inf) -> List[Interval]:
        """Components of the support complement, ends one scan step off the bulk."""
        edges = [lower]
        for lo, hi in self.support():
            edges.extend([lo - SCAN_STEP, hi + SCAN_STEP])
        edges.append(np.inf)
        components = []
        for left, right in zip(edges[::2], edges[1::2]):
            left = max(left, lower)
            if right > left:
                components.append((left, right))
        return components


class FreeAdditiveSolution(_FreeSolution):
    """s = s_{mu_sc [+] mu_A}, solving s = int dmu_A(l) / (l - s - z)."""

    model = MODEL_ADDITIVE

    def _update(self, s, z):
        return (
            self._weights[None, :]
            / (self._locations[None, :] - s[:, None] - z[:, None])
        ).sum(axis=1)

    def _derivative(self, s, z):
        return (
            self._weights[None, :]
            / (self._locations[None, :] - s[:, None] - z[:, None]) ** 2
        ).sum(axis=1)

    def _boundary_polynomials(self, x):
        # with u = s + x: (u - x) R(u) + sum_k w_k R(u) / (u - l_k) = 0
        locations, weights = self._locations, self._weights
        monic = np.polynomial.polynomial.polyfromroots(locations).real
        constant = np.polynomial.polynomial.polymulx(monic)
        for k in range(locations.size):
            partial = np.polynomial.polynomial.polyfromroots(np.delete(locations, k)).real
            constant[: partial.size] += weights[k] * partial
        linear = np.zeros_like(constant)
        linear[: monic.size] = monic
        return constant[None, :] - x[:, None] * linear[None, :]

    def _scan_grid(self):
        lo = self._locations[0] - SCAN_PADDING
        hi = self._locations[-1] + SCAN_PADDING
        return np.linspace(lo, hi, int(round((hi - lo) / SCAN_STEP)) + 1)

    def spiked(self, theta: float) -> StieltjesEvaluator:
        return StieltjesEvaluator(
            rule=lambda z: spiked_stieltjes_additive(theta, self, z),
            source=SOURCE_FIXED_POINT,
            guard=self.settings.guard,
            label=f"spiked additive theta={theta!r}",
        )


class FreeMultiplicativeSolution(_FreeSolution):
    """s = s_{mu_alpha [x] mu_Sigma}, solving s = int dmu_S(t) / (t(alpha-1-zs) - z).

    For alpha < 1 the companion transform s_ = s/alpha - (alpha-1)/(alpha z),
    solving s_ = -1 / (z - int t dmu_S(t) / (1 + alpha t s_)), is iterated
    instead: it stays bounded near z = 0 where s has the atom of mass 1 - alpha.
    """

    model = MODEL_MULTIPLICATIVE

    def __init__(
        self,
        base: AtomicMeasure,
        alpha: float,
        settings: Optional[SolverSettings] = None,
    ):
        if alpha <= 0:
            raise DomainError(f"alpha must be positive, got {alpha!r}")
        if np.any(base.locations < 0):
            raise DomainError("covariance spectra must be non-negative")
        super().__init__(base, settings)
        self.alpha = float(alpha)
        self.companion = self.alpha < 1

    def _update(self, s, z):
        t, w, alpha = self._locations, self._weights, self.alpha
        if self.companion:
            inner = (w[None, :] * t[None, :] / (1 + alpha * t[None, :] * s[:, None])).sum(
                axis=1
            )
            return -1.0 / (z - inner)
        return (
            w[None, :]
            / (t[None, :] * (alpha - 1 - z[:, None] * s[:, None]) - z[:, None])
        ).sum(axis=1)

    def _derivative(self, s, z):
        t, w, alpha = self._locations, self._weights, self.alpha
        if self.companion:
            factor = 1 + alpha * t[None, :] * s[:, None]
            inner = (w[None, :] * t[None, :] / factor).sum(axis=1)
            slope = (w[None, :] * alpha * t[None, :] ** 2 / factor**2).sum(axis=1)
            return slope / (z - inner) ** 2
        denominator = t[None, :] * (alpha - 1 - z[:, None] * s[:, None]) - z[:, None]
        return (w[None, :] * t[None, :] * z[:, None] / denominator**2).sum(axis=1)

    def _from_solved(self, solved, z):
        if self.companion:
            return self.alpha * solved + (self.alpha - 1) / z
        return solved

    def _to_iterated(self, s, z):
        if self.companion:
            return s / self.alpha - (self.alpha - 1) / (self.alpha * z)
        return s

    def _boundary_polynomials(self, x):
        # s prod_k D_k(s) - sum_k w_k prod_{j != k} D_j(s), D_k = -t_k x s + t_k(alpha-1) - x
        t, w, alpha = self._locations, self._weights, self.alpha
        slopes = -t[None, :] * x[:, None]
        offsets = t[None, :] * (alpha - 1) - x[:, None]
        size = t.size + 2
        full = np.zeros((x.size, size))
        full[:, 1] = 1.0
        partials = np.zeros((t.size, x.size, size))
        partials[:, :, 0] = 1.0
        for k in range(t.size):
            full = _times_linear(full, slopes[:, k], offsets[:, k])
            for j in range(t.size):
                if j != k:
                    partials[j] = _times_linear(partials[j], slopes[:, k], offsets[:, k])
        coefficients = full - np.einsum("k,kni->ni", w, partials)
        # atoms at t = 0 lower the degree uniformly
        degree = 1 + int(np.count_nonzero(t))
        return coefficients[:, : degree + 1]

    def _regular_points(self, x):
        return np.abs(x) >= 0.5 * SCAN_STEP

    def _scan_grid(self):
        hi = self._locations[-1] * (1 + np.sqrt(self.alpha)) ** 2 + 1.0
        lo = 0.0
        return np.linspace(lo, hi, int(round((hi - lo) / SCAN_STEP)) + 1)

    def _extra_support(self) -> List[Interval]:
        if self.alpha < 1 or np.any(self._locations == 0):
            return [(0.0, 0.0)]
        return []

    def spiked(self, theta: float) -> StieltjesEvaluator:
        return StieltjesEvaluator(
            rule=lambda z: spiked_stieltjes_multiplicative(theta, self, z),
            source=SOURCE_FIXED_POINT,
            guard=self.settings.guard,
            label=f"spiked multiplicative theta={theta!r}",
        )


def _times_linear(coefficients, slope, offset):
    """Multiply each row polynomial by (slope * s + offset)."""
    shifted = np.zeros_like(coefficients)
    shifted[:, 1:] = coefficients[:, :-1]
    return slope[:, None] * shifted + offset[:, None] * coefficients


def solve_free_additive(base: AtomicMeasure, z, settings: Optional[SolverSettings] = None):
    return FreeAdditiveSolution(base, settings).stieltjes(z)


def solve_free_multiplicative(
    base: AtomicMeasure, alpha: float, z, settings: Optional[SolverSettings] = None
):
    return FreeMultiplicativeSolution(base, alpha, settings).stieltjes(z)


def spiked_stieltjes_additive(theta: float, free_add: FreeAdditiveSolution, z):
    """1 / (theta - s(z) - z)."""
    points, scalar = _complex_input(z)
    s = np.atleast_1d(free_add.stieltjes(points))
    return _output(1.0 / (theta - s - points), scalar)


def spiked_stieltjes_multiplicative(theta: float, free_mult: FreeMultiplicativeSolution, z):
    """1 / (theta(alpha - 1) - z theta s(z) - z)."""
    if theta <= 0:
        raise DomainError(f"covariance spikes must be positive, got {theta!r}")
    points, scalar = _complex_input(z)
    s = np.atleast_1d(free_mult.stieltjes(points))
    alpha = free_mult.alpha
    return _output(1.0 / (theta * (alpha - 1) - points * theta * s - points), scalar)


def subordination_w(free_add: FreeAdditiveSolution, x: float) -> float:
    """w(x) = x + s(x) outside the bulk."""
    if free_add.in_support(x):
        raise SupportError(f"x={x!r} lies inside the bulk support {free_add.support()}")
    return float(x + free_add.real_value(x))


def outlier_F(free_mult: FreeMultiplicativeSolution, y: float) -> float:
    """F(y) = alpha y - y - s(1/y) for 1/y outside the bulk."""
    if y == 0:
        raise SupportError("F is undefined at y = 0")
    x = 1.0 / y
    if free_mult.in_support(x):
        raise SupportError(f"1/y={x!r} lies inside the bulk support {free_mult.support()}")
    return float(free_mult.alpha * y - y - free_mult.real_value(x))


def _bracketed_roots(function, components, floor=None) -> List[float]:
    """One root per complement component where the function changes sign.

    Infinite ends are replaced by walking outwards with doubling steps; an end
    sitting on floor is approached by halving towards it.
    """
    roots = []
    for left, right in components:
        lo, hi = left, right
        if np.isinf(hi):
            hi = _walk(function, lo, +1)
        if np.isinf(lo):
            lo = _walk(function, hi, -1)
        elif floor is not None and lo <= floor:
            lo = _halve(function, hi, floor)
        if lo is None or hi is None:
            continue
        f_lo, f_hi = function(lo), function(hi)
        if f_lo == 0:
            roots.append(lo)
        elif f_hi == 0:
            roots.append(hi)
        elif np.sign(f_lo) != np.sign(f_hi):
            roots.append(bisect(function, lo, hi, xtol=BISECTION_XTOL, maxiter=400))
    return roots


def _walk(function, anchor, direction):
    reference = np.sign(function(anchor))
    step = 1.0
    for _ in range(60):
        point = anchor + direction * step
        if np.sign(function(point)) != reference:
            return point
        step *= 2
    return None


def _halve(function, anchor, floor):
    reference = np.sign(function(anchor))
    gap = (anchor - floor) / 2
    while gap > 1e-12:
        if np.sign(function(floor + gap)) != reference:
            return floor + gap
        gap /= 2
    return None


def find_outlier_additive(theta: float, free_add: FreeAdditiveSolution) -> OutlierReport:
    """Solve w(x) = theta off the bulk; the mass is 1 / w'(x)."""

    def excess(x):
        return float(x + free_add.real_value(x)) - theta

    candidates = []
    for root in _bracketed_roots(excess, free_add.complement()):
        slope = (
            subordination_w(free_add, root + W_PRIME_STEP)
            - subordination_w(free_add, root - W_PRIME_STEP)
        ) / (2 * W_PRIME_STEP)
        if abs(slope) < TANGENCY_THRESHOLD:
            _LOGGER.warning("Tangent outlier equation at x=%s for theta=%s", root, theta)
            continue
        candidates.append((1.0 / slope, root))
    return _best_report(candidates, theta, MODEL_ADDITIVE)


def find_outlier_multiplicative(
    theta: float, free_mult: FreeMultiplicativeSolution
) -> OutlierReport:
    """Solve 1/F(1/x) = theta for x > 0 off the bulk; the mass is x F(1/x) / F'(1/x)."""
    if theta <= 0:
        raise DomainError(f"covariance spikes must be positive, got {theta!r}")
    target = 1.0 / theta

    def excess(x):
        return (free_mult.alpha - 1) / x - float(free_mult.real_value(x)) - target

    candidates = []
    for root in _bracketed_roots(excess, free_mult.complement(lower=0.0), floor=0.0):
        y = 1.0 / root
        slope = (
            outlier_F(free_mult, y + F_PRIME_STEP) - outlier_F(free_mult, y - F_PRIME_STEP)
        ) / (2 * F_PRIME_STEP)
        if abs(slope) < TANGENCY_THRESHOLD:
            _LOGGER.warning("Tangent outlier equation at x=%s for theta=%s", root, theta)
            continue
        candidates.append((root * outlier_F(free_mult, y) / slope, root))
    return _best_report(candidates, theta, MODEL_MULTIPLICATIVE)


def _best_report(candidates, theta, model) -> OutlierReport:
    valid = [(mass, x) for mass, x in candidates if 0 < mass <= 1 + 1e-9]
    if len(valid) < len(candidates):
        _LOGGER.warning("Discarded %s outlier root(s) with mass outside (0, 1]",
                        len(candidates) - len(valid))
    if not valid:
        return OutlierReport.absent(theta, model)
    if len(valid) > 1:
        _LOGGER.debug("Several outlier roots for theta=%s: %s", theta, valid)
    mass, location = max(valid)
    return OutlierReport(
        spike=theta, model=model, exists=True, location=float(location), mass=float(min(mass, 1.0))
    )


def outlier_mass_additive(theta: float, free_add: FreeAdditiveSolution) -> Optional[float]:
    return find_outlier_additive(theta, free_add).mass


def outlier_mass_multiplicative(
    theta: float, free_mult: FreeMultiplicativeSolution
) -> Optional[float]:
    return find_outlier_multiplicative(theta, free_mult).mass


def atom_mass_from_residue(evaluator: StieltjesEvaluator, x: float, eps: Optional[float] = None):
    """-lim (z - x) s(z) as z -> x from above, read off at z = x + i eps."""
    eps = evaluator.boundary_eta if eps is None else eps
    return float(eps * np.atleast_1d(evaluator(x + 1j * eps))[0].imag)
