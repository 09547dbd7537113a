"""Version 0.1.0"""
# Experiments Module
# Scenario runner comparing sampled spiked matrices with their limits,
# the figure data sets and the acceptance suite.

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
import tempfile
import time
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from spiked_spectra.const import (
    CURVE_DENSITY,
    CURVE_OUTLIER,
    CURVE_PROFILE,
    CURVES,
    DEFAULT_ETAS,
    DEFAULT_GRID_STEP,
    DEFAULT_MARGIN,
    DEFAULT_TAU,
    DEFAULT_TOLERANCES,
    DEFAULT_WINDOW_EXPONENT,
    DEFAULT_WINDOW_SCALE,
    DEFAULT_WORKERS,
    DIVISION_THRESHOLD,
    LAW_GAUSSIAN,
    MIN_PROFILE_COVERAGE,
    MODEL_ADDITIVE,
    MODEL_MULTIPLICATIVE,
    PSD_TOLERANCE,
    TOL_LOCAL_LAW_RATIO,
    TOL_LOCAL_LAW_SLOPE,
    TOL_OUTLIER_LOCATION,
    TOL_OUTLIER_MASS,
    TOL_PROFILE_SUP_ERROR,
    TRIM_ADDITIVE,
    TRIM_MULTIPLICATIVE,
)
from spiked_spectra.spectra.analytic import (
    FreeAdditiveSolution,
    FreeMultiplicativeSolution,
    OutlierReport,
    SolverSettings,
    atom_mass_from_residue,
    find_outlier_additive,
    find_outlier_multiplicative,
)
from spiked_spectra.spectra.closed_forms import (
    RankOneLaw,
    additive_boundary_ratio,
    edge_profile_multiplicative,
    edge_profile_squared_gap,
    general_ratio_additive,
    general_ratio_multiplicative,
    marchenko_pastur_stieltjes,
    multiplicative_boundary_ratio,
    semicircle_cdf,
    semicircle_stieltjes,
    spiked_mp_law,
    spiked_semicircle_law,
)
from spiked_spectra.spectra.eig import sym_eig
from spiked_spectra.spectra.measures import (
    AtomicMeasure,
    WeightedSpectralMeasure,
    density_from_stieltjes,
    empirical_evaluator,
    kolmogorov_distance,
    moment,
)
from spiked_spectra.spectra.overlap import (
    LocalLawDiagnostic,
    OverlapProfile,
    extract_outliers,
    local_law_diagnostic,
    pool_profiles,
    scaling_exponent,
    spectral_measure_in_direction,
    window_half_width,
    windowed_profile,
)
from spiked_spectra.spectra.sampler import RealizedModel, SpikedModelConfig, sample
from spiked_spectra.utils.errors import ConfigError, ConvergenceError, SpectraError
from spiked_spectra.utils.tables import (
    FORMAT_CSV,
    Table,
    diagnostic_table,
    law_table,
    plain,
    profile_table,
    spectral_table,
    write_json,
)

_LOGGER = logging.getLogger(__name__)

Interval = Tuple[float, float]

TOLERANCE_KEYS = [
    TOL_OUTLIER_LOCATION,
    TOL_OUTLIER_MASS,
    TOL_PROFILE_SUP_ERROR,
    TOL_LOCAL_LAW_RATIO,
    TOL_LOCAL_LAW_SLOPE,
]


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SpikedModelConfig
    seeds: Tuple[int, ...]
    grid_start: Optional[float] = None
    grid_stop: Optional[float] = None
    grid_step: float = DEFAULT_GRID_STEP
    window_exponent: float = DEFAULT_WINDOW_EXPONENT
    window_scale: float = DEFAULT_WINDOW_SCALE
    interior_trim: Optional[float] = None
    max_noise: Optional[float] = None
    margin: float = DEFAULT_MARGIN
    energies: Tuple[float, ...] = (0.0,)
    etas: Tuple[float, ...] = tuple(DEFAULT_ETAS)
    tau: float = DEFAULT_TAU
    outputs: Optional[str] = None
    curves: Tuple[str, ...] = tuple(CURVES)
    workers: int = DEFAULT_WORKERS
    solver: SolverSettings = field(default_factory=SolverSettings)
    tolerances: Mapping[str, Any] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("a scenario needs at least one seed", path="scenario/seeds")
        if self.grid_step <= 0:
            raise ConfigError("grid step must be positive", path="profile/step")
        if self.max_noise is not None and self.max_noise <= 0:
            raise ConfigError("max_noise must be positive", path="profile/max_noise")
        if self.margin <= 0:
            raise ConfigError("outlier margin must be positive", path="outliers/margin")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1", path="scenario/workers")
        unknown = set(self.curves) - set(CURVES)
        if unknown:
            raise ConfigError(f"unknown curves {sorted(unknown)}", path="scenario/curves")
        unknown = set(self.tolerances) - set(TOLERANCE_KEYS)
        if unknown:
            raise ConfigError(f"unknown tolerances {sorted(unknown)}", path="tolerances")

    @property
    def trim(self) -> float:
        if self.interior_trim is not None:
            return self.interior_trim
        return TRIM_ADDITIVE if self.config.model == MODEL_ADDITIVE else TRIM_MULTIPLICATIVE

    @property
    def window(self) -> float:
        return window_half_width(self.config.n, self.window_exponent, self.window_scale)

    def diagnostic_points(self) -> np.ndarray:
        return np.array([energy + 1j * eta for eta in self.etas for energy in self.energies])


class Theory:
    """Limit objects for one model configuration.

    Rank-one perturbations of the semicircle / Marchenko-Pastur laws use the
    closed forms; any other base spectrum goes through the fixed-point solver.
    """

    def __init__(self, config: SpikedModelConfig, solver: Optional[SolverSettings] = None):
        self.config = config
        self.theta = config.theta
        base = config.base_spectrum
        self.law: Optional[RankOneLaw] = None
        if config.model == MODEL_ADDITIVE:
            self.bulk = FreeAdditiveSolution(base, solver)
            if base.is_dirac(0.0):
                self.law = spiked_semicircle_law(config.theta)
        else:
            self.alpha = config.aspect
            self.bulk = FreeMultiplicativeSolution(base, self.alpha, solver)
            if base.is_dirac(1.0):
                self.law = spiked_mp_law(self.alpha, config.theta)

    def support(self) -> List[Interval]:
        if self.law is None:
            return self.bulk.support()
        intervals = [tuple(self.law.support)]
        if self.config.model == MODEL_MULTIPLICATIVE and self.alpha < 1:
            intervals.insert(0, (0.0, 0.0))
        return intervals

    def bulk_intervals(self) -> List[Interval]:
        return [(lo, hi) for lo, hi in self.support() if hi > lo]

    def outlier(self) -> OutlierReport:
        model = self.config.model
        if self.law is not None:
            atoms = [(x, mass) for x, mass in self.law.atoms if model == MODEL_ADDITIVE or x != 0]
            if not atoms:
                return OutlierReport.absent(self.theta, model)
            location, mass = atoms[0]
            return OutlierReport(self.theta, model, True, location, mass)
        if model == MODEL_ADDITIVE:
            return find_outlier_additive(self.theta, self.bulk)
        return find_outlier_multiplicative(self.theta, self.bulk)

    def spiked_evaluator(self):
        if self.law is not None:
            return self.law.evaluator()
        return self.bulk.spiked(self.theta)

    def bulk_evaluator(self):
        if self.law is not None:
            return self.law.base_evaluator()
        return self.bulk.evaluator()

    def profile_curve(self, grid) -> np.ndarray:
        """Theoretical ratio on the grid, NaN off the bulk."""
        grid = np.asarray(grid, dtype=float)
        values = np.full(grid.shape, np.nan)
        if self.law is not None:
            lo, hi = self.law.support
            inside = (grid >= lo) & (grid <= hi)
            if np.any(inside):
                values[inside] = self.law.profile(grid[inside])
            return values
        eta = self.bulk.boundary_eta
        bulk = np.atleast_1d(density_from_stieltjes(self.bulk.evaluator(), grid, eta))
        inside = bulk > DIVISION_THRESHOLD
        inside &= np.any(
            [(grid >= lo) & (grid <= hi) for lo, hi in self.bulk_intervals()], axis=0
        )
        if np.any(inside):
            values[inside] = self.general_ratio()(grid[inside])
        return values

    def general_ratio(self):
        if self.config.model == MODEL_ADDITIVE:
            return general_ratio_additive(self.theta, self.bulk)
        return general_ratio_multiplicative(self.theta, self.bulk)

    def density_curve(self, grid) -> Tuple[np.ndarray, List[Tuple[float, float]]]:
        """Spiked limit density on the grid and its atoms."""
        if self.law is not None:
            return np.atleast_1d(self.law.density(grid)), list(self.law.atoms)
        spiked = self.spiked_evaluator()
        density = np.atleast_1d(density_from_stieltjes(spiked, grid, self.bulk.boundary_eta))
        report = self.outlier()
        atoms = [(report.location, report.mass)] if report.exists else []
        return density, atoms

    def edge_profiles(self) -> Optional[Dict[str, float]]:
        if self.law is None or self.config.model != MODEL_MULTIPLICATIVE:
            return None
        return {
            "edge": edge_profile_multiplicative(self.alpha, self.theta),
            "squared_gap": edge_profile_squared_gap(self.alpha, self.theta),
        }


@dataclass
class SeedResult:
    seed: int
    error: Optional[str] = None
    measure: Optional[WeightedSpectralMeasure] = field(default=None, repr=False)
    clusters: List[Tuple[float, float]] = field(default_factory=list)
    outlier: Optional[Tuple[float, float]] = None
    max_weight: Optional[float] = None
    weight_sum_error: Optional[float] = None
    moment_error: Optional[float] = None
    profile: Optional[OverlapProfile] = field(default=None, repr=False)
    diagnostic: Optional[LocalLawDiagnostic] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "error": self.error,
            "clusters": [list(cluster) for cluster in self.clusters],
            "outlier": None if self.outlier is None else list(self.outlier),
            "max_weight": self.max_weight,
            "weight_sum_error": self.weight_sum_error,
            "moment_error": self.moment_error,
            "local_law_summary": None if self.diagnostic is None else self.diagnostic.summary,
        }


@dataclass
class ComparisonReport:
    scenario: str
    model: str
    n: int
    theta: float
    alpha: Optional[float]
    seeds: Tuple[int, ...]
    theory_outlier: OutlierReport
    results: List[SeedResult]
    interior: List[Interval]
    profile: Optional[OverlapProfile] = None
    profile_sup_error: Optional[float] = None
    profile_coverage: Optional[float] = None
    outlier_location: Optional[float] = None
    outlier_weight: Optional[float] = None
    max_weight: Optional[float] = None
    local_law_summary: Optional[float] = None
    local_law_slope: Optional[float] = None
    edge_profiles: Optional[Dict[str, float]] = None
    flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    @property
    def failed_seeds(self) -> List[int]:
        return [result.seed for result in self.results if not result.ok]

    def to_dict(self) -> Dict[str, Any]:
        outlier = self.theory_outlier
        return plain(
            {
                "scenario": self.scenario,
                "model": self.model,
                "n": self.n,
                "theta": self.theta,
                "alpha": self.alpha,
                "seeds": list(self.seeds),
                "theory_outlier": {
                    "exists": outlier.exists,
                    "location": outlier.location,
                    "mass": outlier.mass,
                },
                "empirical_outlier": {
                    "location": self.outlier_location,
                    "weight": self.outlier_weight,
                },
                "max_weight": self.max_weight,
                "interior": [list(interval) for interval in self.interior],
                "profile_sup_error": self.profile_sup_error,
                "profile_coverage": self.profile_coverage,
                "local_law_summary": self.local_law_summary,
                "local_law_slope": self.local_law_slope,
                "edge_profiles": self.edge_profiles,
                "results": [result.to_dict() for result in self.results],
                "flags": self.flags,
                "passed": self.passed,
            }
        )


def profile_grid(scenario: Scenario, theory: Theory) -> np.ndarray:
    bulk = theory.bulk_intervals()
    start = scenario.grid_start if scenario.grid_start is not None else min(lo for lo, _ in bulk)
    stop = scenario.grid_stop if scenario.grid_stop is not None else max(hi for _, hi in bulk)
    if stop < start:
        raise ConfigError("profile grid stop lies below its start", path="profile")
    count = int(np.floor((stop - start) / scenario.grid_step + 1e-9)) + 1
    return start + scenario.grid_step * np.arange(count)


def interior_intervals(intervals: Sequence[Interval], trim: float) -> List[Interval]:
    return [(lo + trim, hi - trim) for lo, hi in intervals if hi - lo > 2 * trim]


def _moment_error(realized: RealizedModel, measure: WeightedSpectralMeasure, order: int = 3):
    vector = realized.spike_direction
    power = vector.copy()
    worst = 0.0
    for k in range(1, order + 1):
        power = realized.matrix @ power
        exact = float(vector @ power)
        worst = max(worst, abs(moment(measure, k) - exact) / max(1.0, abs(exact)))
    return worst


def _nearest(clusters, location):
    if not clusters:
        return None
    return min(clusters, key=lambda cluster: abs(cluster[0] - location))


def _run_seed(
    scenario: Scenario, theory: Theory, expected: OutlierReport, support, grid, seed: int
) -> SeedResult:
    started = time.monotonic()
    try:
        realized = sample(scenario.config.with_seed(seed))
        decomposition = sym_eig(realized.matrix)
        top = decomposition.eigenvalues[0]
        if (
            scenario.config.model == MODEL_MULTIPLICATIVE
            and decomposition.smallest() < -PSD_TOLERANCE * (1 + abs(top))
        ):
            raise ConvergenceError("sample covariance matrix is not positive semidefinite")
        measure = spectral_measure_in_direction(decomposition, realized.spike_direction)
        result = SeedResult(seed=seed, measure=measure)
        result.weight_sum_error = abs(float(measure.weights.sum()) - 1.0)
        result.moment_error = _moment_error(realized, measure)
        result.max_weight = float(measure.weights.max())
        if CURVE_OUTLIER in scenario.curves:
            result.clusters = extract_outliers(measure, support, scenario.margin)
            if expected.exists:
                result.outlier = _nearest(result.clusters, expected.location)
            elif result.clusters:
                result.outlier = result.clusters[0]
        if CURVE_PROFILE in scenario.curves:
            result.profile = windowed_profile(measure, grid, scenario.window)
        if scenario.energies and scenario.etas:
            result.diagnostic = local_law_diagnostic(
                empirical_evaluator(measure),
                theory.spiked_evaluator(),
                scenario.diagnostic_points(),
                scenario.config.n,
                scenario.tau,
                envelope=theory.bulk_evaluator(),
            )
    except SpectraError as error:
        _LOGGER.warning("Scenario %s seed %s failed: %s", scenario.name, seed, error)
        return SeedResult(seed=seed, error=str(error))
    _LOGGER.debug(
        "Scenario %s seed %s done in %.2fs", scenario.name, seed, time.monotonic() - started
    )
    return result


def _flags(scenario: Scenario, report: ComparisonReport) -> Dict[str, bool]:
    tolerances = scenario.tolerances
    good = [result for result in report.results if result.ok]
    flags: Dict[str, bool] = {}
    expected = report.theory_outlier
    if CURVE_OUTLIER in scenario.curves:
        matched = [result.outlier for result in good if result.outlier is not None]
        if TOL_OUTLIER_LOCATION in tolerances:
            if expected.exists:
                flags[TOL_OUTLIER_LOCATION] = bool(
                    good
                    and len(matched) == len(good)
                    and abs(report.outlier_location - expected.location)
                    <= tolerances[TOL_OUTLIER_LOCATION]
                )
            else:
                flags[TOL_OUTLIER_LOCATION] = bool(good) and not any(
                    result.clusters for result in good
                )
        if TOL_OUTLIER_MASS in tolerances:
            if expected.exists:
                flags[TOL_OUTLIER_MASS] = bool(
                    good
                    and len(matched) == len(good)
                    and abs(report.outlier_weight - expected.mass) <= tolerances[TOL_OUTLIER_MASS]
                )
            else:
                flags[TOL_OUTLIER_MASS] = (
                    report.max_weight is not None
                    and report.max_weight <= tolerances[TOL_OUTLIER_MASS]
                )
    if CURVE_PROFILE in scenario.curves and TOL_PROFILE_SUP_ERROR in tolerances:
        flags[TOL_PROFILE_SUP_ERROR] = (
            report.profile_sup_error is not None
            and report.profile_sup_error <= tolerances[TOL_PROFILE_SUP_ERROR]
            and (scenario.max_noise is None or report.profile_coverage >= MIN_PROFILE_COVERAGE)
        )
    if scenario.energies and scenario.etas:
        if TOL_LOCAL_LAW_RATIO in tolerances:
            flags[TOL_LOCAL_LAW_RATIO] = (
                report.local_law_summary is not None
                and report.local_law_summary <= tolerances[TOL_LOCAL_LAW_RATIO]
            )
        if TOL_LOCAL_LAW_SLOPE in tolerances:
            lo, hi = tolerances[TOL_LOCAL_LAW_SLOPE]
            flags[TOL_LOCAL_LAW_SLOPE] = (
                report.local_law_slope is not None and lo <= report.local_law_slope <= hi
            )
    return flags


def _route_error(solution, fixed_ratio, boundary_ratio, points: int = 200) -> float:
    """Relative gap between the density-ratio and boundary-value profiles."""
    grid = np.concatenate(
        [np.linspace(lo, hi, points) for lo, hi in solution.support() if hi > lo]
    )
    grid = grid[np.atleast_1d(solution.boundary_density(grid)) > 0.05]
    if grid.size == 0:
        return float("inf")
    fixed = np.atleast_1d(fixed_ratio(grid))
    boundary = np.atleast_1d(boundary_ratio(solution.boundary_value(grid), grid))
    return float(np.max(np.abs(fixed - boundary) / np.abs(boundary)))


def _pooled_slope(diagnostics: Sequence[LocalLawDiagnostic]) -> Optional[float]:
    etas = np.concatenate([diagnostic.etas for diagnostic in diagnostics])
    values = np.concatenate([diagnostic.abs_shat for diagnostic in diagnostics])
    levels = np.unique(etas)
    if levels.size < 2:
        return None
    medians = np.array([np.median(values[etas == eta]) for eta in levels])
    if np.any(medians <= 0):
        return None
    return scaling_exponent(levels, medians)


def run_scenario(scenario: Scenario, fmt: str = FORMAT_CSV) -> ComparisonReport:
    """Sample every seed, compare with the limits and write the artifacts."""
    _LOGGER.info("Running scenario %s over %s seed(s)", scenario.name, len(scenario.seeds))
    config = scenario.config
    theory = Theory(config, scenario.solver)
    support = theory.support()
    grid = profile_grid(scenario, theory)
    interior = interior_intervals(theory.bulk_intervals(), scenario.trim)
    expected = theory.outlier() if CURVE_OUTLIER in scenario.curves else OutlierReport.absent(
        config.theta, config.model
    )

    with ThreadPoolExecutor(max_workers=scenario.workers) as pool:
        results = list(
            pool.map(
                lambda seed: _run_seed(scenario, theory, expected, support, grid, seed),
                scenario.seeds,
            )
        )
    good = [result for result in results if result.ok]

    report = ComparisonReport(
        scenario=scenario.name,
        model=config.model,
        n=config.n,
        theta=config.theta,
        alpha=config.aspect,
        seeds=tuple(scenario.seeds),
        theory_outlier=expected,
        results=results,
        interior=interior,
        edge_profiles=theory.edge_profiles(),
    )
    matched = [result.outlier for result in good if result.outlier is not None]
    if matched:
        report.outlier_location = float(np.mean([location for location, _ in matched]))
        report.outlier_weight = float(np.mean([weight for _, weight in matched]))
    if good:
        # seed mean of the largest weight
        report.max_weight = float(np.mean([result.max_weight for result in good]))
    profiles = [result.profile for result in good if result.profile is not None]
    if profiles:
        pooled = pool_profiles(profiles).with_theory(theory.profile_curve(grid))
        report.profile = pooled
        max_noise = np.inf if scenario.max_noise is None else scenario.max_noise
        errors = [pooled.sup_error(lo, hi, max_noise) for lo, hi in interior]
        report.profile_sup_error = max(errors) if errors else None
        if interior:
            report.profile_coverage = min(
                pooled.coverage(lo, hi, max_noise) for lo, hi in interior
            )
    diagnostics = [result.diagnostic for result in good if result.diagnostic is not None]
    if diagnostics:
        report.local_law_summary = max(diagnostic.summary for diagnostic in diagnostics)
        report.local_law_slope = _pooled_slope(diagnostics)
    report.flags = _flags(scenario, report)
    if not good:
        report.flags = {name: False for name in report.flags} or {"seeds": False}

    if scenario.outputs:
        write_artifacts(scenario, theory, report, grid, fmt)
    _LOGGER.info(
        "Scenario %s finished: %s", scenario.name, "passed" if report.passed else "failed"
    )
    return report


def outlier_table(report: ComparisonReport) -> Table:
    expected = report.theory_outlier
    rows = [
        (
            result.seed,
            expected.location,
            expected.mass,
            None if result.outlier is None else result.outlier[0],
            None if result.outlier is None else result.outlier[1],
            len(result.clusters),
        )
        for result in report.results
        if result.ok
    ]
    header = (
        "seed",
        "theory_location",
        "theory_mass",
        "empirical_location",
        "empirical_weight",
        "clusters",
    )
    return Table("outliers", header, rows)


def write_artifacts(scenario, theory, report, grid, fmt=FORMAT_CSV) -> List[Path]:
    directory = Path(scenario.outputs)
    stem = scenario.name
    written = []
    for result in report.results:
        if result.measure is not None:
            written.append(
                spectral_table(result.measure).write(
                    directory, f"{stem}_seed{result.seed}_spectrum", fmt
                )
            )
        if result.diagnostic is not None:
            written.append(
                diagnostic_table(result.diagnostic).write(
                    directory, f"{stem}_seed{result.seed}_diagnostic", fmt
                )
            )
    if CURVE_DENSITY in scenario.curves:
        density, atoms = theory.density_curve(grid)
        written.append(law_table(grid, density, atoms).write(directory, f"{stem}_law", fmt))
    if report.profile is not None:
        written.append(profile_table(report.profile).write(directory, f"{stem}_profile", fmt))
    if CURVE_OUTLIER in scenario.curves:
        written.append(outlier_table(report).write(directory, f"{stem}_outliers", fmt))
    written.append(write_json(directory / f"{stem}_report.json", report.to_dict()))
    return written


def theory_tables(scenario: Scenario) -> Dict[str, Table]:
    """Limit density, profile and outlier of a scenario without sampling."""
    theory = Theory(scenario.config, scenario.solver)
    grid = profile_grid(scenario, theory)
    density, atoms = theory.density_curve(grid)
    outlier = theory.outlier()
    profile = theory.profile_curve(grid)
    return {
        "law": law_table(grid, density, atoms),
        "theory_profile": Table("profile", ("x", "theory"), zip(grid, profile)),
        "outlier": Table(
            "outlier",
            ("theta", "exists", "location", "mass"),
            [(outlier.spike, outlier.exists, outlier.location, outlier.mass)],
        ),
    }


def simulate(config: SpikedModelConfig) -> Tuple[RealizedModel, WeightedSpectralMeasure]:
    """One realization and its spectral measure in the spike direction."""
    realized = sample(config)
    decomposition = sym_eig(realized.matrix)
    return realized, spectral_measure_in_direction(decomposition, realized.spike_direction)


def _additive(n, theta, seed=0, base=None, law=LAW_GAUSSIAN) -> SpikedModelConfig:
    return SpikedModelConfig(
        model=MODEL_ADDITIVE, n=n, theta=theta, base_spectrum=base, entry_law=law, seed=seed
    )


def _multiplicative(n, m, theta, seed=0) -> SpikedModelConfig:
    return SpikedModelConfig(model=MODEL_MULTIPLICATIVE, n=n, m=m, theta=theta, seed=seed)


def figure_scenarios(outputs=None, workers=DEFAULT_WORKERS) -> List[Scenario]:
    """Profiles of one matrix (windows n^0.1/sqrt(n)) and pooled small-window profiles."""
    single = dict(
        seeds=(0,),
        energies=(),
        outputs=outputs,
        workers=workers,
        tolerances={},
    )
    pooled = dict(single, seeds=tuple(range(10)), window_scale=1.0)
    return [
        Scenario("profile_additive_theta2", _additive(3000, 2.0), grid_start=-2.0, grid_stop=2.0, **single),
        Scenario("profile_additive_theta-4", _additive(3000, -4.0), grid_start=-2.0, grid_stop=2.0, **single),
        Scenario("profile_covariance_alpha4", _multiplicative(2000, 8000, 2.0), **single),
        Scenario("profile_covariance_alpha2", _multiplicative(2000, 4000, 2.0), **single),
        Scenario("pooled_covariance_n2000", _multiplicative(2000, 8000, 2.0), window_exponent=0.3, **pooled),
        Scenario("pooled_covariance_n3000", _multiplicative(3000, 12000, 2.0), window_exponent=0.2, **pooled),
    ]


def run_figures(outputs, fmt=FORMAT_CSV, workers=DEFAULT_WORKERS) -> List[ComparisonReport]:
    return [run_scenario(scenario, fmt) for scenario in figure_scenarios(outputs, workers)]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return plain({"name": self.name, "passed": self.passed, "details": self.details})


@dataclass
class AcceptanceReport:
    criteria: List[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(criterion.passed for criterion in self.criteria)

    def to_dict(self):
        return {
            "passed": self.passed,
            "criteria": [criterion.to_dict() for criterion in self.criteria],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class AcceptanceSuite:
    """The acceptance criteria, each a method returning a CriterionResult."""

    ORACLE_TOLERANCE = 1e-8
    MASS_TOLERANCE = 1e-6
    WEIGHT_SUM_TOLERANCE = 1e-8
    MOMENT_TOLERANCE = 1e-6
    ROUTE_TOLERANCE = 1e-2
    RESIDUE_TOLERANCE = 1e-3
    KOLMOGOROV_TOLERANCE = 0.02
    SEEDS = (0, 1, 2, 3, 4)
    PROFILE_SEEDS = tuple(range(16))

    def __init__(self, workers=DEFAULT_WORKERS, tolerance_override=None, outputs=None, fmt=FORMAT_CSV):
        self.workers = workers
        self.override = tolerance_override
        self.outputs = outputs
        self.fmt = fmt

    def criteria(self):
        return [
            ("oracle", self.oracle),
            ("outliers_additive", self.outliers_additive),
            ("outliers_multiplicative", self.outliers_multiplicative),
            ("profiles", self.profiles),
            ("general_base", self.general_base),
            ("normalization", self.normalization),
            ("sampler_convergence", self.sampler_convergence),
            ("local_law_scaling", self.local_law_scaling),
            ("determinism", self.determinism),
        ]

    def _tolerance(self, value):
        if self.override is None:
            return value
        if isinstance(value, tuple):
            return (self.override, self.override)
        return self.override

    def _tolerances(self, **values):
        return {key: self._tolerance(value) for key, value in values.items()}

    def _scenario(self, name, config, **options) -> Scenario:
        options.setdefault("workers", self.workers)
        options.setdefault("energies", ())
        if self.outputs is not None:
            options.setdefault("outputs", str(Path(self.outputs) / "acceptance"))
        return Scenario(name, config, **options)

    def _run(self, scenarios) -> Tuple[bool, Dict[str, Any]]:
        details = {}
        passed = True
        for scenario in scenarios:
            report = run_scenario(scenario, self.fmt)
            details[scenario.name] = {
                "flags": report.flags,
                "theory_location": report.theory_outlier.location,
                "theory_mass": report.theory_outlier.mass,
                "outlier_location": report.outlier_location,
                "outlier_weight": report.outlier_weight,
                "max_weight": report.max_weight,
                "profile_sup_error": report.profile_sup_error,
                "profile_coverage": report.profile_coverage,
                "local_law_slope": report.local_law_slope,
                "failed_seeds": report.failed_seeds,
            }
            passed = passed and report.passed
        return passed, details

    def oracle(self) -> CriterionResult:
        """Fixed points for delta_0 / delta_1 bases against the closed forms."""
        tolerance = self._tolerance(self.ORACLE_TOLERANCE)
        z = np.linspace(-6.0, 6.0, 200) + 0.01j
        errors = {
            "semicircle": float(
                np.max(
                    np.abs(
                        FreeAdditiveSolution(AtomicMeasure.dirac(0.0)).stieltjes(z)
                        - semicircle_stieltjes(z)
                    )
                )
            )
        }
        positive = np.linspace(-2.0, 12.0, 200) + 0.01j
        for alpha in (0.5, 4.0):
            solved = FreeMultiplicativeSolution(AtomicMeasure.dirac(1.0), alpha).stieltjes(positive)
            errors[f"marchenko_pastur_{alpha:g}"] = float(
                np.max(np.abs(solved - marchenko_pastur_stieltjes(alpha, positive)))
            )
        return CriterionResult(
            "oracle", all(error <= tolerance for error in errors.values()), errors
        )

    def outliers_additive(self) -> CriterionResult:
        located = self._tolerances(
            **{TOL_OUTLIER_LOCATION: 0.05, TOL_OUTLIER_MASS: 0.05}
        )
        scenarios = [
            self._scenario(
                f"outliers_additive_theta{theta:g}",
                _additive(2000, theta),
                seeds=self.SEEDS,
                curves=(CURVE_OUTLIER,),
                tolerances=located,
                margin=0.2 if abs(theta) <= 1 else DEFAULT_MARGIN,
            )
            for theta in (2.0, -4.0, 0.9)
        ]
        passed, details = self._run(scenarios)
        return CriterionResult("outliers_additive", passed, details)

    def outliers_multiplicative(self) -> CriterionResult:
        scenarios = [
            self._scenario(
                "outliers_multiplicative_theta2",
                _multiplicative(1000, 4000, 2.0),
                seeds=self.SEEDS,
                curves=(CURVE_OUTLIER,),
                tolerances=self._tolerances(
                    **{TOL_OUTLIER_LOCATION: 0.1, TOL_OUTLIER_MASS: 0.05}
                ),
            ),
            self._scenario(
                "outliers_multiplicative_theta1.4",
                _multiplicative(1000, 4000, 1.4),
                seeds=self.SEEDS,
                curves=(CURVE_OUTLIER,),
                margin=0.2,
                tolerances=self._tolerances(**{TOL_OUTLIER_LOCATION: 0.1}),
            ),
        ]
        passed, details = self._run(scenarios)
        return CriterionResult("outliers_multiplicative", passed, details)

    def profiles(self) -> CriterionResult:
        """Pooled windowed profiles against the closed-form curves.

        The sup-error runs over interior windows whose standard error is at
        most a quarter of the tolerance, and those windows must cover at
        least MIN_PROFILE_COVERAGE of every interior interval.
        """
        tolerance = self._tolerance(0.15)
        tolerances = {TOL_PROFILE_SUP_ERROR: tolerance}
        scenarios = [
            self._scenario(
                "profile_additive",
                _additive(3000, 2.0),
                seeds=self.PROFILE_SEEDS,
                curves=(CURVE_PROFILE,),
                max_noise=tolerance / 4,
                tolerances=tolerances,
            ),
            self._scenario(
                "profile_multiplicative",
                _multiplicative(2000, 8000, 2.0),
                seeds=self.PROFILE_SEEDS,
                curves=(CURVE_PROFILE,),
                max_noise=tolerance / 4,
                tolerances=tolerances,
            ),
        ]
        passed, details = self._run(scenarios)
        return CriterionResult("profiles", passed, details)

    def general_base(self) -> CriterionResult:
        """Sampled profile and outlier for a two-atom base, plus the analytic cross-checks.

        The fixed-point ratio is compared with the boundary-value formula on
        both models, and the outlier mass 1/w' with the residue of the spiked
        transform.
        """
        base = AtomicMeasure.from_atoms([(-1.0, 0.5), (1.0, 0.5)])
        scenario = self._scenario(
            "general_base",
            _additive(2000, 3.0, base=base),
            seeds=self.SEEDS,
            curves=(CURVE_PROFILE, CURVE_OUTLIER),
            tolerances=self._tolerances(
                **{TOL_PROFILE_SUP_ERROR: 0.2, TOL_OUTLIER_LOCATION: 0.1}
            ),
        )
        passed, details = self._run([scenario])
        additive = FreeAdditiveSolution(base)
        covariance = FreeMultiplicativeSolution(
            AtomicMeasure.from_atoms([(1.0, 0.5), (3.0, 0.5)]), 4.0
        )
        routes = {
            MODEL_ADDITIVE: _route_error(
                additive,
                general_ratio_additive(3.0, additive),
                lambda boundary, x: additive_boundary_ratio(3.0, boundary, x),
            ),
            MODEL_MULTIPLICATIVE: _route_error(
                covariance,
                general_ratio_multiplicative(6.0, covariance),
                lambda boundary, x: multiplicative_boundary_ratio(4.0, 6.0, boundary, x),
            ),
        }
        report = find_outlier_additive(3.0, additive)
        residue = atom_mass_from_residue(
            additive.spiked(3.0), report.location, eps=additive.boundary_eta
        )
        residue_error = abs(residue - report.mass)
        details["ratio_route_error"] = routes
        details["residue_mass_error"] = residue_error
        passed = (
            passed
            and max(routes.values()) <= self._tolerance(self.ROUTE_TOLERANCE)
            and residue_error <= self._tolerance(self.RESIDUE_TOLERANCE)
        )
        return CriterionResult("general_base", passed, details)

    def normalization(self) -> CriterionResult:
        laws = {f"semicircle_theta{theta:g}": spiked_semicircle_law(theta) for theta in (0, 0.5, 1, 2, -4)}
        for alpha, theta in ((4, 2), (4, 1), (4, 0.25), (4, 1.4), (0.5, 2), (0.5, 4), (1, 2)):
            laws[f"mp_alpha{alpha:g}_theta{theta:g}"] = spiked_mp_law(alpha, theta)
        mass_errors = {name: abs(law.total_mass() - 1) for name, law in laws.items()}
        sums, moments = {}, {}
        for config in (_additive(200, 2.0, seed=7), _multiplicative(200, 800, 2.0, seed=7)):
            realized, measure = simulate(config)
            sums[config.model] = abs(float(measure.weights.sum()) - 1)
            moments[config.model] = _moment_error(realized, measure)
        passed = (
            max(mass_errors.values()) <= self._tolerance(self.MASS_TOLERANCE)
            and max(sums.values()) <= self._tolerance(self.WEIGHT_SUM_TOLERANCE)
            and max(moments.values()) <= self._tolerance(self.MOMENT_TOLERANCE)
        )
        details = {"total_mass_error": mass_errors, "weight_sum_error": sums, "moment_error": moments}
        return CriterionResult("normalization", passed, details)

    def sampler_convergence(self) -> CriterionResult:
        """Kolmogorov distance of the eigenvalue distribution to its limit law."""
        distances = {}
        for config, cdf in (
            (_additive(2000, 0.0), semicircle_cdf),
            (_multiplicative(2000, 8000, 1.0), spiked_mp_law(4.0, 1.0).cdf),
        ):
            uniform = WeightedSpectralMeasure.uniform(sym_eig(sample(config).matrix).eigenvalues)
            distances[config.model] = kolmogorov_distance(uniform, cdf)
        passed = max(distances.values()) <= self._tolerance(self.KOLMOGOROV_TOLERANCE)
        return CriterionResult("sampler_convergence", passed, {"kolmogorov_distance": distances})

    def local_law_scaling(self) -> CriterionResult:
        scenario = self._scenario(
            "local_law_scaling",
            _additive(2000, 0.0),
            seeds=self.SEEDS,
            curves=(),
            energies=(0.0,),
            etas=(0.2, 0.1, 0.05, 0.025),
            tolerances=self._tolerances(**{TOL_LOCAL_LAW_SLOPE: (-0.8, -0.2)}),
        )
        passed, details = self._run([scenario])
        return CriterionResult("local_law_scaling", passed, details)

    def determinism(self) -> CriterionResult:
        """Run a small scenario twice and compare every written byte."""
        contents = []
        for attempt in range(2):
            with tempfile.TemporaryDirectory() as directory:
                scenario = Scenario(
                    "determinism",
                    _additive(200, 2.0),
                    seeds=(0, 1),
                    outputs=directory,
                    workers=self.workers,
                )
                run_scenario(scenario, self.fmt)
                contents.append(
                    {path.name: path.read_bytes() for path in sorted(Path(directory).iterdir())}
                )
        identical = contents[0] == contents[1]
        return CriterionResult("determinism", identical, {"files": sorted(contents[0])})

    def run(self, only: Optional[Sequence[str]] = None) -> AcceptanceReport:
        results = []
        for name, check in self.criteria():
            if only and name not in only:
                continue
            _LOGGER.info("Acceptance criterion %s", name)
            try:
                results.append(check())
            except SpectraError as error:
                _LOGGER.warning("Criterion %s raised %s", name, error)
                results.append(CriterionResult(name, False, {"error": str(error)}))
        return AcceptanceReport(results)


def run_acceptance(
    workers=DEFAULT_WORKERS,
    tolerance_override=None,
    only=None,
    outputs=None,
    fmt=FORMAT_CSV,
) -> AcceptanceReport:
    return AcceptanceSuite(workers, tolerance_override, outputs, fmt).run(only)
