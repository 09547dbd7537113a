"""Config Flow Version 0.1.0"""
# YAML scenario files validated with voluptuous, then turned into the
# typed SpikedModelConfig / SolverSettings / Scenario objects.

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import voluptuous as vol
import yaml

from spiked_spectra.const import (
    CONF_ALPHA,
    CONF_BASE_SPECTRUM,
    CONF_CURVES,
    CONF_DAMPING,
    CONF_ENERGIES,
    CONF_ENTRY_LAW,
    CONF_ETAS,
    CONF_GUARD,
    CONF_INTERIOR_TRIM,
    CONF_KIND,
    CONF_LOCATION,
    CONF_M,
    CONF_MARGIN,
    CONF_MAX_ITERATIONS,
    CONF_MAX_NOISE,
    CONF_N,
    CONF_NAME,
    CONF_OUTPUTS,
    CONF_SEED,
    CONF_SEEDS,
    CONF_START,
    CONF_STEP,
    CONF_STOP,
    CONF_TAU,
    CONF_THETA,
    CONF_TOLERANCE,
    CONF_WEIGHT,
    CONF_WINDOW_EXPONENT,
    CONF_WINDOW_SCALE,
    CONF_WORKERS,
    CURVES,
    DEFAULT_DAMPING,
    DEFAULT_ETAS,
    DEFAULT_GRID_STEP,
    DEFAULT_GUARD,
    DEFAULT_MARGIN,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_SCENARIO_NAME,
    DEFAULT_TAU,
    DEFAULT_TOLERANCE,
    DEFAULT_TOLERANCES,
    DEFAULT_WINDOW_EXPONENT,
    DEFAULT_WINDOW_SCALE,
    DEFAULT_WORKERS,
    ENTRY_LAWS,
    LAW_GAUSSIAN,
    MODELS,
    SECTION_DIAGNOSTIC,
    SECTION_MODEL,
    SECTION_OUTLIERS,
    SECTION_PROFILE,
    SECTION_SCENARIO,
    SECTION_SOLVER,
    SECTION_TOLERANCES,
    TOL_LOCAL_LAW_RATIO,
    TOL_LOCAL_LAW_SLOPE,
    TOL_OUTLIER_LOCATION,
    TOL_OUTLIER_MASS,
    TOL_PROFILE_SUP_ERROR,
)
from spiked_spectra.experiments import Scenario
from spiked_spectra.spectra.analytic import SolverSettings
from spiked_spectra.spectra.measures import AtomicMeasure
from spiked_spectra.spectra.sampler import SpikedModelConfig
from spiked_spectra.utils.errors import ConfigError, SpectraError

_LOGGER = logging.getLogger(__name__)

positive_float = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
non_negative_float = vol.All(vol.Coerce(float), vol.Range(min=0))
seed_value = vol.All(vol.Coerce(int), vol.Range(min=0, max=2**64 - 1))

ATOM_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_LOCATION): vol.Coerce(float),
        vol.Required(CONF_WEIGHT): non_negative_float,
    }
)

MODEL_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_KIND): vol.In(MODELS),
        vol.Required(CONF_N): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional(CONF_M): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_ALPHA): positive_float,
        vol.Required(CONF_THETA): vol.Coerce(float),
        vol.Optional(CONF_BASE_SPECTRUM): vol.All([ATOM_SCHEMA], vol.Length(min=1)),
        vol.Optional(CONF_ENTRY_LAW, default=LAW_GAUSSIAN): vol.In(ENTRY_LAWS),
        vol.Optional(CONF_SEED, default=0): seed_value,
    }
)

SOLVER_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_TOLERANCE, default=DEFAULT_TOLERANCE): positive_float,
        vol.Optional(CONF_MAX_ITERATIONS, default=DEFAULT_MAX_ITERATIONS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_DAMPING, default=DEFAULT_DAMPING): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False)
        ),
        vol.Optional(CONF_GUARD, default=DEFAULT_GUARD): positive_float,
    }
)

PROFILE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_START): vol.Coerce(float),
        vol.Optional(CONF_STOP): vol.Coerce(float),
        vol.Optional(CONF_STEP, default=DEFAULT_GRID_STEP): positive_float,
        vol.Optional(CONF_WINDOW_EXPONENT, default=DEFAULT_WINDOW_EXPONENT): vol.Coerce(float),
        vol.Optional(CONF_WINDOW_SCALE, default=DEFAULT_WINDOW_SCALE): vol.Coerce(float),
        vol.Optional(CONF_INTERIOR_TRIM): non_negative_float,
        vol.Optional(CONF_MAX_NOISE): positive_float,
    }
)

OUTLIERS_SCHEMA = vol.Schema(
    {vol.Optional(CONF_MARGIN, default=DEFAULT_MARGIN): positive_float}
)

DIAGNOSTIC_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_ENERGIES, default=[0.0]): [vol.Coerce(float)],
        vol.Optional(CONF_ETAS, default=DEFAULT_ETAS): [positive_float],
        vol.Optional(CONF_TAU, default=DEFAULT_TAU): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False)
        ),
    }
)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_NAME, default=DEFAULT_SCENARIO_NAME): vol.All(str, vol.Length(min=1)),
        vol.Optional(CONF_SEEDS): vol.All([seed_value], vol.Length(min=1)),
        vol.Optional(CONF_OUTPUTS): str,
        vol.Optional(CONF_CURVES, default=list(CURVES)): [vol.In(CURVES)],
        vol.Optional(CONF_WORKERS, default=DEFAULT_WORKERS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
    }
)

TOLERANCES_SCHEMA = vol.Schema(
    {
        vol.Optional(TOL_OUTLIER_LOCATION): non_negative_float,
        vol.Optional(TOL_OUTLIER_MASS): non_negative_float,
        vol.Optional(TOL_PROFILE_SUP_ERROR): non_negative_float,
        vol.Optional(TOL_LOCAL_LAW_RATIO): non_negative_float,
        vol.Optional(TOL_LOCAL_LAW_SLOPE): vol.All(
            [vol.Coerce(float)], vol.Length(min=2, max=2)
        ),
    }
)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(SECTION_MODEL): MODEL_SCHEMA,
        vol.Optional(SECTION_SOLVER, default={}): SOLVER_SCHEMA,
        vol.Optional(SECTION_PROFILE, default={}): PROFILE_SCHEMA,
        vol.Optional(SECTION_OUTLIERS, default={}): OUTLIERS_SCHEMA,
        vol.Optional(SECTION_DIAGNOSTIC, default={}): DIAGNOSTIC_SCHEMA,
        vol.Optional(SECTION_SCENARIO, default={}): SCENARIO_SCHEMA,
        vol.Optional(SECTION_TOLERANCES, default=dict(DEFAULT_TOLERANCES)): TOLERANCES_SCHEMA,
    }
)

OVERRIDE_KEYS = {
    CONF_SEED: CONF_SEED,
    CONF_N: CONF_N,
    CONF_THETA: CONF_THETA,
    CONF_ALPHA: CONF_ALPHA,
    "model": CONF_KIND,
}


def validate_config(data: Mapping[str, Any]) -> Dict[str, Any]:
    """Validate a raw mapping against CONFIG_SCHEMA, raising ConfigError."""
    try:
        return CONFIG_SCHEMA(dict(data or {}))
    except vol.Invalid as error:
        path = "/".join(str(part) for part in error.path) or None
        raise ConfigError(f"invalid configuration: {error.msg}", path=path) from error


def apply_overrides(data: Mapping[str, Any], overrides: Optional[Mapping[str, Any]]):
    """Merge --seed/--n/--theta/--alpha/--model into the model section."""
    merged = {key: value for key, value in dict(data or {}).items()}
    model = dict(merged.get(SECTION_MODEL) or {})
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name not in OVERRIDE_KEYS:
            raise ConfigError(f"unknown override {name!r}")
        model[OVERRIDE_KEYS[name]] = value
        if name == CONF_ALPHA:
            model.pop(CONF_M, None)
        if name == CONF_SEED:
            scenario = dict(merged.get(SECTION_SCENARIO) or {})
            scenario[CONF_SEEDS] = [value]
            merged[SECTION_SCENARIO] = scenario
        _LOGGER.debug("Override %s=%s", name, value)
    merged[SECTION_MODEL] = model
    return merged


def load_yaml(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            content = yaml.safe_load(handle)
    except OSError as error:
        raise ConfigError(f"cannot read {path}: {error.strerror}") from error
    except yaml.YAMLError as error:
        raise ConfigError(f"{path} is not valid YAML: {error}") from error
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"{path} must hold a mapping of sections")
    return content


def build_model_config(section: Mapping[str, Any]) -> SpikedModelConfig:
    atoms = section.get(CONF_BASE_SPECTRUM)
    base = None
    try:
        if atoms:
            base = AtomicMeasure.from_atoms(
                (atom[CONF_LOCATION], atom[CONF_WEIGHT]) for atom in atoms
            )
        return SpikedModelConfig(
            model=section[CONF_KIND],
            n=section[CONF_N],
            theta=section[CONF_THETA],
            m=section.get(CONF_M),
            alpha=section.get(CONF_ALPHA),
            base_spectrum=base,
            entry_law=section[CONF_ENTRY_LAW],
            seed=section[CONF_SEED],
        )
    except ConfigError:
        raise
    except SpectraError as error:
        raise ConfigError(str(error), path=SECTION_MODEL) from error


def build_solver_settings(section: Mapping[str, Any]) -> SolverSettings:
    return SolverSettings(
        tolerance=section[CONF_TOLERANCE],
        max_iterations=section[CONF_MAX_ITERATIONS],
        damping=section[CONF_DAMPING],
        guard=section[CONF_GUARD],
    )


def build_scenario(data: Mapping[str, Any]) -> Scenario:
    """Typed Scenario from a validated configuration."""
    config = build_model_config(data[SECTION_MODEL])
    profile = data[SECTION_PROFILE]
    scenario = data[SECTION_SCENARIO]
    diagnostic = data[SECTION_DIAGNOSTIC]
    tolerances = dict(data[SECTION_TOLERANCES])
    if TOL_LOCAL_LAW_SLOPE in tolerances:
        tolerances[TOL_LOCAL_LAW_SLOPE] = tuple(tolerances[TOL_LOCAL_LAW_SLOPE])
    return Scenario(
        name=scenario[CONF_NAME],
        config=config,
        seeds=tuple(scenario.get(CONF_SEEDS) or [config.seed]),
        grid_start=profile.get(CONF_START),
        grid_stop=profile.get(CONF_STOP),
        grid_step=profile[CONF_STEP],
        window_exponent=profile[CONF_WINDOW_EXPONENT],
        window_scale=profile[CONF_WINDOW_SCALE],
        interior_trim=profile.get(CONF_INTERIOR_TRIM),
        max_noise=profile.get(CONF_MAX_NOISE),
        margin=data[SECTION_OUTLIERS][CONF_MARGIN],
        energies=tuple(diagnostic[CONF_ENERGIES]),
        etas=tuple(diagnostic[CONF_ETAS]),
        tau=diagnostic[CONF_TAU],
        outputs=scenario.get(CONF_OUTPUTS),
        curves=tuple(scenario[CONF_CURVES]),
        workers=scenario[CONF_WORKERS],
        solver=build_solver_settings(data[SECTION_SOLVER]),
        tolerances=tolerances,
    )


def scenario_from_dict(data: Mapping[str, Any], overrides=None) -> Scenario:
    return build_scenario(validate_config(apply_overrides(data, overrides)))


def scenario_from_file(path, overrides=None) -> Scenario:
    _LOGGER.info("Loading scenario from %s", path)
    return scenario_from_dict(load_yaml(path), overrides)
