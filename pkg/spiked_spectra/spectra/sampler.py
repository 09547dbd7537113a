"""Version 0.1.0"""
# Sampler Module
# Spiked Wigner W = X / sqrt(n) + A and spiked Wishart S = D^1/2 X X^T D^1/2 / n
# with A, D diagonal and the spike in the first slot.
# Draws come from a Philox counter-based generator so a (config, seed)
# pair gives the same matrix on every platform.

from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
from typing import Optional

import numpy as np

from spiked_spectra.const import (
    ENTRY_LAWS,
    LAW_GAUSSIAN,
    LAW_RADEMACHER,
    LAW_UNIFORM,
    MODEL_ADDITIVE,
    MODEL_MULTIPLICATIVE,
    MODELS,
)
from spiked_spectra.spectra.measures import AtomicMeasure
from spiked_spectra.utils.errors import ConfigError

_LOGGER = logging.getLogger(__name__)

SEED_LIMIT = 2**64


@dataclass(frozen=True)
class SpikedModelConfig:
    model: str
    n: int
    theta: float
    m: Optional[int] = None
    alpha: Optional[float] = None
    base_spectrum: Optional[AtomicMeasure] = None
    entry_law: str = LAW_GAUSSIAN
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if self.entry_law not in ENTRY_LAWS:
            raise ConfigError(f"unknown entry law {self.entry_law!r}, expected one of {ENTRY_LAWS}")
        if int(self.seed) != self.seed or not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.base_spectrum is None:
            default = 0.0 if self.model == MODEL_ADDITIVE else 1.0
            object.__setattr__(self, "base_spectrum", AtomicMeasure.dirac(default))
        elif not isinstance(self.base_spectrum, AtomicMeasure):
            raise ConfigError("base_spectrum must be an AtomicMeasure")
        if self.model == MODEL_MULTIPLICATIVE:
            self._resolve_columns()
            if self.theta < 0:
                raise ConfigError(f"covariance spike must be non-negative, got {self.theta!r}")
            if np.any(self.base_spectrum.locations < 0):
                raise ConfigError("covariance base spectrum must be non-negative")

    def _resolve_columns(self):
        if self.m is None and self.alpha is None:
            raise ConfigError("the multiplicative model needs m or alpha")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha!r}")
        derived = None if self.alpha is None else int(round(self.alpha * self.n))
        if self.m is None:
            object.__setattr__(self, "m", derived)
        elif derived is not None and derived != self.m:
            raise ConfigError(f"m={self.m} disagrees with alpha={self.alpha} at n={self.n}")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m!r}")

    @property
    def aspect(self) -> Optional[float]:
        """Realized ratio m / n."""
        if self.model != MODEL_MULTIPLICATIVE:
            return None
        return self.m / self.n

    def with_seed(self, seed: int) -> "SpikedModelConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class RealizedModel:
    matrix: np.ndarray
    spike_direction: np.ndarray
    config: SpikedModelConfig = field(repr=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(f"expected a square matrix, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.T)) > 1e-12:
            raise ConfigError("sampled matrix is not symmetric")
        if abs(np.linalg.norm(self.spike_direction) - 1) > 1e-12:
            raise ConfigError("spike direction is not a unit vector")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def base_diagonal(config: SpikedModelConfig) -> np.ndarray:
    """(theta, gamma_2, ..., gamma_n) with slots shared by largest remainder."""
    slots = config.n - 1
    base = config.base_spectrum
    quotas = base.weights * slots
    counts = np.floor(quotas).astype(int)
    remainder = slots - counts.sum()
    if remainder:
        order = np.argsort(-(quotas - counts), kind="stable")
        counts[order[:remainder]] += 1
    return np.concatenate(([config.theta], np.repeat(base.locations, counts)))


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _draw(rng: np.random.Generator, law: str, size) -> np.ndarray:
    if law == LAW_GAUSSIAN:
        return rng.standard_normal(size)
    if law == LAW_RADEMACHER:
        return rng.integers(0, 2, size=size).astype(float) * 2 - 1
    if law == LAW_UNIFORM:
        return rng.uniform(-np.sqrt(3), np.sqrt(3), size=size)
    raise ConfigError(f"unknown entry law {law!r}")


def draw_noise(config: SpikedModelConfig) -> np.ndarray:
    """Unscaled noise: symmetric n x n for Wigner, n x m for Wishart."""
    rng = _generator(config.seed)
    n = config.n
    if config.model == MODEL_ADDITIVE:
        rows, cols = np.triu_indices(n)
        upper = np.zeros((n, n))
        upper[rows, cols] = _draw(rng, config.entry_law, rows.size)
        return upper + np.triu(upper, 1).T
    return _draw(rng, config.entry_law, (n, config.m))


def _spike_direction(n):
    direction = np.zeros(n)
    direction[0] = 1.0
    return direction


def sample_wigner(config: SpikedModelConfig) -> RealizedModel:
    if config.model != MODEL_ADDITIVE:
        raise ConfigError("sample_wigner needs the additive model")
    noise = draw_noise(config)
    matrix = noise / np.sqrt(config.n)
    matrix[np.diag_indices(config.n)] += base_diagonal(config)
    _LOGGER.debug("Sampled Wigner n=%s theta=%s seed=%s", config.n, config.theta, config.seed)
    return RealizedModel(matrix, _spike_direction(config.n), config)


def sample_wishart(config: SpikedModelConfig) -> RealizedModel:
    if config.model != MODEL_MULTIPLICATIVE:
        raise ConfigError("sample_wishart needs the multiplicative model")
    noise = draw_noise(config)
    scaled = np.sqrt(base_diagonal(config))[:, None] * noise
    matrix = scaled @ scaled.T / config.n
    matrix = (matrix + matrix.T) / 2
    _LOGGER.debug(
        "Sampled Wishart n=%s m=%s theta=%s seed=%s",
        config.n,
        config.m,
        config.theta,
        config.seed,
    )
    return RealizedModel(matrix, _spike_direction(config.n), config)


def sample(config: SpikedModelConfig) -> RealizedModel:
    if config.model == MODEL_ADDITIVE:
        return sample_wigner(config)
    return sample_wishart(config)
