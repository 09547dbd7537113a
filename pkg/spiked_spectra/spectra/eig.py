"""Version 0.1.0"""
# Eig Module
# Dense symmetric eigendecomposition behind a fixed contract: descending
# eigenvalues, orthonormal eigenvectors, deterministic signs.

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from scipy import linalg

from spiked_spectra.const import (
    EIG_ORTHOGONALITY_TOLERANCE,
    EIG_RESIDUAL_TOLERANCE,
    SYMMETRY_TOLERANCE,
)
from spiked_spectra.utils.errors import AsymmetryError, ConvergenceError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """eigenvalues[i] pairs with the column eigenvectors[:, i]."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def validate(self, matrix: np.ndarray) -> None:
        """Raise ConvergenceError unless residual and orthonormality checks hold."""
        scale = max(float(np.max(np.abs(matrix))), 1.0)
        residual = matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues[None, :]
        bound = EIG_RESIDUAL_TOLERANCE * (1 + np.abs(self.eigenvalues)) * scale
        if np.any(np.linalg.norm(residual, axis=0) > bound):
            raise ConvergenceError("eigenpair residual above tolerance")
        gram = self.eigenvectors.T @ self.eigenvectors
        if np.max(np.abs(gram - np.eye(self.n))) > EIG_ORTHOGONALITY_TOLERANCE:
            raise ConvergenceError("eigenvectors are not orthonormal")

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues[None, :]) @ self.eigenvectors.T

    def smallest(self) -> float:
        return float(self.eigenvalues[-1])


def sym_eig(matrix, validate: bool = True) -> EigenDecomposition:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise AsymmetryError(f"expected a square matrix, got shape {matrix.shape}")
    gap = float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0
    if gap > SYMMETRY_TOLERANCE:
        raise AsymmetryError(f"matrix is not symmetric (max |M - M^T| = {gap:.3g})")
    try:
        eigenvalues, eigenvectors = linalg.eigh(matrix, check_finite=True)
    except (linalg.LinAlgError, ValueError) as error:
        raise ConvergenceError(f"symmetric eigensolver failed: {error}") from error

    eigenvalues = eigenvalues[::-1].copy()
    eigenvectors = eigenvectors[:, ::-1].copy()
    # largest-magnitude entry positive; argmax keeps the lowest index on ties
    pivots = np.argmax(np.abs(eigenvectors), axis=0)
    signs = np.sign(eigenvectors[pivots, np.arange(eigenvectors.shape[1])])
    signs[signs == 0] = 1.0
    eigenvectors *= signs[None, :]

    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    decomposition = EigenDecomposition(eigenvalues, eigenvectors)
    if validate:
        decomposition.validate(matrix)
    _LOGGER.debug("Decomposed %sx%s matrix", matrix.shape[0], matrix.shape[1])
    return decomposition
