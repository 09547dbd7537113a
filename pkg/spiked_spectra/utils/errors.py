"""Exceptions raised by spiked_spectra."""


class SpectraError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(SpectraError, ValueError):
    """Invalid model, scenario or file configuration."""

    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{message} (at {path})")
        self.path = path


class DomainError(SpectraError, ValueError):
    """Argument outside the domain of an operation."""


class PoleError(DomainError):
    """Stieltjes transform evaluated on an atom."""


class SupportError(DomainError):
    """Boundary value requested inside the bulk support."""


class DivisionNearZero(DomainError):
    """Density ratio requested where the bulk density vanishes."""


class NormError(DomainError):
    """Direction vector is not a unit vector."""


class MeasureError(SpectraError, ValueError):
    """Weights are negative or do not sum to one."""


class NonConvergence(SpectraError, ArithmeticError):
    """Fixed-point iteration ran out of iterations."""

    def __init__(self, message, iterations=None, damping=None, worst_residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.damping = damping
        self.worst_residual = worst_residual


class ConvergenceError(SpectraError, ArithmeticError):
    """Eigensolver failed or returned pairs violating the accuracy contract."""


class AsymmetryError(SpectraError, ValueError):
    """Matrix handed to the symmetric eigensolver is not symmetric."""
