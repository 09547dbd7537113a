"""Spiked Spectra Version 0.1.0"""
# Spectral measures and eigenvector overlaps of spiked random matrices.
import logging

from spiked_spectra.spectra.analytic import (
    FreeAdditiveSolution,
    FreeMultiplicativeSolution,
    OutlierReport,
    SolverSettings,
    find_outlier_additive,
    find_outlier_multiplicative,
    solve_free_additive,
    solve_free_multiplicative,
)
from spiked_spectra.spectra.closed_forms import (
    RankOneLaw,
    spiked_mp_law,
    spiked_semicircle_law,
)
from spiked_spectra.spectra.eig import EigenDecomposition, sym_eig
from spiked_spectra.spectra.measures import (
    AtomicMeasure,
    StieltjesEvaluator,
    WeightedSpectralMeasure,
)
from spiked_spectra.spectra.sampler import RealizedModel, SpikedModelConfig, sample

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "AtomicMeasure",
    "EigenDecomposition",
    "FreeAdditiveSolution",
    "FreeMultiplicativeSolution",
    "OutlierReport",
    "RankOneLaw",
    "RealizedModel",
    "SolverSettings",
    "SpikedModelConfig",
    "StieltjesEvaluator",
    "WeightedSpectralMeasure",
    "find_outlier_additive",
    "find_outlier_multiplicative",
    "sample",
    "solve_free_additive",
    "solve_free_multiplicative",
    "spiked_mp_law",
    "spiked_semicircle_law",
    "sym_eig",
]
