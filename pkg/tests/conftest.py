"""pytest fixtures."""
import pytest
import yaml

from spiked_spectra.const import MODEL_ADDITIVE, MODEL_MULTIPLICATIVE
from spiked_spectra.spectra.analytic import (
    FreeAdditiveSolution,
    FreeMultiplicativeSolution,
)
from spiked_spectra.spectra.measures import AtomicMeasure
from spiked_spectra.spectra.sampler import SpikedModelConfig


@pytest.fixture(scope="session")
def semicircle_solution():
    """Fixed point for the semicircle (base delta_0)."""
    return FreeAdditiveSolution(AtomicMeasure.dirac(0.0))


@pytest.fixture(scope="session")
def mp_solution():
    """Fixed point for Marchenko-Pastur with alpha = 4."""
    return FreeMultiplicativeSolution(AtomicMeasure.dirac(1.0), 4.0)


@pytest.fixture(scope="session")
def mp_small_solution():
    """Fixed point for Marchenko-Pastur with alpha = 1/2 (atom at 0)."""
    return FreeMultiplicativeSolution(AtomicMeasure.dirac(1.0), 0.5)


@pytest.fixture
def two_atom_base():
    return AtomicMeasure.from_atoms([(-1.0, 0.5), (1.0, 0.5)])


@pytest.fixture
def additive_config():
    return SpikedModelConfig(model=MODEL_ADDITIVE, n=200, theta=3.0, seed=0)


@pytest.fixture
def multiplicative_config():
    return SpikedModelConfig(model=MODEL_MULTIPLICATIVE, n=100, m=400, theta=2.0, seed=0)


@pytest.fixture
def scenario_data():
    return {
        "model": {"kind": "additive", "n": 200, "theta": 3.0, "seed": 5},
        "scenario": {"name": "small", "seeds": [0, 1], "workers": 2},
        "diagnostic": {"energies": [0.0], "etas": [0.2, 0.1]},
        "tolerances": {"outlier_location": 0.5, "outlier_mass": 0.3},
    }


@pytest.fixture
def scenario_file(tmp_path, scenario_data):
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(scenario_data), encoding="utf-8")
    return path
