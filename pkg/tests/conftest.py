"""
Pytest configuration and shared fixtures.
"""

import json
import math
import os
import tempfile
from pathlib import Path

import pytest

# Set test environment variables before importing settings
os.environ["LOG_LEVEL"] = "WARNING"  # Reduce noise in tests

from src.config.settings import Settings
from src.solver.integrand import SourceVector
from src.solver.media import Layer, LayerStack, RegimeConfig, UniaxialTensor
from src.utils.logger import configure_logging

configure_logging(log_level="WARNING", pretty_console=False)

BENCHMARK_FREQUENCY = 36e3


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def test_settings():
    """Settings with quiet logging and library defaults."""
    return Settings(log_level="WARNING")


@pytest.fixture
def regime_config():
    return RegimeConfig()


def benchmark_media(kappa: float) -> tuple[UniaxialTensor, UniaxialTensor]:
    """Horizontal eps_r = mu_r = 16, sigma = 16 S/m; vertical divided by kappa^2."""
    omega = 2 * math.pi * BENCHMARK_FREQUENCY
    ratio = kappa**2
    eps = UniaxialTensor.from_material(16.0, 16.0 / ratio, 16.0, 16.0 / ratio, omega)
    mu = UniaxialTensor.permeability(16.0, 16.0 / ratio)
    return eps, mu


@pytest.fixture
def benchmark_stack_factory():
    """Homogeneous 36 kHz benchmark medium for a given anisotropy ratio."""

    def make(kappa: float = 1.0) -> LayerStack:
        eps, mu = benchmark_media(kappa)
        return LayerStack.homogeneous(eps, mu, BENCHMARK_FREQUENCY)

    return make


@pytest.fixture
def three_layer_stack():
    """Conductive core, resistive annulus, uniaxial formation at 36 kHz."""
    omega = 2 * math.pi * BENCHMARK_FREQUENCY
    return LayerStack(
        layers=(
            Layer(0.02, UniaxialTensor.from_material(1, 1, 1e3, 1e3, omega), UniaxialTensor.permeability()),
            Layer(0.1, UniaxialTensor.from_material(1, 1, 0.5, 0.5, omega), UniaxialTensor.permeability()),
            Layer(
                math.inf,
                UniaxialTensor.from_material(1, 1, 0.2, 0.05, omega),
                UniaxialTensor.permeability(),
            ),
        ),
        frequency=BENCHMARK_FREQUENCY,
    )


@pytest.fixture
def z_source():
    """Unit z-directed dipole at rho' = 1 cm."""
    return SourceVector(moment=1.0, orientation=(0.0, 0.0, 1.0), position=(0.01, 0.0, 0.0))


@pytest.fixture
def scenario_dict():
    """Minimal valid scenario document (one homogeneous layer, one receiver)."""
    return {
        "schema_version": 1,
        "name": "unit",
        "frequency": "36 kHz",
        "layers": [
            {
                "name": "medium",
                "horizontal": {"conductivity": "16 S/m", "eps_r": 16.0, "mu_r": 16.0},
                "vertical": {"conductivity": "1 S/m", "eps_r": 1.0, "mu_r": 1.0},
            }
        ],
        "source": {
            "moment": "1 A.m",
            "orientation": "z",
            "position": {"rho": "0.01 m", "z": "0 m"},
        },
        "receivers": [{"kind": "point", "position": {"rho": "0.05 m", "z": "0.02 m"}}],
        "solver": {"n_max": 20, "n_int": 400, "direct_subtraction": "off"},
    }


@pytest.fixture
def write_scenario(temp_dir):
    """Write a scenario dict to a .cfg file and return its path."""

    def write(document: dict, name: str = "scenario.cfg") -> Path:
        path = temp_dir / name
        path.write_text(json.dumps(document, indent=2))
        return path

    return write
