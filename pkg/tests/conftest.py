"""Pytest configuration and shared fixtures."""

import tempfile
from pathlib import Path

import pytest
import yaml

from src.bath import DiscreteBath, OhmicBath
from src.config import ConfigManager
from src.spin import PreparedState

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


@pytest.fixture
def temp_config_dir():
    """Create a temporary directory for config and output files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def config_manager(temp_config_dir):
    """ConfigManager pointed at a file that does not exist yet."""
    return ConfigManager(config_path=temp_config_dir / "config.yaml")


@pytest.fixture
def figure_bath():
    """Ohmic bath of the figure presets: G = 0.001, omega_c = 10, beta = 1000."""
    return OhmicBath(G=0.001, omega_c=10.0, beta=1000.0)


@pytest.fixture
def single_mode_bath():
    """One mode, omega = 1, g = 0.1, beta = 2."""
    return DiscreteBath(((1.0, 0.1),), beta=2.0)


@pytest.fixture
def coherent_state():
    """Factory for x-polarized coherent states."""
    return PreparedState.coherent


@pytest.fixture
def small_run_config():
    """A run small enough to evaluate in milliseconds."""
    return {
        "name": "small",
        "bath": {"G": 0.001, "omega_c": 10.0, "beta": 1000.0},
        "system": {"N": 50, "omega0": 0.1, "preparation": "projective"},
        "evolution": {"t_max": 0.5, "n_points": 11, "grid": "linear"},
        "correlation_mode": "exact",
    }


@pytest.fixture
def write_config(temp_config_dir):
    """Write a config dict to YAML and return its path."""

    def _write(data, name="run.yaml"):
        path = temp_config_dir / name
        with open(path, "w") as f:
            yaml.safe_dump(data, f)
        return path

    return _write


@pytest.fixture
def config_dir():
    """The shipped config/ directory."""
    return CONFIG_DIR
