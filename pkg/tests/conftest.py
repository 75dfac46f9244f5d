"""
Pytest configuration and fixtures for expofit testing.

Shared datasets (the limit and constant paradigms, the constructed quartet,
the cooling surrogate), CLI runner and settings isolation.
"""

from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from expofit_cli.core.dataset import Dataset
from expofit_cli.settings import reload_settings

from .utils import alternating, exponential_values


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: mark test as a unit test")
    config.addinivalue_line("markers", "integration: mark test as an integration test")
    config.addinivalue_line("markers", "slow: mark test as slow running")
    config.addinivalue_line("markers", "logging: mark test as logging-related")


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Run every test in a clean directory with default settings."""
    for name in ("EXPOFIT_SEED", "EXPOFIT_LOG_LEVEL", "EXPOFIT_WORKERS", "EXPOFIT_DEBUG"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    reload_settings()
    yield
    reload_settings()


@pytest.fixture
def temp_dir(tmp_path):
    """Directory for files written by a test."""
    return Path(tmp_path)


@pytest.fixture
def cli_runner():
    """Click CLI runner for testing CLI commands."""
    return CliRunner()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def limit_paradigm():
    """Best approximation is the k -> -inf limit (2, 1, 1, 1)."""
    return Dataset([1.0, 2.0, 3.0, 4.0], [3.0, 0.0, 1.0, 2.0])


@pytest.fixture
def constant_paradigm():
    """Best approximation is the constant 1."""
    return Dataset([0.0, 1.0, 2.0, 3.0], [1.0, 0.0, 2.0, 0.0])


@pytest.fixture
def quartet():
    """4*exp(-0.5 t) + 1 plus (+0.1, -0.1, +0.1, -0.1) at t = (0, 1, 2, 4)."""
    t = np.array([0.0, 1.0, 2.0, 4.0])
    return Dataset(t, exponential_values(4.0, -0.5, 1.0, t) + alternating(4, 0.1))


@pytest.fixture
def cooling():
    """Cooling curve on t = 0, 200, ..., 2200 with +-0.01 at indices 0, 3, 7, 11."""
    t = 200.0 * np.arange(12)
    T = exponential_values(5.7259032, -0.0026042, -1.3743464, t)
    for position, index in enumerate((0, 3, 7, 11)):
        T[index] += 0.01 * (-1) ** position
    return Dataset(t, T)


@pytest.fixture
def three_points():
    t = np.array([0.0, 1.0, 2.0])
    return Dataset(t, 2.0 * np.exp(-t) + 1.0)


@pytest.fixture
def quartet_file(temp_dir, quartet):
    path = temp_dir / "quartet.csv"
    path.write_text("t,T\n" + quartet.serialize())
    return path


@pytest.fixture
def paradigm_file(temp_dir, limit_paradigm):
    path = temp_dir / "paradigm.csv"
    path.write_text(limit_paradigm.serialize())
    return path


def pytest_collection_modifyitems(config, items):
    """Add markers based on test file names."""
    for item in items:
        if "logging_system" in item.nodeid:
            item.add_marker(pytest.mark.logging)
        if "test_integration" in item.nodeid:
            item.add_marker(pytest.mark.integration)
        if "test_unit" in item.nodeid:
            item.add_marker(pytest.mark.unit)
