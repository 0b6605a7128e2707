"""
conftest.py - Shared fixtures and the slow-test switch

Large-ensemble checks (N=16, tens of runs) are marked `slow` and only run with
`pytest --runslow`.
"""

import os
import sys

import pytest

# Add parent directory to path so we can import our modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from sykmonitor.core.seeding import make_generator
from sykmonitor.core.syk_model import build_hamiltonian, sample_couplings


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the large-ensemble acceptance checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large-ensemble check, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def small_hamiltonian():
    """One N=8 (4-qubit) realization at J=1"""
    return build_hamiltonian(sample_couplings(8, 1.0, 1234))


@pytest.fixture
def rng():
    return make_generator(2024)
