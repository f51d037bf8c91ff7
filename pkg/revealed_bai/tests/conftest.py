"""
Shared fixtures and marker registration.

Markers are registered here as well as in pytest.ini so that
`revealed-bai validate <suite>` works from an installed package.
"""

import pytest

from revealed_bai.user_model import ConstantRho, UserParams

from .helpers import make_session


def pytest_configure(config):
    config.addinivalue_line("markers", "unit: exact oracle checks of single operations")
    config.addinivalue_line("markers", "properties: invariants checked over many seeded runs")
    config.addinivalue_line("markers", "statistical: Monte-Carlo checks with loose tolerances")


def pytest_collection_modifyitems(config, items):
    # tests without a suite marker belong to the unit suite
    for item in items:
        if not any(item.get_closest_marker(name) for name in ("properties", "statistical")):
            item.add_marker(pytest.mark.unit)


@pytest.fixture
def two_arm_session():
    """Noiseless user on means (1.0, 0.5) with the linear trust policy."""
    return make_session((1.0, 0.5), seed=7)


@pytest.fixture
def unit_rho_params():
    """alpha = 1, rho = 1: the classic UCB1 width."""
    return UserParams(alpha=1.0, rho_policy=ConstantRho(1.0))
