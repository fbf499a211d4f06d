"""
Test configuration and shared fixtures
"""
import pytest

from slepian_mtm.grid import FrequencyGrid
from slepian_mtm.prolate import compute_dpss, dpss_params
from slepian_mtm.settings import get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached per process; every test sees its own environment"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def basis_256():
    """All 256 DPSS for N=256, W=0.1 (K = 51)"""
    return compute_dpss(dpss_params(256, 0.1))


@pytest.fixture(scope="session")
def basis_128():
    """All 128 DPSS for N=128, W=0.1 (K = 25)"""
    return compute_dpss(dpss_params(128, 0.1))


@pytest.fixture(scope="session")
def basis_64():
    """All 64 DPSS for N=64, W=0.1 (K = 12)"""
    return compute_dpss(dpss_params(64, 0.1))


@pytest.fixture(scope="session")
def fine_grid():
    """Reference quadrature grid, M = 2^14"""
    return FrequencyGrid(2 ** 14)


@pytest.fixture(scope="session")
def grid_1024():
    return FrequencyGrid(1024)
