import numpy as np
import pytest

from eitcbs.levels import ControlCoupling, LevelScheme
from eitcbs.medium import CloudGeometry


@pytest.fixture(scope="session")
def scheme():
    return LevelScheme()


@pytest.fixture(scope="session")
def cloud():
    """The cloud used throughout: r0 = 0.5 cm, n0 = 3.2e10 / cm^3."""
    return CloudGeometry(peak_density=3.2e10, gaussian_radius=0.5)


@pytest.fixture(scope="session")
def coupling_off():
    return ControlCoupling(0.0)


@pytest.fixture(scope="session")
def coupling_weak():
    return ControlCoupling(0.5)


@pytest.fixture(scope="session")
def coupling_strong():
    return ControlCoupling(3.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
