import numpy as np
import pytest

from nonharmonic.model import make_system
from nonharmonic.weights import standard_weight


@pytest.fixture(scope="session")
def system_h2():
    return make_system(h=2.0, J=64, n_x=512)


@pytest.fixture(scope="session")
def system_h1():
    return make_system(h=1.0, J=64, n_x=512)


@pytest.fixture(scope="session")
def system_h4():
    return make_system(h=4.0, J=64, n_x=512)


@pytest.fixture(scope="session")
def weight_h2(system_h2):
    return standard_weight(system_h2.spec)


@pytest.fixture(scope="session")
def weight_h1(system_h1):
    return standard_weight(system_h1.spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
