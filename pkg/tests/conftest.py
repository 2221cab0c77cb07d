import numpy as np
import pytest

import pressgap as pg


@pytest.fixture(scope="session")
def doubling_map():
    return pg.doubling()


@pytest.fixture(scope="session")
def mp_map():
    return pg.manneville_pomeau(0.5)


@pytest.fixture(scope="session")
def perturbed_map():
    return pg.perturbed_doubling(0.75)


@pytest.fixture(scope="session")
def builtin_maps(doubling_map, mp_map, perturbed_map):
    return [doubling_map, mp_map, perturbed_map]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sin_potential():
    # Lipschitz on the circle with constant 1
    return pg.Potential(
        lambda x: np.sin(2.0 * np.pi * np.asarray(x, dtype=float)) / (2.0 * np.pi),
        1.0, 1.0, name="sin")
