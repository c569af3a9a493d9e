import math

import pytest

from qgrav.cli import load_wavefunction


@pytest.fixture(scope="session")
def h2p():
    return load_wavefunction("hydrogenlike-2p")


@pytest.fixture(scope="session")
def h1s():
    return load_wavefunction("hydrogen-1s")


@pytest.fixture(scope="session")
def h1s_normalized():
    return load_wavefunction("hydrogen-1s", overrides={"C": 1 / math.sqrt(math.pi)})
