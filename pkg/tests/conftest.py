import numpy as np
import pytest

from hamiltonian_learning.models import HamiltonianFamily


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def line2():
    return HamiltonianFamily(id="ising-line", n=2)


@pytest.fixture
def line4():
    return HamiltonianFamily(id="ising-line", n=4)


@pytest.fixture
def transverse2():
    return HamiltonianFamily(id="transverse-ising", n=2)
