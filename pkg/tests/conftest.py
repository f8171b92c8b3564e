import numpy as np
import pytest

from mqecho import SpinSystem, build_hamiltonian, from_preset
from mqecho.hamiltonians import dipolar_couplings, random_couplings, ring_positions


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sys4():
    return SpinSystem(4, "x")


@pytest.fixture
def sys6():
    return SpinSystem(6, "x")


@pytest.fixture
def dipolar_ring6():
    """6-spin dipolar ring (field normal to the ring plane), x basis."""
    sys = SpinSystem(6, "x")
    table = dipolar_couplings(ring_positions(6), (0.0, 0.0, 1.0), 1.0)
    return sys, build_hamiltonian(sys, from_preset("dipolar-secular", table))


@pytest.fixture
def random_dipolar6():
    sys = SpinSystem(6, "x")
    table = random_couplings(6, seed=3)
    return sys, build_hamiltonian(sys, from_preset("dipolar-secular", table))
