import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from totcorr.optimize import OptimizerConfig
from totcorr.rng import RngState
from totcorr.states import canonical

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# enough restarts for optimized measures to hit their tolerance on two qubits
FAST_OPT = OptimizerConfig(restarts=8)


@pytest.fixture
def rng():
    return RngState(20240611)


@pytest.fixture
def bell():
    return canonical("bell_phi_plus")


@pytest.fixture
def fast_opt():
    return FAST_OPT


def random_hermitian(d, seed):
    g = np.random.default_rng(seed)
    a = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    return a + a.conj().T
