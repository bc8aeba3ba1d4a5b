import math

import numpy as np
import pytest

from unruhsim import CONSTANTS, PulseProfile, solve_trajectory
from unruhsim.units import to_natural


def gaussian_for_gamma(gamma_max: float, sigma: float, u0: float = 0.0) -> PulseProfile:
    """Gaussian pulse of width ``sigma`` that brings an electron at rest to ``gamma_max``."""
    u_peak = math.sqrt(gamma_max**2 - 1.0)
    e0 = (u_peak - u0) / (CONSTANTS.q_over_m * sigma * math.sqrt(2.0 * math.pi))
    return PulseProfile("gaussian", e0, sigma)


@pytest.fixture(scope="session")
def gamma2_pulse():
    return gaussian_for_gamma(2.0, to_natural(0.3, "as"))


@pytest.fixture(scope="session")
def gamma2_traj(gamma2_pulse):
    return solve_trajectory(gamma2_pulse)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261018)
