"""Quantum (two-photon) and classical Larmor radiation of electrons in strong field pulses."""

from unruhsim.units import CONSTANTS, Constants, from_natural, to_natural
from unruhsim.pulse import PulseProfile
from unruhsim.kinematics import RetardedTimeMap, Trajectory, cutoff_wavenumber, retarded_map, solve_trajectory
from unruhsim.quadrature import ConvergenceError, OscillatoryIntegralSpec, fourier_integral
from unruhsim.radiation import (
    PhotonMode,
    larmor_coefficient,
    polarization_basis,
    polarization_pair_matrix,
    unruh_amplitude,
)
from unruhsim.analysis import (
    domination_angle,
    pair_probability,
    single_photon_probability,
    spectral_map,
    spectral_slope,
    unruh_temperature,
)
from unruhsim.vacuum import BackgroundField, corrected_polarization, forward_leakage, permittivity

__version__ = "0.1.0"

__all__ = [
    "BackgroundField",
    "CONSTANTS",
    "Constants",
    "ConvergenceError",
    "OscillatoryIntegralSpec",
    "PhotonMode",
    "PulseProfile",
    "RetardedTimeMap",
    "Trajectory",
    "corrected_polarization",
    "cutoff_wavenumber",
    "domination_angle",
    "forward_leakage",
    "fourier_integral",
    "from_natural",
    "larmor_coefficient",
    "pair_probability",
    "permittivity",
    "polarization_basis",
    "polarization_pair_matrix",
    "retarded_map",
    "single_photon_probability",
    "solve_trajectory",
    "spectral_map",
    "spectral_slope",
    "to_natural",
    "unruh_amplitude",
    "unruh_temperature",
]
