"""Natural units (hbar = c = eps0 = mu0 = 1) with the electronvolt as base unit.

Every internal quantity is a power of energy:

    time, length     -> eV^-1
    energy, momentum -> eV
    field strength   -> eV^2   (so that q*E is a force in eV^2)

Laboratory units only appear at the configuration boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.constants as sc

__all__ = ["Constants", "CONSTANTS", "UNITS", "to_natural", "from_natural", "UnitError"]


class UnitError(ValueError):
    """Unknown or unsupported unit tag."""


@dataclass(frozen=True)
class Constants:
    alpha_qed: float
    m: float  # electron mass [eV]
    hbar_eV_s: float  # seconds per eV^-1
    hbar_c_eV_m: float  # meters per eV^-1

    @property
    def q(self) -> float:
        return math.sqrt(4.0 * math.pi * self.alpha_qed)

    @property
    def g(self) -> float:
        """Scattering length q^2/m of the point scatterer [eV^-1]."""
        return self.q**2 / self.m

    @property
    def E_S(self) -> float:
        """Schwinger field m^2/q [eV^2]."""
        return self.m**2 / self.q

    @property
    def field_V_per_m(self) -> float:
        """V/m per natural field unit (eV^2)."""
        return self.q / self.hbar_c_eV_m

    @property
    def q_over_m(self) -> float:
        return self.q / self.m


CONSTANTS = Constants(
    alpha_qed=sc.fine_structure,
    m=sc.physical_constants["electron mass energy equivalent in MeV"][0] * 1e6,
    hbar_eV_s=sc.hbar / sc.e,
    hbar_c_eV_m=sc.hbar * sc.c / sc.e,
)

# unit tag -> (kind, factor); natural = lab * factor for the linear kinds
_C = CONSTANTS
UNITS: dict[str, tuple[str, float]] = {
    "natural": ("any", 1.0),
    "s": ("time", 1.0 / _C.hbar_eV_s),
    "fs": ("time", 1e-15 / _C.hbar_eV_s),
    "as": ("time", 1e-18 / _C.hbar_eV_s),
    "m": ("length", 1.0 / _C.hbar_c_eV_m),
    "nm": ("length", 1e-9 / _C.hbar_c_eV_m),
    "eV": ("energy", 1.0),
    "keV": ("energy", 1e3),
    "MeV": ("energy", 1e6),
    "V/m": ("field", 1.0 / _C.field_V_per_m),
    "E_S": ("field", _C.E_S),
    "W/cm2": ("intensity", float("nan")),
}


def _intensity_to_field(intensity_w_cm2):
    # peak field of a linearly polarized wave, I = c eps0 E^2 / 2
    e_si = np.sqrt(2.0 * np.asarray(intensity_w_cm2, dtype=float) * 1e4 / (sc.c * sc.epsilon_0))
    return e_si / _C.field_V_per_m


def _field_to_intensity(field):
    e_si = np.asarray(field, dtype=float) * _C.field_V_per_m
    return 0.5 * sc.c * sc.epsilon_0 * e_si**2 * 1e-4


def _lookup(unit: str) -> tuple[str, float]:
    try:
        return UNITS[unit]
    except KeyError:
        raise UnitError(f"unknown unit tag {unit!r}; expected one of {sorted(UNITS)}") from None


def to_natural(value, unit: str):
    """Convert ``value`` given in ``unit`` to natural units.

    Intensities (``W/cm2``) convert to the peak field strength in eV^2.
    """
    kind, factor = _lookup(unit)
    if kind == "intensity":
        out = _intensity_to_field(value)
    else:
        out = np.asarray(value, dtype=float) * factor
    return float(out) if np.ndim(out) == 0 else out


def from_natural(value, unit: str):
    """Inverse of :func:`to_natural`."""
    kind, factor = _lookup(unit)
    if kind == "intensity":
        out = _field_to_intensity(value)
    else:
        out = np.asarray(value, dtype=float) / factor
    return float(out) if np.ndim(out) == 0 else out
