import math

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given
from hypothesis import strategies as st

from unruhsim.units import CONSTANTS, UNITS, UnitError, from_natural, to_natural


def test_coupling_from_alpha():
    assert CONSTANTS.q == pytest.approx(math.sqrt(4 * math.pi / 137.035999), rel=1e-8)
    assert CONSTANTS.g == pytest.approx(CONSTANTS.q**2 / CONSTANTS.m)


def test_scattering_length_is_classical_electron_radius_times_4pi():
    g_m = CONSTANTS.g * CONSTANTS.hbar_c_eV_m
    assert g_m == pytest.approx(4 * math.pi * sc.physical_constants["classical electron radius"][0], rel=1e-9)


def test_schwinger_field_si():
    e_si = CONSTANTS.E_S * CONSTANTS.field_V_per_m
    expected = sc.m_e**2 * sc.c**3 / (sc.e * sc.hbar)
    assert e_si == pytest.approx(expected, rel=1e-9)


def test_time_and_length_conversions():
    assert to_natural(1.0, "s") == pytest.approx(1.0 / (sc.hbar / sc.e))
    assert to_natural(1.0, "as") == pytest.approx(1e-18 * sc.e / sc.hbar)
    assert to_natural(1.0, "m") == pytest.approx(sc.e / (sc.hbar * sc.c))
    assert to_natural(2.0, "keV") == 2000.0
    assert to_natural(1.0, "E_S") == CONSTANTS.E_S


def test_intensity_round_trip():
    f = to_natural(1e23, "W/cm2")
    e_si = math.sqrt(2 * 1e27 / (sc.c * sc.epsilon_0))
    assert f * CONSTANTS.field_V_per_m == pytest.approx(e_si, rel=1e-12)
    assert from_natural(f, "W/cm2") == pytest.approx(1e23, rel=1e-12)


def test_unknown_unit():
    with pytest.raises(UnitError):
        to_natural(1.0, "furlong")


@given(st.floats(1e-30, 1e30), st.sampled_from(sorted(UNITS)))
def test_round_trip(value, unit):
    assert from_natural(to_natural(value, unit), unit) == pytest.approx(value, rel=1e-12)


def test_arrays_convert_elementwise():
    out = to_natural(np.array([1.0, 2.0]), "fs")
    assert out.shape == (2,)
    assert out[1] == pytest.approx(2 * out[0])
