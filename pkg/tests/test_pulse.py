import math

import numpy as np
import pytest
from scipy.integrate import quad

from unruhsim.pulse import PulseProfile, smooth_ramp


@pytest.mark.parametrize(
    "profile",
    [
        PulseProfile("gaussian", 2.0, 1.5, t_center=0.3),
        PulseProfile("rectangular", 1.0, 3.0),
        PulseProfile("smooth_front", 1.5, 4.0, delta_t_rise=1.0, t_center=-1.0),
    ],
    ids=["gaussian", "rectangular", "smooth_front"],
)
def test_antiderivative_matches_adaptive_quadrature(profile):
    lo, hi = profile.support(1e-14)
    lo -= 1.0
    for t in np.linspace(lo, hi + 1.0, 13):
        pts = [p for p in profile.breakpoints() if lo < p < t]
        ref, _ = quad(lambda s: float(profile.field_at(s)), lo, t, points=pts or None, limit=200, epsabs=1e-13)
        assert float(profile.antiderivative(t)) == pytest.approx(ref, abs=1e-11)


def test_gaussian_total_area():
    p = PulseProfile("gaussian", 3.0, 0.7)
    assert float(p.antiderivative(50.0)) == pytest.approx(3.0 * 0.7 * math.sqrt(2 * math.pi), rel=1e-14)


def test_support_edges():
    p = PulseProfile("gaussian", 1.0, 2.0)
    lo, hi = p.support(1e-12)
    assert float(p.field_at(hi)) == pytest.approx(1e-12, rel=1e-9)
    assert float(p.field_at(lo)) == pytest.approx(1e-12, rel=1e-9)


def test_rectangular_discontinuities():
    p = PulseProfile("rectangular", 1.0, 2.0, t_center=1.0)
    assert p.discontinuities() == (0.0, 2.0)
    assert PulseProfile("rectangular", 0.0, 2.0).discontinuities() == ()
    assert PulseProfile("gaussian", 1.0, 2.0).discontinuities() == ()


def test_smooth_ramp_is_flat_at_ends():
    x = np.array([-1.0, 0.0, 1e-3, 0.5, 1 - 1e-3, 1.0, 2.0])
    y = smooth_ramp(x)
    assert y[0] == y[1] == 0.0 and y[5] == y[6] == 1.0
    assert y[3] == pytest.approx(0.5)
    assert y[2] < 1e-200 and 1 - y[4] < 1e-200


def test_field_time_integral():
    p = PulseProfile("rectangular", 2.0, 1.0)
    assert float(p.field_time_integral(-1.0, 0.0)) == pytest.approx(1.0)
    assert float(p.field_time_integral(0.2, 0.2)) == 0.0
    with pytest.raises(ValueError):
        p.field_time_integral(1.0, 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(shape="triangle", E0=1.0, delta_t_pulse=1.0),
        dict(shape="gaussian", E0=-1.0, delta_t_pulse=1.0),
        dict(shape="gaussian", E0=1.0, delta_t_pulse=0.0),
        dict(shape="smooth_front", E0=1.0, delta_t_pulse=1.0, delta_t_rise=2.0),
    ],
)
def test_invalid_profiles(kwargs):
    with pytest.raises(ValueError):
        PulseProfile(**kwargs)
