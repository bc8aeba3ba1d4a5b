import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unruhsim.quadrature import ConvergenceError, OscillatoryIntegralSpec, fourier_integral, integrate_oscillatory


def test_gaussian_transform():
    s = 0.7
    w = np.linspace(0.0, 25.0, 60)
    res = fourier_integral(OscillatoryIntegralSpec(lambda t: np.exp(-t * t / (2 * s * s)), w, (-10.0, 10.0)))
    exact = s * math.sqrt(2 * math.pi) * np.exp(-0.5 * (s * w) ** 2)
    np.testing.assert_allclose(res.value, exact, atol=1e-14)
    assert np.all(res.error < 1e-11)


@settings(max_examples=30, deadline=None)
@given(T=st.floats(0.1, 10.0), w=st.floats(0.01, 500.0))
def test_box_transform(T, w):
    res = fourier_integral(OscillatoryIntegralSpec(lambda t: np.ones_like(t), w, (0.0, T), discontinuities=(0.0, T)))
    exact = (np.exp(1j * w * T) - 1) / (1j * w)
    assert abs(res.value - exact) <= 1e-12 * max(1.0, T)


def test_polynomial_envelope_is_exact():
    # x^3 on [0,1]: the Legendre interpolant is exact, only rounding remains
    w = 37.0
    res = integrate_oscillatory(lambda t: t**3, w, 0.0, 1.0)
    iw = 1j * w
    e = np.exp(iw)
    exact = e / iw - 3 * e / iw**2 + 6 * e / iw**3 - 6 * (e - 1) / iw**4
    assert abs(res.value - exact) < 1e-15


def test_kink_needs_breakpoint():
    env = lambda t: np.abs(t)  # noqa: E731
    w = np.array([3.0, 40.0])
    res = integrate_oscillatory(env, w, -1.0, 1.0, breakpoints=(0.0,))
    exact = 2 * (np.cos(w) + w * np.sin(w) - 1) / w**2
    np.testing.assert_allclose(res.value.real, exact, atol=1e-14)
    assert res.panels < 100


def test_vector_and_scalar_agree():
    env = lambda t: np.exp(-t * t) * (1 + t)  # noqa: E731
    vec = integrate_oscillatory(env, np.array([2.0, 5.0]), -8.0, 8.0)
    one = integrate_oscillatory(env, 5.0, -8.0, 8.0)
    assert abs(vec.value[1] - one.value) < 1e-15


def test_budget_exhaustion_raises():
    with pytest.raises(ConvergenceError) as info:
        integrate_oscillatory(lambda t: np.sqrt(np.abs(t)), 1.0, -1.0, 1.0, max_panels=20, abs_tol=1e-15, rel_tol=1e-15)
    assert np.isfinite(info.value.error)


def test_endpoint_must_be_negligible():
    with pytest.raises(ValueError):
        fourier_integral(OscillatoryIntegralSpec(lambda t: np.ones_like(t), 1.0, (0.0, 1.0)))


@pytest.mark.parametrize("bad", [dict(domain=(1.0, 0.0)), dict(omega=-1.0), dict(discontinuities=(5.0,))])
def test_spec_validation(bad):
    kw = dict(envelope=np.ones_like, omega=1.0, domain=(0.0, 1.0))
    kw.update(bad)
    with pytest.raises(ValueError):
        OscillatoryIntegralSpec(**kw)
