import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import gaussian_for_gamma
from unruhsim import CONSTANTS, PhotonMode, PulseProfile, solve_trajectory, unruh_amplitude
from unruhsim.analysis import (
    domination_angle,
    doppler_tail_slope,
    larmor_energy,
    pair_probability,
    polar_theta_grid,
    radiated_energy,
    single_photon_probability,
    spectral_map,
    spectral_slope,
    unruh_temperature,
)
from unruhsim.kinematics import Trajectory, cutoff_wavenumber
from unruhsim.radiation import GaussianWindow
from unruhsim.units import to_natural

SIGMA = to_natural(0.3, "as")


@pytest.fixture(scope="module")
def static_traj():
    return solve_trajectory(PulseProfile("gaussian", 0.0, SIGMA))


@pytest.fixture(scope="module")
def slow_traj():
    # beta_max = 0.05: dipole regime
    return solve_trajectory(gaussian_for_gamma(1.0 / math.sqrt(1 - 0.05**2), to_natural(1.0, "as")))


def test_static_map_is_empty(static_traj):
    sm = spectral_map(static_traj, np.array([1e3, 2e3]), np.array([0.1, 1.0, 2.0]))
    assert np.all(sm.classical == 0.0)
    assert np.all(sm.quantum == 0.0)


def test_map_layers_and_cell_independence(gamma2_traj):
    k = np.array([2e3, 6e3, 1.2e4])
    th = np.array([0.01, 0.5, 1.5, 3.0])
    a = spectral_map(gamma2_traj, k, th)
    b = spectral_map(gamma2_traj, np.sort(np.concatenate([k, k + 1e3])), np.sort(np.concatenate([th, th + 0.05])), threads=2)
    assert np.all(a.quantum >= 0) and np.all(a.classical >= 0)
    assert not a.failed.any()
    sub = np.ix_(np.searchsorted(b.theta, th), np.searchsorted(b.k, k))
    np.testing.assert_allclose(b.quantum[sub], a.quantum, rtol=1e-3)
    np.testing.assert_allclose(b.classical[sub], a.classical, rtol=1e-3)
    assert a.metadata["gamma_max"] == pytest.approx(2.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(pairing="sideways"), dict(polarization="circular"), dict(k_grid=np.array([2.0, 1.0])), dict(k_grid=np.array([-1.0]))],
)
def test_map_validation(gamma2_traj, kwargs):
    args = dict(k_grid=np.array([1e3]), theta_grid=np.array([0.5]))
    args.update(kwargs)
    with pytest.raises(ValueError):
        spectral_map(gamma2_traj, **args)


def test_polar_grid():
    for n in (2, 7, 100):
        g = polar_theta_grid(n)
        assert g.size == n and g[0] == 0.0 and g[-1] == math.pi
        assert np.all(np.diff(g) > 0)
        np.testing.assert_allclose(g + g[::-1], math.pi, atol=1e-15)


def test_domination_angle_crossing(gamma2_traj):
    cone = domination_angle(gamma2_traj, 3e3, "forward")
    assert cone.crossed
    assert 0 < cone.theta_max < 0.5 * math.pi
    assert cone.residual < 1e-3
    inside = cone.theta_samples < cone.theta_max
    assert np.all(cone.ratio_samples[inside] > 1)


def test_domination_angle_reports_missing_crossing(gamma2_traj):
    cone = domination_angle(gamma2_traj, 3e3, "forward", theta_min=0.5)
    assert not cone.crossed and cone.theta_max is None
    assert cone.ratio_samples.size == cone.theta_samples.size


def test_pair_probability_static_is_zero(static_traj):
    assert pair_probability(static_traj, 0.1, 1e4).value == 0.0
    assert single_photon_probability(static_traj, 0.1, 1e4).value == 0.0


@pytest.fixture(scope="module")
def pulse5():
    p = gaussian_for_gamma(5.0, to_natural(0.26, "as"))
    traj = solve_trajectory(p)
    return traj, cutoff_wavenumber(traj, p).k_cut


def test_pair_probability_converges(pulse5):
    traj, kc = pulse5
    th = 0.1 / traj.gamma_max
    base = pair_probability(traj, th, 3 * kc, cones="forward")
    assert base.value > 0
    assert base.error <= 1e-2 * base.value
    assert sum(base.channels.values()) == pytest.approx(base.value)
    # a different internal resolution gives the same number
    other = pair_probability(traj, th, 3 * kc, cones="forward", n_k=9, n_theta=8, n_c=30, max_refine=0)
    assert other.value == pytest.approx(base.value, rel=1e-2)


def test_pair_probability_is_monotone_in_cone_and_cutoff(pulse5):
    traj, kc = pulse5
    th = 0.1 / traj.gamma_max
    kw = dict(cones="forward", max_refine=0)
    base = pair_probability(traj, th, 3 * kc, **kw).value
    assert pair_probability(traj, 1.5 * th, 3 * kc, **kw).value >= base
    assert pair_probability(traj, th, 4 * kc, **kw).value >= base
    assert pair_probability(traj, th, 3 * kc, cones="both", max_refine=0).value >= base


def test_single_photon_full_sphere_matches_dipole_spectrum(slow_traj):
    p = slow_traj.profile
    s = p.delta_t_pulse
    k_min, k_max = 0.05 / s, 6.0 / s
    got = single_photon_probability(slow_traj, 0.5 * math.pi, k_max, k_min=k_min, cones="both")
    a_hat = CONSTANTS.q_over_m * p.E0 * s * math.sqrt(2 * math.pi)
    ref = CONSTANTS.q**2 / (6 * math.pi**2) * a_hat**2 * quad(lambda k: math.exp(-((s * k) ** 2)) / k, k_min, k_max)[0]
    assert got.value == pytest.approx(ref, rel=0.05)


def test_radiated_energy_matches_larmor_formula(slow_traj):
    s = slow_traj.profile.delta_t_pulse
    w, err = radiated_energy(slow_traj, 12.0 / s)
    assert w == pytest.approx(larmor_energy(slow_traj), rel=0.01)
    assert w == pytest.approx(larmor_energy(slow_traj, relativistic=True), rel=0.01)
    assert err < 1e-3 * w


def test_unruh_temperature():
    assert unruh_temperature(0.0) == 0.0
    assert unruh_temperature(CONSTANTS.m) == pytest.approx(81.3e3, rel=1e-3)
    with pytest.raises(ValueError):
        unruh_temperature(-1.0)


def test_static_window_slope_is_minus_one():
    sigma = 1.0
    win = GaussianWindow(sigma)
    zero = lambda t: np.zeros(np.shape(t))  # noqa: E731
    traj = Trajectory.from_velocity(zero, zero, win.support())
    ks = np.geomspace(1e-4, 1e-3, 5)
    amp = [abs(unruh_amplitude(traj, PhotonMode.linear(k, 0.3), PhotonMode.linear(k, 0.3), window=win).value) for k in ks]
    assert np.polyfit(np.log(ks), np.log(amp), 1)[0] == pytest.approx(-1.0, abs=1e-5)


def test_spectral_slope_fit(pulse5):
    traj, kc = pulse5
    fit = spectral_slope(traj, 0.1 / traj.gamma_max, kc / 50, kc / 5, n=6, tail_k=[3 * kc])
    assert fit.quantum_slope == pytest.approx(-2.0, abs=0.3)
    assert fit.larmor_slope == pytest.approx(-1.5, abs=0.2)
    assert fit.tail_suppression[0] > 1
    with pytest.raises(ValueError):
        spectral_slope(traj, 0.01, 2.0, 1.0)


def test_rectangular_doppler_tail():
    t = to_natural(1.0, "as")
    p = PulseProfile("rectangular", math.sqrt(3) / (CONSTANTS.q_over_m * t), t)
    traj = solve_trajectory(p)
    kc = cutoff_wavenumber(traj, p).k_cut
    slope, mag = doppler_tail_slope(traj, 0.0, np.geomspace(10 * kc, 100 * kc, 6))
    assert slope == pytest.approx(-2.0, abs=0.1)
