"""Two-photon (Unruh) amplitudes and Larmor coherent-state coefficients.

All values are stored with the quantization volume stripped:
``TwoPhotonAmplitude.value`` is V times the pair amplitude and
``LarmorCoefficient.value`` is sqrt(V) times the coherent-state coefficient.

Both quantities reduce to Fourier integrals along the worldline. With the
coupling switched on and off adiabatically, the retarded-time forms are
integrated by parts,

    int D(tau) exp(i w tau) dtau = (i/w) int D'(tau) exp(i w tau) dtau,

which leaves a compactly supported envelope D' proportional to the field.
The lab-time forms are integrated directly over the pulse window with the
uniform-motion tails added in closed form; they serve as an independent
route for the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from unruhsim.kinematics import Trajectory, retarded_map
from unruhsim.quadrature import OscillatoryIntegralSpec, OscillatoryResult, fourier_integral, integrate_oscillatory
from unruhsim.units import CONSTANTS

__all__ = [
    "PhotonMode",
    "TwoPhotonAmplitude",
    "LarmorCoefficient",
    "GaussianWindow",
    "METHODS",
    "polarization_basis",
    "unruh_amplitude",
    "larmor_coefficient",
    "polarization_pair_matrix",
    "doppler_transform",
    "larmor_transform",
    "pair_direction_weight",
]

METHODS = ("time_domain", "retarded")
_AXIS = np.array([0.0, 0.0, 1.0])


def polarization_basis(khat) -> tuple[np.ndarray, np.ndarray]:
    """Spherical-frame polarizations (theta-hat, phi-hat) about the motion axis z."""
    k = np.asarray(khat, dtype=float)
    n = np.linalg.norm(k)
    if not abs(n - 1.0) < 1e-9:
        raise ValueError(f"khat must be a unit vector, |khat| = {n}")
    kx, ky, kz = k / n
    rho = math.hypot(kx, ky)
    if rho <= 4.0 * np.finfo(float).eps:
        # on the axis: the phi = 0 limit, which keeps e1 x e2 = khat
        return np.array([math.copysign(1.0, kz), 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    cp, sp = kx / rho, ky / rho
    e1 = np.array([kz * cp, kz * sp, -rho])
    e2 = np.array([-sp, cp, 0.0])
    return e1, e2


def _direction(theta: float, phi: float) -> np.ndarray:
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


@dataclass(frozen=True, eq=False)
class PhotonMode:
    """Photon of wavenumber ``k_mag`` along (theta, phi) with polarization ``e_vec``."""

    k_mag: float
    theta: float
    phi: float
    label: str
    e_vec: np.ndarray

    def __post_init__(self):
        if not self.k_mag > 0:
            raise ValueError("k_mag must be positive")
        e = np.asarray(self.e_vec, dtype=complex)
        norm = np.vdot(e, e).real
        if not abs(norm - 1.0) < 1e-9:
            raise ValueError(f"polarization vector must be normalized, e.e* = {norm}")
        object.__setattr__(self, "e_vec", e)

    @property
    def khat(self) -> np.ndarray:
        return _direction(self.theta, self.phi)

    @property
    def kvec(self) -> np.ndarray:
        return self.k_mag * self.khat

    @classmethod
    def linear(cls, k: float, theta: float, phi: float = 0.0, lam: int = 1) -> "PhotonMode":
        e1, e2 = polarization_basis(_direction(theta, phi))
        if lam not in (1, 2):
            raise ValueError("linear polarization label must be 1 or 2")
        return cls(k, theta, phi, str(lam), (e1 if lam == 1 else e2).astype(complex))

    @classmethod
    def circular(cls, k: float, theta: float, phi: float = 0.0, hand: str = "+") -> "PhotonMode":
        e1, e2 = polarization_basis(_direction(theta, phi))
        if hand not in ("+", "-"):
            raise ValueError("circular polarization label must be '+' or '-'")
        s = 1.0 if hand == "+" else -1.0
        return cls(k, theta, phi, hand, (e1 + s * 1j * e2) / math.sqrt(2.0))


@dataclass(frozen=True)
class TwoPhotonAmplitude:
    mode1: PhotonMode
    mode2: PhotonMode
    value: complex
    method: str
    error: float


@dataclass(frozen=True)
class LarmorCoefficient:
    mode: PhotonMode
    value: complex
    method: str
    error: float


@dataclass(frozen=True)
class GaussianWindow:
    """Relative coupling exp(-(t-center)^2 / (2 sigma^2)); a test fixture for static scatterers."""

    sigma: float
    center: float = 0.0

    def __call__(self, t):
        s = (np.asarray(t, dtype=float) - self.center) / self.sigma
        return np.exp(-0.5 * s * s)

    def support(self, rel: float = 1e-16) -> tuple[float, float]:
        half = self.sigma * math.sqrt(2.0 * math.log(1.0 / rel))
        return self.center - half, self.center + half


def pair_direction_weight(kvec1, kvec2, axis=_AXIS) -> float:
    """c_dir = (k + k').axis / (k + k') for a photon pair."""
    k1 = np.asarray(kvec1, dtype=float)
    k2 = np.asarray(kvec2, dtype=float)
    w = float(np.linalg.norm(k1) + np.linalg.norm(k2))
    return float(np.clip(np.dot(k1 + k2, axis) / w, -1.0, 1.0))


def _tol(kw):
    return dict(abs_tol=kw.get("abs_tol", 1e-12), rel_tol=kw.get("rel_tol", 1e-9))


def _lab_time_transform(traj: Trajectory, c: float, omegas, weight, window, **kw):
    """int dt weight(t) exp(i w (t - c z(t))), uniform-motion tails in closed form."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    values = np.empty(omegas.shape, dtype=complex)
    errors = np.empty(omegas.shape)
    if window is None:
        t0, t1 = traj.t_start, traj.t_end
    else:
        t0, t1 = window.support()
    b_max = float(np.max(np.abs(traj.beta_samples)))
    pts = sorted(set(traj.breakpoints) | set(traj.discontinuities))
    for i, w in enumerate(omegas):
        if w == 0.0:
            raise ValueError("lab-time transform needs omega > 0")

        def integrand(t, w=w):
            return weight(t) * np.exp(1j * w * (t - c * traj.z(t)))

        res = integrate_oscillatory(
            integrand,
            0.0,
            t0,
            t1,
            breakpoints=pts,
            max_width=0.5 * math.pi / (w * (1.0 + abs(c) * b_max)),
            **_tol(kw),
        )
        val = complex(res.value)
        if window is None:
            for t_edge, sign in ((t0, 1.0), (t1, -1.0)):
                rate = w * (1.0 - c * float(traj.beta(t_edge)))
                val += sign * complex(integrand(np.array(t_edge))) / (1j * rate)
        values[i] = val
        errors[i] = float(res.error)
    return OscillatoryResult(values, errors, 0)


def _retarded_transform(traj: Trajectory, c: float, omegas, envelope_of_t, window, integrate_by_parts: bool, **kw):
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    rmap = retarded_map(traj, c)
    if window is None:
        t0, t1 = traj.t_start, traj.t_end
    else:
        t0, t1 = window.support()
    tau0, tau1 = float(rmap.tau(t0)), float(rmap.tau(t1))
    disc = tuple(float(rmap.tau(d)) for d in traj.discontinuities if t0 <= d <= t1)
    if window is None:
        disc = tuple(sorted(set(disc) | {tau0, tau1}))

    def envelope(tau):
        return envelope_of_t(rmap.t_of_tau(tau))

    spec = OscillatoryIntegralSpec(envelope, omegas, (tau0, tau1), disc, **_tol(kw))
    res = fourier_integral(spec)
    if not integrate_by_parts:
        return res
    if np.any(omegas == 0.0):
        raise ValueError("retarded transform needs omega > 0")
    return OscillatoryResult(1j / omegas * res.value, res.error / omegas, res.panels)


def doppler_transform(
    traj: Trajectory,
    c_dir: float,
    omegas,
    method: str = "retarded",
    window: Optional[Callable] = None,
    **kw,
) -> OscillatoryResult:
    """int dtau D(tau) exp(i w tau) with D = sqrt(1 - beta^2) / (1 - c_dir beta).

    With ``window`` the integrand is multiplied by the relative coupling
    window(t) instead of relying on adiabatic switching.
    """
    c = float(c_dir)
    if method == "time_domain":
        weight = (lambda t: 1.0 / traj.gamma(t)) if window is None else (lambda t: window(t) / traj.gamma(t))
        return _lab_time_transform(traj, c, omegas, weight, window, **kw)
    if method != "retarded":
        raise ValueError(f"unknown method {method!r}")
    if window is not None:

        def env(t):
            b = traj.beta(t)
            return window(t) / (traj.gamma(t) * (1.0 - c * b))

        return _retarded_transform(traj, c, omegas, env, window, False, **kw)

    def d_doppler(t):
        b = traj.beta(t)
        g = traj.gamma(t)
        return traj.accel_u(t) * (c - b) / (g * g * (1.0 - c * b) ** 3)

    return _retarded_transform(traj, c, omegas, d_doppler, None, True, **kw)


def larmor_transform(traj: Trajectory, cos_theta: float, ks, method: str = "retarded", **kw) -> OscillatoryResult:
    """int dtau beta / (1 - cos_theta beta) exp(i k tau)  (the polarization factor is applied by the caller)."""
    c = float(cos_theta)
    if method == "time_domain":
        return _lab_time_transform(traj, c, ks, traj.beta, None, **kw)
    if method != "retarded":
        raise ValueError(f"unknown method {method!r}")

    def d_env(t):
        b = traj.beta(t)
        g = traj.gamma(t)
        return traj.accel_u(t) / (g**3 * (1.0 - c * b) ** 3)

    return _retarded_transform(traj, c, ks, d_env, None, True, **kw)


def unruh_amplitude(
    traj: Trajectory,
    mode1: PhotonMode,
    mode2: PhotonMode,
    method: str = "retarded",
    *,
    window: Optional[Callable] = None,
    constants=CONSTANTS,
    **kw,
) -> TwoPhotonAmplitude:
    """V times the first-order two-photon amplitude for emission into (mode1, mode2)."""
    k1, k2 = mode1.k_mag, mode2.k_mag
    pol = complex(np.dot(mode1.e_vec, mode2.e_vec))  # unconjugated
    pref = pol * constants.g / (2j * math.sqrt(k1 * k2))
    if pol == 0:
        return TwoPhotonAmplitude(mode1, mode2, 0j, method, 0.0)
    c = pair_direction_weight(mode1.kvec, mode2.kvec, traj.axis)
    res = doppler_transform(traj, c, k1 + k2, method, window, **kw)
    return TwoPhotonAmplitude(mode1, mode2, pref * complex(res.value[0]), method, abs(pref) * float(res.error[0]))


def larmor_coefficient(
    traj: Trajectory, mode: PhotonMode, method: str = "retarded", *, constants=CONSTANTS, **kw
) -> LarmorCoefficient:
    """sqrt(V) times the coherent-state coefficient of Larmor radiation into ``mode``."""
    proj = complex(np.dot(mode.e_vec, traj.axis))
    if proj == 0 or traj.is_static:
        return LarmorCoefficient(mode, 0j, method, 0.0)
    pref = constants.q * proj / math.sqrt(2.0 * mode.k_mag)
    c = float(np.dot(mode.khat, traj.axis))
    res = larmor_transform(traj, c, mode.k_mag, method, **kw)
    return LarmorCoefficient(mode, pref * complex(res.value[0]), method, abs(pref) * float(res.error[0]))


def _basis_vectors(khat, basis: str) -> list[np.ndarray]:
    e1, e2 = polarization_basis(khat)
    if basis == "linear":
        return [e1.astype(complex), e2.astype(complex)]
    if basis == "circular":
        r = 1.0 / math.sqrt(2.0)
        return [r * (e1 + 1j * e2), r * (e1 - 1j * e2)]
    raise ValueError(f"unknown polarization basis {basis!r}")


def polarization_pair_matrix(
    traj: Trajectory,
    k1: tuple[float, float, float],
    k2: tuple[float, float, float],
    basis: str = "linear",
    method: str = "retarded",
    *,
    constants=CONSTANTS,
    **kw,
) -> np.ndarray:
    """2x2 matrix of V-stripped pair amplitudes over polarization labels.

    ``k1`` and ``k2`` are (k, theta, phi). Rows/columns are ordered (1, 2)
    for the linear basis and (+, -) for the circular basis.
    """
    (ka, ta, pa), (kb, tb, pb) = k1, k2
    da, db = _direction(ta, pa), _direction(tb, pb)
    ea, eb = _basis_vectors(da, basis), _basis_vectors(db, basis)
    c = pair_direction_weight(ka * da, kb * db, traj.axis)
    res = doppler_transform(traj, c, ka + kb, method, **kw)
    common = constants.g * complex(res.value[0]) / (2j * math.sqrt(ka * kb))
    pol = np.array([[np.dot(x, y) for y in eb] for x in ea])
    return pol * common
