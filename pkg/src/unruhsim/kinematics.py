"""1D relativistic worldline of the electron and the retarded-time map.

The proper velocity u = gamma*beta follows from the exact first integral of
d(u)/dt = (q/m) E(t), so there is no ODE stepping error in u. Position z(t)
is obtained by Gauss-Legendre quadrature of beta between stored samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from unruhsim.pulse import PulseProfile
from unruhsim.units import CONSTANTS

__all__ = [
    "ConfigurationError",
    "Trajectory",
    "RetardedTimeMap",
    "CutoffEstimate",
    "solve_trajectory",
    "retarded_map",
    "cutoff_wavenumber",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class ConfigurationError(ValueError):
    """Simulation setup is inconsistent (e.g. window too small for the pulse)."""


def _beta_from_u(u):
    return u / np.sqrt(1.0 + u * u)


def _gamma_from_u(u):
    return np.sqrt(1.0 + u * u)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Worldline along ``axis``; evaluators are vectorized over time.

    Outside ``[t_start, t_end]`` the motion is taken as uniform with the
    velocity reached at the window edge.
    """

    u_of_t: Callable[[np.ndarray], np.ndarray]
    du_dt: Callable[[np.ndarray], np.ndarray]
    t_start: float
    t_end: float
    t: np.ndarray
    z_samples: np.ndarray
    breakpoints: tuple[float, ...] = ()
    discontinuities: tuple[float, ...] = ()
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    profile: Optional[PulseProfile] = None

    @property
    def u0(self) -> float:
        return float(self.u_of_t(np.array(self.t_start)))

    @property
    def beta_samples(self) -> np.ndarray:
        return _beta_from_u(self.u_of_t(self.t))

    @property
    def gamma_samples(self) -> np.ndarray:
        return _gamma_from_u(self.u_of_t(self.t))

    @property
    def gamma_max(self) -> float:
        return float(np.max(self.gamma_samples))

    @property
    def samples(self) -> np.ndarray:
        """Rows of (t, z, beta, gamma)."""
        u = self.u_of_t(self.t)
        return np.column_stack([self.t, self.z_samples, _beta_from_u(u), _gamma_from_u(u)])

    @property
    def is_static(self) -> bool:
        return bool(np.all(self.u_of_t(self.t) == 0.0))

    def _clipped(self, t):
        return np.clip(np.asarray(t, dtype=float), self.t_start, self.t_end)

    def u(self, t):
        return self.u_of_t(self._clipped(t))

    def beta(self, t):
        return _beta_from_u(self.u(t))

    def gamma(self, t):
        return _gamma_from_u(self.u(t))

    def accel_u(self, t):
        """d(gamma*beta)/dt; zero outside the window."""
        t = np.asarray(t, dtype=float)
        inside = (t >= self.t_start) & (t <= self.t_end)
        return np.where(inside, self.du_dt(self._clipped(t)), 0.0)

    def z(self, t):
        t = np.asarray(t, dtype=float)
        tc = self._clipped(t)
        i = np.clip(np.searchsorted(self.t, tc, side="right") - 1, 0, len(self.t) - 1)
        z = self.z_samples[i] + _integrate_beta(self.u_of_t, self.t[i], tc)
        # uniform motion outside the window
        z = z + np.where(t < self.t_start, (t - self.t_start) * self.beta(self.t_start), 0.0)
        z = z + np.where(t > self.t_end, (t - self.t_end) * self.beta(self.t_end), 0.0)
        return z

    @classmethod
    def from_velocity(
        cls,
        u_of_t,
        du_dt,
        window: tuple[float, float],
        *,
        breakpoints=(),
        discontinuities=(),
        spacing: Optional[float] = None,
        min_samples: int = 2001,
        profile: Optional[PulseProfile] = None,
    ) -> "Trajectory":
        """Build a trajectory from a proper-velocity function u(t) and its derivative."""
        t0, t1 = map(float, window)
        if not t1 > t0:
            raise ConfigurationError("empty trajectory window")
        n = min_samples
        if spacing is not None and spacing > 0:
            n = max(n, int(math.ceil((t1 - t0) / spacing)) + 1)
        grid = np.linspace(t0, t1, n)
        extra = np.array([b for b in breakpoints if t0 < b < t1], dtype=float)
        if extra.size:
            # drop uniform nodes that nearly coincide with a breakpoint
            gap = 1e-6 * (t1 - t0) / n
            near = np.min(np.abs(grid[:, None] - extra[None, :]), axis=1) < gap
            near[[0, -1]] = False
            grid = np.unique(np.concatenate([grid[~near], extra]))
        dz = _integrate_beta(u_of_t, grid[:-1], grid[1:])
        z = np.concatenate([[0.0], np.cumsum(dz)])
        return cls(
            u_of_t=u_of_t,
            du_dt=du_dt,
            t_start=t0,
            t_end=t1,
            t=grid,
            z_samples=z,
            breakpoints=tuple(b for b in breakpoints if t0 <= b <= t1),
            discontinuities=tuple(b for b in discontinuities if t0 <= b <= t1),
            profile=profile,
        )


def _integrate_beta(u_of_t, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    pts = (0.5 * (a + b))[..., None] + half[..., None] * _GL_X
    return half * (_beta_from_u(u_of_t(pts)) @ _GL_W)


def solve_trajectory(
    profile: PulseProfile,
    u0: float = 0.0,
    window: Optional[tuple[float, float]] = None,
    *,
    k_max: Optional[float] = None,
    samples_per_period: int = 40,
    min_samples: int = 2001,
    constants=CONSTANTS,
) -> Trajectory:
    """Worldline of an electron with initial proper velocity ``u0`` in ``profile``.

    ``k_max`` is the largest photon wavenumber that will be requested
    downstream; the sample table then holds at least ``samples_per_period``
    points per period 2*pi/k_max.
    """
    qm = constants.q_over_m
    if window is None:
        window = profile.support(1e-12)
    t0, t1 = map(float, window)
    if profile.E0 > 0:
        lo, hi = profile.support(1e-12)
        slack = 1e-9 * (hi - lo)
        if t0 > lo + slack or t1 < hi - slack:
            edge = float(np.max(profile.field_at(np.array([t0, t1]))))
            raise ConfigurationError(
                f"trajectory window [{t0:g}, {t1:g}] cuts the pulse (|E|/E0 = {edge / profile.E0:.3g} at an edge)"
            )
    a_start = float(profile.antiderivative(t0))

    def u_of_t(t):
        return u0 + qm * (profile.antiderivative(t) - a_start)

    def du_dt(t):
        return qm * profile.field_at(t)

    spacing = None
    if k_max is not None and k_max > 0:
        spacing = 2.0 * math.pi / (k_max * samples_per_period)
    return Trajectory.from_velocity(
        u_of_t,
        du_dt,
        (t0, t1),
        breakpoints=profile.breakpoints(),
        discontinuities=profile.discontinuities(),
        spacing=spacing,
        min_samples=min_samples,
        profile=profile,
    )


@dataclass(frozen=True, eq=False)
class RetardedTimeMap:
    """tau(t) = t - c_dir * z(t), strictly increasing for |c_dir| <= 1."""

    trajectory: Trajectory
    c_dir: float
    t_table: np.ndarray
    tau_table: np.ndarray

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.tau_table) > 0))

    def tau(self, t):
        return np.asarray(t, dtype=float) - self.c_dir * self.trajectory.z(t)

    def dtau_dt(self, t):
        return 1.0 - self.c_dir * self.trajectory.beta(t)

    def dt_dtau(self, tau):
        return 1.0 / self.dtau_dt(self.t_of_tau(tau))

    def t_of_tau(self, tau, *, rtol: float = 1e-15, max_iter: int = 60):
        """Inverse map via safeguarded Newton iteration inside table brackets."""
        tau = np.asarray(tau, dtype=float)
        scalar = tau.ndim == 0
        tau = np.atleast_1d(tau)
        tt, ta = self.t_table, self.tau_table
        traj = self.trajectory
        out = np.empty_like(tau)

        left = tau <= ta[0]
        right = tau >= ta[-1]
        out[left] = tt[0] + (tau[left] - ta[0]) / (1.0 - self.c_dir * traj.beta(tt[0]))
        out[right] = tt[-1] + (tau[right] - ta[-1]) / (1.0 - self.c_dir * traj.beta(tt[-1]))
        mid = ~(left | right)
        if np.any(mid):
            tm = tau[mid]
            i = np.clip(np.searchsorted(ta, tm, side="right") - 1, 0, len(ta) - 2)
            lo, hi = tt[i].copy(), tt[i + 1].copy()
            t = self._guess(tm)
            t = np.clip(t, lo, hi)
            scale = max(abs(tt[0]), abs(tt[-1]), tt[-1] - tt[0])
            for _ in range(max_iter):
                f = t - self.c_dir * traj.z(t) - tm
                lo = np.where(f < 0, t, lo)
                hi = np.where(f > 0, t, hi)
                step = f / (1.0 - self.c_dir * traj.beta(t))
                t_new = t - step
                bad = (t_new <= lo) | (t_new >= hi)
                t_new = np.where(bad, 0.5 * (lo + hi), t_new)
                done = np.abs(t_new - t) <= rtol * scale
                t = t_new
                if np.all(done):
                    break
            out[mid] = t
        return out[0] if scalar else out

    @cached_property
    def _guess(self):
        return PchipInterpolator(self.tau_table, self.t_table, extrapolate=True)


def retarded_map(traj: Trajectory, c_dir: float) -> RetardedTimeMap:
    c_dir = float(c_dir)
    if abs(c_dir) > 1.0:
        raise ValueError(f"|c_dir| must not exceed 1, got {c_dir}")
    tau = traj.t - c_dir * traj.z_samples
    return RetardedTimeMap(traj, c_dir, traj.t, tau)


class CutoffEstimate(NamedTuple):
    k_cut: float  # gamma_max^2 / delta_t
    k_cut_alt: float  # gamma_max * q E0 / m


def cutoff_wavenumber(traj: Trajectory, profile: PulseProfile, constants=CONSTANTS) -> CutoffEstimate:
    """Order-of-magnitude emission cutoff; used for grid sizing and scaling checks."""
    gm = traj.gamma_max
    return CutoffEstimate(gm * gm / profile.delta_t_pulse, gm * constants.q_over_m * profile.E0)
