"""Observables built from the amplitudes: maps, cones, probabilities, scaling fits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from unruhsim.kinematics import Trajectory
from unruhsim.quadrature import ConvergenceError
from unruhsim.radiation import PhotonMode, doppler_transform, larmor_transform
from unruhsim.units import CONSTANTS

__all__ = [
    "SpectralMap",
    "DominationCone",
    "PairProbability",
    "PhotonYield",
    "SlopeFit",
    "spectral_map",
    "polar_theta_grid",
    "domination_angle",
    "pair_probability",
    "single_photon_probability",
    "radiated_energy",
    "larmor_energy",
    "unruh_temperature",
    "spectral_slope",
    "doppler_tail_slope",
]

PAIRINGS = ("parallel", "back_to_back")
POLARIZATIONS = ("theta", "phi")
_POL_LABEL = {"theta": 1, "phi": 2}


@dataclass
class SpectralMap:
    """Quantum |V A| and classical |sqrt(V) alpha|*|sqrt(V) alpha'| over a (theta, k) grid.

    Arrays are indexed [i_theta, i_k]. ``resolved`` marks cells where both
    Fourier integrals sit well above their error estimates.
    """

    k: np.ndarray
    theta: np.ndarray
    quantum: np.ndarray
    classical: np.ndarray
    quantum_error: np.ndarray
    classical_error: np.ndarray
    resolved: np.ndarray
    failed: np.ndarray
    pairing: str
    polarization: str
    metadata: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.classical > 0, self.quantum / self.classical, np.inf)


@dataclass
class DominationCone:
    k_ref: float
    theta_max: Optional[float]
    direction: str
    residual: float
    crossed: bool
    theta_samples: np.ndarray
    ratio_samples: np.ndarray


@dataclass
class PairProbability:
    value: float
    theta_max: float
    k_max: float
    cones: str
    error: float
    channels: dict


@dataclass
class PhotonYield:
    value: float
    error: float
    k_min: float
    k_max: float


@dataclass
class SlopeFit:
    k: np.ndarray
    quantum: np.ndarray
    larmor: np.ndarray
    quantum_slope: float
    larmor_slope: float
    quantum_residual: float
    larmor_residual: float
    tail_k: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tail_suppression: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _pair_geometry(theta: float, phi: float, pairing: str, polarization: str):
    lam = _POL_LABEL[polarization]
    m1 = PhotonMode.linear(1.0, theta, phi, lam)
    if pairing == "parallel":
        m2 = m1
    elif pairing == "back_to_back":
        m2 = PhotonMode.linear(1.0, math.pi - theta, phi + math.pi, lam)
    else:
        raise ValueError(f"unknown pairing rule {pairing!r}")
    c_pair = 0.5 * float(np.dot(m1.khat + m2.khat, [0.0, 0.0, 1.0]))
    pol = abs(complex(np.dot(m1.e_vec, m2.e_vec)))
    return m1, m2, c_pair, pol


def _map_row(traj, k, theta, phi, pairing, polarization, constants, tol):
    q, g = constants.q, constants.g
    m1, m2, c_pair, pol = _pair_geometry(theta, phi, pairing, polarization)
    fd = doppler_transform(traj, c_pair, 2.0 * k, **tol)
    quantum = pol * g * np.abs(fd.value) / (2.0 * k)
    quantum_err = pol * g * fd.error / (2.0 * k)
    ok = np.abs(fd.value) > 100.0 * fd.error

    def larmor(mode):
        proj = abs(complex(mode.e_vec[2]))
        if proj == 0.0:
            return np.zeros_like(k), np.zeros_like(k), np.ones(k.shape, bool)
        fl = larmor_transform(traj, float(mode.khat[2]), k, **tol)
        pref = q * proj / np.sqrt(2.0 * k)
        return pref * np.abs(fl.value), pref * fl.error, np.abs(fl.value) > 100.0 * fl.error

    a1, e1, ok1 = larmor(m1)
    if pairing == "parallel":
        a2, e2, ok2 = a1, e1, ok1
    else:
        a2, e2, ok2 = larmor(m2)
    classical = a1 * a2
    classical_err = a1 * e2 + a2 * e1 + e1 * e2
    if traj.is_static:
        ok1 = ok2 = np.ones(k.shape, bool)
    return quantum, classical, quantum_err, classical_err, ok & ok1 & ok2


def polar_theta_grid(n: int) -> np.ndarray:
    """n angles on [0, pi] including both poles, quadratically clustered toward them.

    The domination cones are narrow, so a uniform grid would put at most a
    point or two inside them. The grid is symmetric under theta -> pi - theta.
    """
    if n < 2:
        raise ValueError("need at least two angles")
    half = n // 2
    h = 0.5 * math.pi * (np.arange(half) / half) ** 2
    mid = [0.5 * math.pi] if n % 2 else []
    return np.concatenate([h, mid, math.pi - h[::-1]])


def spectral_map(
    traj: Trajectory,
    k_grid,
    theta_grid,
    pairing: str = "parallel",
    polarization: str = "theta",
    *,
    phi: float = 0.0,
    threads: int = 1,
    constants=CONSTANTS,
    **tol,
) -> SpectralMap:
    """Evaluate both amplitude layers with k' = k on every (theta, k) cell.

    Rows are independent and may run on a thread pool; failed rows are
    flagged and left as NaN rather than aborting the map.
    """
    k = np.asarray(k_grid, dtype=float)
    theta = np.asarray(theta_grid, dtype=float)
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing rule {pairing!r}")
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unknown polarization rule {polarization!r}")
    for name, arr in (("k", k), ("theta", theta)):
        if arr.ndim != 1 or arr.size == 0 or np.any(np.diff(arr) <= 0):
            raise ValueError(f"{name} grid must be non-empty and strictly increasing")
    if np.any(k <= 0):
        raise ValueError("k grid must be positive")

    shape = (theta.size, k.size)
    out = {n: np.full(shape, np.nan) for n in ("q", "c", "qe", "ce")}
    resolved = np.zeros(shape, bool)
    failed = np.zeros(shape, bool)

    def row(i):
        try:
            return i, _map_row(traj, k, float(theta[i]), phi, pairing, polarization, constants, tol)
        except ConvergenceError:
            return i, None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(row, range(theta.size)))
    else:
        results = [row(i) for i in range(theta.size)]
    for i, res in results:
        if res is None:
            failed[i] = True
            continue
        out["q"][i], out["c"][i], out["qe"][i], out["ce"][i], resolved[i] = res

    meta = {
        "gamma_max": traj.gamma_max,
        "t_start": traj.t_start,
        "t_end": traj.t_end,
        "phi": phi,
    }
    return SpectralMap(k, theta, out["q"], out["c"], out["qe"], out["ce"], resolved, failed, pairing, polarization, meta)


def _ratio_on_ray(traj, k_ref, theta, direction, constants, tol):
    t = theta if direction == "forward" else math.pi - theta
    c = math.cos(t)
    fd = doppler_transform(traj, c, 2.0 * k_ref, **tol)
    fl = larmor_transform(traj, c, k_ref, **tol)
    quantum = abs(complex(fd.value[0])) / constants.m
    classical = math.sin(t) ** 2 * abs(complex(fl.value[0])) ** 2
    return quantum / classical if classical > 0 else math.inf


def domination_angle(
    traj: Trajectory,
    k_ref: float,
    direction: str = "forward",
    *,
    theta_min: float = 1e-5,
    n_scan: int = 48,
    rtol: float = 1e-4,
    constants=CONSTANTS,
    **tol,
) -> DominationCone:
    """Angle from the axis where |V A| = |sqrt(V) alpha|^2 for k = k' = k_ref.

    Parallel photons with the theta-hat polarization, so e.e' = 1. The ray
    is scanned on a log grid in (theta_min, pi/2) and the first crossing is
    refined by bracketing root search on log(ratio).
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    thetas = np.geomspace(theta_min, 0.5 * math.pi * (1 - 1e-9), n_scan)
    ratios = np.array([_ratio_on_ray(traj, k_ref, th, direction, constants, tol) for th in thetas])
    above = ratios > 1.0
    idx = np.nonzero(above[:-1] & ~above[1:])[0]
    if not above[0] or idx.size == 0:
        return DominationCone(k_ref, None, direction, math.nan, False, thetas, ratios)
    i = int(idx[0])

    def f(lt):
        return math.log(_ratio_on_ray(traj, k_ref, math.exp(lt), direction, constants, tol))

    lt, info = brentq(f, math.log(thetas[i]), math.log(thetas[i + 1]), xtol=rtol * 0.1, full_output=True)
    theta_max = math.exp(lt)
    residual = abs(f(lt))
    return DominationCone(k_ref, theta_max, direction, residual, True, thetas, ratios)


def _gl_panels(edges, n):
    x, w = np.polynomial.legendre.leggauss(n)
    lo, hi = np.asarray(edges[:-1]), np.asarray(edges[1:])
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (lo + hi))[:, None] + half[:, None] * x
    weights = half[:, None] * w
    return nodes.ravel(), weights.ravel()


def _cone_intervals(theta_max, cones):
    out = []
    if cones in ("forward", "both"):
        out.append(("F", 0.0, theta_max))
    if cones in ("backward", "both"):
        out.append(("B", math.pi - theta_max, math.pi))
    if not out:
        raise ValueError(f"unknown cone selection {cones!r}")
    return out


_K_EDGES = np.array([0.0, 1 / 64, 1 / 16, 1 / 8, 1 / 4, 3 / 8, 1 / 2, 3 / 4, 1.0])


def _spline_gather(spline: CubicSpline, x, col):
    """Evaluate column ``col[i]`` of a vector-valued spline at ``x[i]``."""
    bp = spline.x
    i = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, bp.size - 2)
    dx = x - bp[i]
    c = spline.c
    return ((c[0, i, col] * dx + c[1, i, col]) * dx + c[2, i, col]) * dx + c[3, i, col]


def _doppler_table(traj, c_nodes, omega, n_w, tol):
    """|F_D(omega, c)|^2 on c_nodes x omega, interpolating omega^2 |F_D|^2 in log(omega)."""
    w_lo, w_hi = float(np.min(omega)), float(np.max(omega))
    grid = np.geomspace(w_lo, w_hi, n_w) if w_hi > w_lo else np.array([w_lo])
    table = np.empty((c_nodes.size, omega.size))
    for j, c in enumerate(c_nodes):
        fd = doppler_transform(traj, float(c), grid, **tol)
        y = grid**2 * np.abs(fd.value) ** 2
        if grid.size > 1:
            y = CubicSpline(np.log(grid), y)(np.log(omega))
        else:
            y = np.full(omega.shape, y[0])
        table[j] = np.maximum(y, 0.0) / omega**2
    return table


def _pair_integral(traj, theta_max, k_max, cones, n_k, n_theta, n_c, constants, tol):
    k, wk = _gl_panels(k_max * _K_EDGES, n_k)
    omega = k[:, None] + k[None, :]
    uniq, inv = np.unique(omega.ravel(), return_inverse=True)
    inv = inv.reshape(omega.shape)
    kk = k[:, None] * k[None, :] * wk[:, None] * wk[None, :]

    intervals = _cone_intervals(theta_max, cones)
    angles = {name: _gl_panels(np.array([lo, hi]), n_theta) for name, lo, hi in intervals}
    cos_all = np.concatenate([np.cos(a[0]) for a in angles.values()])
    c_lo, c_hi = float(np.min(cos_all)), float(np.max(cos_all))
    # Chebyshev-clustered c nodes resolve the sharp Doppler peak near |c| -> 1
    s = np.linspace(0.0, 1.0, n_c)
    c_nodes = np.unique(c_lo + (c_hi - c_lo) * 0.5 * (1.0 - np.cos(math.pi * s)))
    table = _doppler_table(traj, c_nodes, uniq, 8 * n_c, tol)
    spline = CubicSpline(c_nodes, table, axis=0) if c_nodes.size > 1 else None

    channels = dict.fromkeys(_CHANNELS, 0.0)
    for n1, _, _ in intervals:
        th1, w1 = angles[n1]
        for n2, _, _ in intervals:
            th2, w2 = angles[n2]
            cb, sb = np.cos(th2), np.sin(th2)
            col = np.broadcast_to(inv[:, :, None], (k.size, k.size, cb.size)).ravel()
            for a in range(th1.size):
                ca, sa = math.cos(th1[a]), math.sin(th1[a])
                c_dir = (k[:, None, None] * ca + k[None, :, None] * cb[None, None, :]) / omega[:, :, None]
                c_dir = np.clip(c_dir, c_lo, c_hi)
                if spline is None:
                    f2 = table[0][col].reshape(c_dir.shape)
                else:
                    f2 = _spline_gather(spline, c_dir.ravel(), col).reshape(c_dir.shape)
                f2 = np.maximum(f2, 0.0)
                ang = w1[a] * sa * w2 * sb * np.einsum("ij,ijb->b", kk, f2)
                # azimuthal averages of |e_l . e'_l'|^2 for theta-hat / phi-hat
                channels["theta-theta"] += float(np.sum(ang * (0.5 * ca**2 * cb**2 + sa**2 * sb**2)))
                channels["theta-phi"] += float(np.sum(ang * 0.5 * ca**2))
                channels["phi-theta"] += float(np.sum(ang * 0.5 * cb**2))
                channels["phi-phi"] += float(np.sum(ang * 0.5))
    norm = constants.g**2 / (4.0 * (2.0 * math.pi) ** 4)
    return {key: norm * v for key, v in channels.items()}


_CHANNELS = ("theta-theta", "theta-phi", "phi-theta", "phi-phi")


def pair_probability(
    traj: Trajectory,
    theta_max: float,
    k_max: float,
    *,
    cones: str = "both",
    rel_tol: float = 1e-2,
    n_k: int = 6,
    n_theta: int = 6,
    n_c: int = 24,
    max_refine: int = 3,
    constants=CONSTANTS,
    **tol,
) -> PairProbability:
    """Probability of emitting a photon pair with both photons inside the cone(s).

    The double mode sum becomes (V/(2 pi)^3)^2 int d^3k d^3k', which cancels
    the 1/V^2 of |A|^2. Azimuthal symmetry of the 1D source leaves a 4D
    integral over (k, k', theta, theta'), evaluated with composite
    Gauss-Legendre rules; resolution is raised until two successive
    estimates agree to ``rel_tol``.
    """
    if not 0 < theta_max <= 0.5 * math.pi:
        raise ValueError("theta_max must lie in (0, pi/2]")
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    if traj.is_static:
        return PairProbability(0.0, theta_max, k_max, cones, 0.0, dict.fromkeys(_CHANNELS, 0.0))
    prev = _pair_integral(traj, theta_max, k_max, cones, n_k, n_theta, n_c, constants, tol)
    err = math.inf
    for _ in range(max_refine):
        n_k, n_theta, n_c = n_k + 4, n_theta + 3, (3 * n_c) // 2
        cur = _pair_integral(traj, theta_max, k_max, cones, n_k, n_theta, n_c, constants, tol)
        total, total_prev = sum(cur.values()), sum(prev.values())
        err = abs(total - total_prev)
        prev = cur
        if err <= rel_tol * abs(total):
            break
    return PairProbability(sum(prev.values()), theta_max, k_max, cones, err, prev)


def _photon_integral(traj, theta_ranges, k_lo, k_hi, power, n_k, n_theta, constants, tol, log_k):
    """q^2/(8 pi^2) int k^power dk int sin^3 |F_L|^2 dtheta over the given ranges."""
    if log_k:
        n_pan = max(1, int(math.ceil(math.log(k_hi / k_lo) / math.log(4.0))))
        lk, wl = _gl_panels(np.linspace(math.log(k_lo), math.log(k_hi), n_pan + 1), n_k)
        k = np.exp(lk)
        wk = wl * k
    else:
        k, wk = _gl_panels(k_hi * _K_EDGES, n_k)
    total = 0.0
    for lo, hi in theta_ranges:
        th, wt = _gl_panels(np.linspace(lo, hi, 5), n_theta)
        for t, w in zip(th, wt):
            fl = larmor_transform(traj, math.cos(t), k, **tol)
            total += w * math.sin(t) ** 3 * float(np.sum(wk * k**power * np.abs(fl.value) ** 2))
    return constants.q**2 / (8.0 * math.pi**2) * total


def _refined(fn, n_k, n_theta, rel_tol, max_refine):
    prev = fn(n_k, n_theta)
    err = math.inf
    for _ in range(max_refine):
        n_k, n_theta = n_k + 4, n_theta + 4
        cur = fn(n_k, n_theta)
        err = abs(cur - prev)
        prev = cur
        if err <= rel_tol * abs(cur):
            break
    return prev, err


def single_photon_probability(
    traj: Trajectory,
    theta_max: float,
    k_max: float,
    *,
    k_min: Optional[float] = None,
    cones: str = "both",
    rel_tol: float = 1e-3,
    constants=CONSTANTS,
    **tol,
) -> PhotonYield:
    """Mean number of Larmor photons inside the cone(s) with k_min < k < k_max.

    The soft-photon number diverges logarithmically, so a lower cutoff is
    required; it defaults to k_max / 1000.
    """
    if k_min is None:
        k_min = 1e-3 * k_max
    if not 0 < k_min < k_max:
        raise ValueError("need 0 < k_min < k_max")
    if traj.is_static:
        return PhotonYield(0.0, 0.0, k_min, k_max)
    ranges = [(lo, hi) for _, lo, hi in _cone_intervals(theta_max, cones)]

    def fn(n_k, n_theta):
        return _photon_integral(traj, ranges, k_min, k_max, 1, n_k, n_theta, constants, tol, True)

    value, err = _refined(fn, 8, 6, rel_tol, 3)
    return PhotonYield(value, err, k_min, k_max)


def radiated_energy(
    traj: Trajectory, k_max: float, *, rel_tol: float = 1e-4, constants=CONSTANTS, **tol
) -> tuple[float, float]:
    """Total Larmor energy sum_modes k |alpha|^2 over the full sphere up to k_max."""

    def fn(n_k, n_theta):
        return _photon_integral(traj, [(0.0, math.pi)], 0.0, k_max, 2, n_k, n_theta, constants, tol, False)

    return _refined(fn, 8, 8, rel_tol, 3)


def larmor_energy(traj: Trajectory, *, relativistic: bool = False, constants=CONSTANTS) -> float:
    """(q^2 / 6 pi) int a^2 dt with a = d(beta)/dt (times gamma^6 if relativistic)."""
    x, w = np.polynomial.legendre.leggauss(16)
    t = traj.t
    half = 0.5 * np.diff(t)
    pts = (0.5 * (t[:-1] + t[1:]))[:, None] + half[:, None] * x
    g = traj.gamma(pts)
    a = traj.accel_u(pts) / g**3
    if relativistic:
        a = a * g**3
    return constants.q**2 / (6.0 * math.pi) * float(np.sum(half * ((a * a) @ w)))


def unruh_temperature(acceleration: float) -> float:
    """T = a / (2 pi) in natural units (proper acceleration a in eV)."""
    if acceleration < 0:
        raise ValueError("acceleration must be non-negative")
    return acceleration / (2.0 * math.pi)


def _fit(logk, logv):
    coef, res, *_ = np.polyfit(logk, logv, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(logk)) if len(res) else 0.0
    return coef, rms


def spectral_slope(
    traj: Trajectory,
    theta: float,
    k_lo: float,
    k_hi: float,
    *,
    n: int = 10,
    tail_k=None,
    constants=CONSTANTS,
    **tol,
) -> SlopeFit:
    """Log-log slopes of |V A| (k = k', parallel) and |sqrt(V) alpha| along a ray.

    If ``tail_k`` is given, also returns how far the quantum amplitude there
    falls below the extrapolated power law (a ratio > 1 means faster decay).
    """
    if not 0 < k_lo < k_hi:
        raise ValueError("need 0 < k_lo < k_hi")
    k = np.geomspace(k_lo, k_hi, n)
    c = math.cos(theta)
    fd = doppler_transform(traj, c, 2.0 * k, **tol)
    fl = larmor_transform(traj, c, k, **tol)
    quantum = constants.g * np.abs(fd.value) / (2.0 * k)
    larmor = constants.q * math.sin(theta) * np.abs(fl.value) / np.sqrt(2.0 * k)
    if np.any(quantum <= 0) or np.any(larmor <= 0):
        raise ValueError("amplitude vanishes on the fit range; slope undefined")
    cq, rq = _fit(np.log(k), np.log(quantum))
    cl, rl = _fit(np.log(k), np.log(larmor))
    fit = SlopeFit(k, quantum, larmor, float(cq[0]), float(cl[0]), rq, rl)
    if tail_k is not None:
        kt = np.atleast_1d(np.asarray(tail_k, dtype=float))
        ft = doppler_transform(traj, c, 2.0 * kt, **tol)
        qt = constants.g * np.abs(ft.value) / (2.0 * kt)
        fit.tail_k = kt
        fit.tail_suppression = np.exp(np.polyval(cq, np.log(kt))) / qt
    return fit


def doppler_tail_slope(traj: Trajectory, c_dir: float, omegas, **tol) -> tuple[float, np.ndarray]:
    """Log-log slope of the Doppler-factor transform |int D exp(i w tau) dtau| over ``omegas``."""
    w = np.asarray(omegas, dtype=float)
    fd = doppler_transform(traj, c_dir, w, **tol)
    mag = np.abs(fd.value)
    coef, _ = _fit(np.log(w), np.log(mag))
    return float(coef[0]), mag
