"""Euler-Heisenberg vacuum response around a strong background field.

The lowest-order effective Lagrangian is

    L = (E^2 - B^2)/2 + kappa * [(E^2 - B^2)^2 + 7 (E.B)^2],
    kappa = alpha / (90 pi E_S^2).

Linearizing D = dL/dE around a background (E0, B0) gives
D = eps . E + M . B with eps = d2L/dE dE and M = d2L/dE dB. For a plane
wave b = khat x e, so Gauss's law k.D = 0 becomes n.e = 0 with
n = eps^T khat + (M^T khat) x khat. That is the modified transversality
condition used for the corrected polarizations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from unruhsim.radiation import PhotonMode, polarization_basis
from unruhsim.units import CONSTANTS

__all__ = [
    "BackgroundField",
    "PermittivityTensor",
    "CorrectedBasis",
    "eh_lagrangian",
    "eh_coupling",
    "permittivity",
    "response_blocks",
    "forward_leakage",
    "transversality_normal",
    "corrected_polarization",
    "corrected_mode",
]


def eh_coupling(constants=CONSTANTS) -> float:
    """kappa = alpha / (90 pi E_S^2) in natural units."""
    return constants.alpha_qed / (90.0 * math.pi * constants.E_S**2)


def _vec3(v, name):
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be a finite 3-vector")
    return a


@dataclass(frozen=True, eq=False)
class BackgroundField:
    E0_vec: np.ndarray
    B0_vec: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "E0_vec", _vec3(self.E0_vec, "E0_vec"))
        object.__setattr__(self, "B0_vec", _vec3(self.B0_vec, "B0_vec"))

    @property
    def invariant_f(self) -> float:
        """E^2 - B^2."""
        return float(self.E0_vec @ self.E0_vec - self.B0_vec @ self.B0_vec)

    @property
    def invariant_g(self) -> float:
        """E . B."""
        return float(self.E0_vec @ self.B0_vec)


@dataclass(frozen=True, eq=False)
class PermittivityTensor:
    eps: np.ndarray
    background: BackgroundField

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.eps)


def eh_lagrangian(E_vec, B_vec, constants=CONSTANTS) -> float:
    E = _vec3(E_vec, "E_vec")
    B = _vec3(B_vec, "B_vec")
    f = E @ E - B @ B
    g = E @ B
    return float(0.5 * f + eh_coupling(constants) * (f * f + 7.0 * g * g))


def _closed_blocks(bg: BackgroundField, constants):
    kap = eh_coupling(constants)
    E, B = bg.E0_vec, bg.B0_vec
    eye = np.eye(3)
    f, g = bg.invariant_f, bg.invariant_g
    eps = eye + kap * (4.0 * f * eye + 8.0 * np.outer(E, E) + 14.0 * np.outer(B, B))
    m = kap * (-8.0 * np.outer(E, B) + 14.0 * np.outer(B, E) + 14.0 * g * eye)
    return eps, m


def _fd_blocks(bg: BackgroundField, constants, step=None):
    """Central differences of the nonlinear part of L, plus the exact Maxwell part."""
    E, B = bg.E0_vec, bg.B0_vec
    scale = max(float(np.max(np.abs(np.concatenate([E, B])))), constants.E_S)
    h = step if step is not None else 1e-2 * scale
    kap = eh_coupling(constants)

    def quartic(x):
        e, b = x[:3], x[3:]
        f = e @ e - b @ b
        g = e @ b
        return f * f + 7.0 * g * g

    def mixed(i, j, h):
        acc = 0.0
        for si, sj, w in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
            x = x0.copy()
            x[i] += si * h
            x[j] += sj * h
            acc += w * quartic(x)
        return acc / (4.0 * h * h)

    # one Richardson step removes the h^2 term, exact for a quartic
    x0 = np.concatenate([E, B])
    hess = np.empty((6, 6))
    for i in range(6):
        for j in range(6):
            hess[i, j] = (4.0 * mixed(i, j, 0.5 * h) - mixed(i, j, h)) / 3.0
    hess = 0.5 * (hess + hess.T)
    eps = np.eye(3) + kap * hess[:3, :3]
    m = kap * hess[:3, 3:]
    return eps, m


def response_blocks(background: BackgroundField, method: str = "closed", constants=CONSTANTS):
    """(eps, M) with eps_ij = d2L/dE_i dE_j and M_ij = d2L/dE_i dB_j at the background."""
    if method == "closed":
        return _closed_blocks(background, constants)
    if method == "finite_difference":
        return _fd_blocks(background, constants)
    raise ValueError(f"unknown method {method!r}")


def permittivity(background: BackgroundField, method: str = "closed", constants=CONSTANTS) -> PermittivityTensor:
    eps, _ = response_blocks(background, method, constants)
    return PermittivityTensor(0.5 * (eps + eps.T), background)


def _unit(v, name="khat"):
    v = _vec3(v, name)
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValueError(f"{name} must be nonzero")
    return v / n


def forward_leakage(k: float, E0: float, B0: float, *, polarization: str = "electric", constants=CONSTANTS) -> float:
    """k . e for a photon along E0 with B0 perpendicular (closed form).

    ``polarization='electric'`` is the mode with e perpendicular to B0; it
    acquires a longitudinal part (4 alpha / 45 pi) k E0 B0 / E_S^2.
    ``'magnetic'`` (e along B0) keeps its forward blind spot and returns 0.
    Pass scalars: the geometry k || E0 perpendicular to B0 is implied. Use
    :func:`corrected_polarization` for any other geometry.
    """
    for name, v in (("k", k), ("E0", E0), ("B0", B0)):
        if np.ndim(v) != 0:
            raise ValueError(f"{name} must be a scalar magnitude; only k || E0 perpendicular to B0 is supported")
        if not (math.isfinite(v) and v >= 0):
            raise ValueError(f"{name} must be finite and non-negative")
    if polarization == "magnetic":
        return 0.0
    if polarization != "electric":
        raise ValueError(f"unknown polarization {polarization!r}")
    return 4.0 * constants.alpha_qed / (45.0 * math.pi) * k * E0 * B0 / constants.E_S**2


def transversality_normal(khat, background: BackgroundField, *, magnetic: bool = True, method: str = "closed", constants=CONSTANTS):
    """Vector n with n . e = 0 for the corrected polarizations of a wave along khat."""
    kh = _unit(khat)
    eps, m = response_blocks(background, method, constants)
    n = eps.T @ kh
    if magnetic:
        n = n + np.cross(m.T @ kh, kh)
    return n


@dataclass(frozen=True, eq=False)
class CorrectedBasis:
    e1: np.ndarray
    e2: np.ndarray
    normal: np.ndarray
    degenerate: bool

    def longitudinal(self, khat) -> tuple[float, float]:
        kh = _unit(khat)
        return float(kh @ self.e1), float(kh @ self.e2)


def corrected_polarization(
    khat,
    background: BackgroundField,
    *,
    magnetic: bool = True,
    method: str = "closed",
    constants=CONSTANTS,
) -> CorrectedBasis:
    """Polarizations satisfying the linearized Gauss law k . D = 0.

    Each free-space vector is shifted along khat until it is orthogonal to
    the transversality normal, then renormalized. This keeps the labels and
    the continuity in khat of :func:`polarization_basis` and reduces to it
    as the background vanishes. If the normal is (nearly) orthogonal to
    khat the free basis is returned with ``degenerate=True``.
    """
    kh = _unit(khat)
    e1, e2 = polarization_basis(kh)
    n = transversality_normal(kh, background, magnetic=magnetic, method=method, constants=constants)
    nk = float(n @ kh)
    if not abs(nk) > 1e-12 * max(float(np.linalg.norm(n)), 1.0):
        warnings.warn("degenerate transversality condition; using the free polarization basis", RuntimeWarning)
        return CorrectedBasis(e1, e2, n, True)
    out = []
    for e in (e1, e2):
        v = e - (n @ e) / nk * kh
        out.append(v / np.linalg.norm(v))
    return CorrectedBasis(out[0], out[1], n, False)


def corrected_mode(k: float, theta: float, phi: float, background: BackgroundField, lam: int = 1, **kw) -> PhotonMode:
    """Linear photon mode with the background-corrected polarization vector."""
    free = PhotonMode.linear(k, theta, phi, lam)
    basis = corrected_polarization(free.khat, background, **kw)
    e = basis.e1 if lam == 1 else basis.e2
    return PhotonMode(k, theta, phi, f"{lam}*", e.astype(complex))
