"""Adaptive Filon-Legendre quadrature for integrals of envelope(tau) * exp(i*omega*tau).

Each panel carries an n-point Gauss-Legendre sample of the envelope. The
samples are projected onto Legendre polynomials and the oscillatory factor
is integrated exactly against them using

    int_{-1}^{1} P_l(x) exp(i*theta*x) dx = 2 i^l j_l(theta),

so the only discretization error is the polynomial interpolation error of
the envelope. That error is estimated from the trailing Legendre
coefficients and driven below tolerance by bisection. Panels never span
more than pi/2 of phase and never straddle a listed discontinuity.

Many frequencies share one panel layout, so an envelope is sampled once
for a whole spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_legendre, spherical_jn

__all__ = [
    "ConvergenceError",
    "OscillatoryIntegralSpec",
    "OscillatoryResult",
    "fourier_integral",
    "integrate_oscillatory",
]

_ORDER = 20
_EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """Tolerance not reached within the panel budget."""

    def __init__(self, message, value, error):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class OscillatoryIntegralSpec:
    envelope: Callable[[np.ndarray], np.ndarray]
    omega: float | np.ndarray
    domain: tuple[float, float]
    discontinuities: tuple[float, ...] = ()
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_panels: int = 200_000

    def __post_init__(self):
        a, b = self.domain
        if not (math.isfinite(a) and math.isfinite(b) and a <= b):
            raise ValueError(f"domain must be a finite interval, got {self.domain}")
        if np.any(np.asarray(self.omega) < 0):
            raise ValueError("omega must be non-negative")
        for d in self.discontinuities:
            if not a <= d <= b:
                raise ValueError(f"discontinuity {d} lies outside the domain")


@dataclass(frozen=True)
class OscillatoryResult:
    value: complex | np.ndarray
    error: float | np.ndarray
    panels: int


class _Rule:
    def __init__(self, n: int):
        self.n = n
        self.x, self.w = np.polynomial.legendre.leggauss(n)
        ell = np.arange(n)
        # Legendre coefficients of the interpolant: c = f @ proj
        self.proj = (self.w[:, None] * eval_legendre(ell[None, :], self.x[:, None])) * (ell + 0.5)
        self.phase = 2.0 * (1j) ** ell


_RULES: dict[int, _Rule] = {}


def _rule(n: int) -> _Rule:
    if n not in _RULES:
        _RULES[n] = _Rule(n)
    return _RULES[n]


def _spherical_jn_all(n: int, x: np.ndarray) -> np.ndarray:
    """j_0 .. j_{n-1} at x, stacked on a new leading axis.

    Panels never exceed pi/4 of half-phase, where the power series
    converges in a few terms; larger arguments go to scipy.
    """
    out = np.empty((n,) + x.shape)
    small = np.abs(x) <= 1.0
    xs = np.where(small, x, 0.0)
    x2 = -0.5 * xs * xs
    pw = np.ones_like(xs)
    dfact = 1.0
    for ell in range(n):
        if ell:
            dfact *= 2 * ell + 1
            pw = pw * xs
        s = np.ones_like(xs)
        for k in range(10, 0, -1):
            s = 1.0 + s * x2 / (k * (2 * ell + 2 * k + 1))
        out[ell] = pw / dfact * s
    if not np.all(small):
        big = ~small
        for ell in range(n):
            out[ell][big] = spherical_jn(ell, x[big])
    return out


def _panel_values(coef, mid, half, omegas, rule, chunk=1 << 20):
    """Exact integral of each panel's Legendre interpolant times exp(i*omega*tau), summed over panels."""
    out = np.zeros(omegas.shape, dtype=complex)
    step = max(1, chunk // max(1, len(mid)))
    for s in range(0, omegas.size, step):
        w = omegas[s : s + step]
        theta = half[:, None] * w[None, :]
        jn = _spherical_jn_all(rule.n, theta)
        acc = np.einsum("pl,lpw->pw", coef * rule.phase, jn)
        out[s : s + step] = np.sum(half[:, None] * np.exp(1j * mid[:, None] * w[None, :]) * acc, axis=0)
    return out


def integrate_oscillatory(
    envelope: Callable[[np.ndarray], np.ndarray],
    omega,
    a: float,
    b: float,
    *,
    breakpoints: Sequence[float] = (),
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-9,
    max_width: float | None = None,
    max_panels: int = 200_000,
    order: int = _ORDER,
) -> OscillatoryResult:
    """Integrate envelope(tau) * exp(i*omega*tau) over [a, b] for one or many omega.

    ``abs_tol`` is measured relative to the L1 norm of the envelope, so the
    same tolerance is meaningful whatever units the envelope carries. The
    returned error is an estimate of the absolute error per frequency.
    """
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    scalar = np.ndim(omega) == 0
    if np.any(omegas < 0):
        raise ValueError("omega must be non-negative")
    rule = _rule(order)
    if b <= a:
        z = np.zeros(omegas.shape, dtype=complex)
        e = np.zeros(omegas.shape)
        return OscillatoryResult(z[0] if scalar else z, e[0] if scalar else e, 0)

    cuts = sorted({float(a), float(b), *(float(p) for p in breakpoints if a < p < b)})
    w_max = float(np.max(omegas)) if omegas.size else 0.0
    edges = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        length = hi - lo
        n = 8  # enough nodes that no feature of the envelope slips between them
        if w_max > 0:
            n = max(n, math.ceil(length * w_max / (0.5 * math.pi)))
        if max_width:
            n = max(n, math.ceil(length / max_width))
        edges.append(np.linspace(lo, hi, n + 1))
    lo_e = np.concatenate([e[:-1] for e in edges])
    hi_e = np.concatenate([e[1:] for e in edges])

    done_val = np.zeros(omegas.shape, dtype=complex)
    done_err = 0.0
    done_round = 0.0
    done_l1 = 0.0
    done_count = 0
    active_lo, active_hi = lo_e, hi_e

    while True:
        mid = 0.5 * (active_lo + active_hi)
        half = 0.5 * (active_hi - active_lo)
        f = np.asarray(envelope(mid[:, None] + half[:, None] * rule.x[None, :]))
        f = np.broadcast_to(f, (len(mid), rule.n))
        absf = np.abs(f)
        coef = f @ rule.proj
        tail = np.abs(coef[:, -1]) + np.abs(coef[:, -2]) + np.abs(coef[:, -3])
        fmax = np.max(absf, axis=1)
        noise = 64.0 * _EPS * np.maximum(fmax, 1e-300)
        trunc = np.where(tail > noise, 2.0 * half * tail, 0.0)
        rnd = 2.0 * half * noise
        l1 = half * (absf @ rule.w)
        p_lo, p_hi, p_coef, p_mid, p_half = active_lo, active_hi, coef, mid, half
        p_trunc, p_rnd, p_l1 = trunc, rnd, l1
        p_sum = _panel_values(coef, mid, half, omegas, rule)
        total = done_val + p_sum
        scale = done_l1 + p_l1.sum()
        trunc_total = done_err + p_trunc.sum()
        tol = np.maximum(abs_tol * scale, rel_tol * np.abs(total))
        target = float(np.min(tol)) if tol.size else 0.0
        n_panels = done_count + len(p_lo)
        if trunc_total <= target:
            err = trunc_total + done_round + p_rnd.sum() + 0.0 * tol
            break
        if n_panels > max_panels:
            err = trunc_total + done_round + p_rnd.sum() + 0.0 * tol
            raise ConvergenceError(
                f"oscillatory quadrature did not converge in {max_panels} panels "
                f"(error {trunc_total:.3g} > target {target:.3g})",
                total[0] if scalar else total,
                err[0] if scalar else err,
            )
        span = float(b - a)
        share = target * (p_hi - p_lo) / span
        split = p_trunc > share
        if not np.any(split):
            split = p_trunc >= np.max(p_trunc)
        keep = ~split
        # finished panels are folded into running totals
        if np.all(keep):
            done_val = done_val + p_sum
        elif np.any(keep):
            done_val = done_val + _panel_values(p_coef[keep], p_mid[keep], p_half[keep], omegas, rule)
        done_err += p_trunc[keep].sum()
        done_round += p_rnd[keep].sum()
        done_l1 += p_l1[keep].sum()
        done_count += int(keep.sum())
        s_lo, s_hi = p_lo[split], p_hi[split]
        s_mid = 0.5 * (s_lo + s_hi)
        active_lo = np.concatenate([s_lo, s_mid])
        active_hi = np.concatenate([s_mid, s_hi])

    return OscillatoryResult(total[0] if scalar else total, err[0] if scalar else err, n_panels)


def fourier_integral(spec: OscillatoryIntegralSpec) -> OscillatoryResult:
    """Integral of spec.envelope(tau) * exp(i*omega*tau) over spec.domain.

    The domain is taken as the whole support: the envelope must be
    negligible (below 1e-9 of its peak) at ends that are not listed
    discontinuities.
    """
    a, b = map(float, spec.domain)
    probe = np.linspace(a, b, 257)
    vals = np.abs(np.asarray(spec.envelope(probe)))
    vals = np.broadcast_to(vals, probe.shape)
    peak = float(np.max(vals)) if vals.size else 0.0
    disc = set(spec.discontinuities)
    if peak > 0:
        for end, v in ((a, vals[0]), (b, vals[-1])):
            if end not in disc and v > 1e-9 * peak:
                raise ValueError(f"envelope not negligible at domain end {end:g} ({v / peak:.2e} of peak)")
    return integrate_oscillatory(
        spec.envelope,
        spec.omega,
        a,
        b,
        breakpoints=spec.discontinuities,
        abs_tol=spec.abs_tol,
        rel_tol=spec.rel_tol,
        max_panels=spec.max_panels,
    )
