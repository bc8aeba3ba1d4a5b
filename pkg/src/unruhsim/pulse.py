"""Uni-directional electric field pulses E(t)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import erfc

__all__ = ["PulseProfile", "smooth_ramp", "SHAPES"]

SHAPES = ("gaussian", "rectangular", "smooth_front")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_RAMP_PANELS = 64


def smooth_ramp(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 1.0, 1.0, 0.0)
    inside = (x > 0.0) & (x < 1.0)
    if np.any(inside):
        xi = x[inside]
        # exp(-1/x) / (exp(-1/x) + exp(-1/(1-x))) written without overflow
        d = 1.0 / xi - 1.0 / (1.0 - xi)
        out[inside] = 1.0 / (1.0 + np.exp(np.clip(d, -700.0, 700.0)))
    return out


@dataclass(frozen=True)
class PulseProfile:
    """Electric field pulse along a fixed axis.

    ``delta_t_pulse`` is the standard deviation for ``gaussian`` and the full
    support length for ``rectangular`` and ``smooth_front``. All times and
    fields are in natural units.
    """

    shape: str
    E0: float
    delta_t_pulse: float
    delta_t_rise: float = 0.0
    t_center: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if not self.E0 >= 0.0:
            raise ValueError("E0 must be non-negative")
        if not self.delta_t_pulse > 0.0:
            raise ValueError("delta_t_pulse must be positive")
        if self.shape == "smooth_front" and not (0.0 < self.delta_t_rise <= self.delta_t_pulse):
            raise ValueError("smooth_front needs 0 < delta_t_rise <= delta_t_pulse")

    @property
    def t_start(self) -> float:
        return self.t_center - 0.5 * self.delta_t_pulse

    @property
    def t_end(self) -> float:
        return self.t_center + 0.5 * self.delta_t_pulse

    def field_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            s = (t - self.t_center) / self.delta_t_pulse
            return self.E0 * np.exp(-0.5 * s * s)
        if self.shape == "rectangular":
            return np.where((t >= self.t_start) & (t <= self.t_end), self.E0, 0.0)
        dt = self.delta_t_rise
        return self.E0 * smooth_ramp((t - self.t_start) / dt) * smooth_ramp((self.t_end - t) / dt)

    def support(self, rel: float = 1e-12) -> tuple[float, float]:
        """Interval outside which |E| < rel * E0."""
        if self.shape == "gaussian":
            half = self.delta_t_pulse * math.sqrt(2.0 * math.log(1.0 / rel))
            return self.t_center - half, self.t_center + half
        return self.t_start, self.t_end

    def breakpoints(self) -> tuple[float, ...]:
        """Times where E(t) or its smoothness class changes."""
        if self.shape == "rectangular":
            return (self.t_start, self.t_end)
        if self.shape == "smooth_front":
            dt = self.delta_t_rise
            pts = {self.t_start, self.t_start + dt, self.t_end - dt, self.t_end}
            return tuple(sorted(pts))
        return ()

    def discontinuities(self) -> tuple[float, ...]:
        return (self.t_start, self.t_end) if self.shape == "rectangular" and self.E0 > 0 else ()

    def antiderivative(self, t):
        """Integral of E from -infinity to t."""
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            s = self.delta_t_pulse
            return self.E0 * s * math.sqrt(0.5 * math.pi) * erfc(-(t - self.t_center) / (s * math.sqrt(2.0)))
        if self.shape == "rectangular":
            return self.E0 * np.clip(t - self.t_start, 0.0, self.delta_t_pulse)
        return self._smooth_front_antiderivative(t)

    def field_time_integral(self, t0, t1):
        """Integral of E over [t0, t1]."""
        t0 = np.asarray(t0, dtype=float)
        t1 = np.asarray(t1, dtype=float)
        if np.any(t1 < t0):
            raise ValueError("field_time_integral needs t0 <= t1")
        out = self.antiderivative(t1) - self.antiderivative(t0)
        return np.where(t1 == t0, 0.0, out)

    # smooth_front: cumulative Gauss-Legendre table over fine ramp panels,
    # completed by one local 20-point rule from the nearest node below t.
    @cached_property
    def _ramp_table(self) -> tuple[np.ndarray, np.ndarray]:
        bp = self.breakpoints()
        nodes = np.unique(np.concatenate([np.linspace(a, b, _RAMP_PANELS + 1) for a, b in zip(bp[:-1], bp[1:])]))
        cum = np.concatenate([[0.0], np.cumsum(self._gl_segment(nodes[:-1], nodes[1:]))])
        return nodes, cum

    def _gl_segment(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        pts = mid[..., None] + half[..., None] * _GL_X
        return half * (self.field_at(pts) @ _GL_W)

    def _smooth_front_antiderivative(self, t):
        nodes, cum = self._ramp_table
        tc = np.clip(t, nodes[0], nodes[-1])
        i = np.clip(np.searchsorted(nodes, tc, side="right") - 1, 0, len(nodes) - 1)
        return cum[i] + self._gl_segment(nodes[i], tc)
