"""Probing-signal design and demodulation.

A plain sinusoidal dither applied at the actuated boundary would be smeared
by the wave dynamics before reaching the (integrated) map input. The remedy
is motion planning: drive the boundary with S(t) = A*cos(w*D)*sin(w*t),
where A = a*w/sin(w*D), so that the propagated field integrates to exactly
a*sin(w*t) at the map input. The design exists whenever w*D is not an
integer multiple of pi; near those resonances A diverges, so construction is
guarded.

Demodulation multiplies the measured output by (2/a)sin(w*t) for the
gradient estimate and by -(8/a^2)cos(2w*t) for the curvature estimate; over
one dither period their means equal H*(input error) and H respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

try:  # numpy >= 2.0
    from numpy import trapezoid as _trapezoid
except ImportError:  # pragma: no cover
    from numpy import trapz as _trapezoid

RESONANCE_REL_TOL = 1e-8  # guard band, relative to pi/D


@dataclass(frozen=True)
class FrequencyVerdict:
    admissible: bool
    nearest_k: int
    distance: float  # |w - k*pi/D| for the nearest positive integer k


def check_frequency(omega: float, domain_length: float) -> FrequencyVerdict:
    """Reject frequencies within the guard band of a resonance k*pi/D."""
    if not (omega > 0):
        raise ValidationError(f"probe frequency must be positive, got {omega}")
    if not (domain_length > 0):
        raise ValidationError(f"domain length must be positive, got {domain_length}")
    unit = math.pi / domain_length
    k = max(1, round(omega / unit))
    distance = abs(omega - k * unit)
    return FrequencyVerdict(distance > RESONANCE_REL_TOL * unit, k, distance)


@dataclass(frozen=True)
class ProbeDesign:
    """Dither of amplitude a and frequency w over a domain of length D."""

    amplitude: float
    frequency: float
    domain_length: float

    def __post_init__(self):
        if not (self.amplitude > 0):
            raise ValidationError(f"probe amplitude must be positive, got {self.amplitude}")
        verdict = check_frequency(self.frequency, self.domain_length)
        if not verdict.admissible:
            raise ValidationError(
                f"probe frequency {self.frequency:g} is within {verdict.distance:.3e} of the "
                f"resonance k*pi/D with k={verdict.nearest_k}; pick a different frequency"
            )

    @property
    def coefficient(self) -> float:
        """A = a*w/sin(w*D); diverges at resonance, hence the construction guard."""
        return self.amplitude * self.frequency / math.sin(self.frequency * self.domain_length)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.frequency


def beta(design: ProbeDesign, x, t):
    """Propagated dither field A*cos(w*x)*sin(w*t)."""
    w = design.frequency
    return design.coefficient * np.cos(w * x) * np.sin(w * t)


def beta_t(design: ProbeDesign, x, t):
    """Time derivative of the dither field."""
    w = design.frequency
    return design.coefficient * w * np.cos(w * x) * np.cos(w * t)


def beta_x(design: ProbeDesign, x, t):
    """Space derivative of the dither field; vanishes at x = 0 for every t."""
    w = design.frequency
    return -design.coefficient * w * np.sin(w * x) * np.sin(w * t)


def perturbation(design: ProbeDesign, t):
    """Boundary dither S(t) = A*cos(w*D)*sin(w*t) applied at x = D."""
    w = design.frequency
    return design.coefficient * math.cos(w * design.domain_length) * np.sin(w * t)


def series_beta(design: ProbeDesign, x, t, terms: int = 20):
    """Power-series construction of the dither field (test oracle).

    Even-order Taylor coefficients in x follow from the wave equation and the
    zero-slope condition; the partial sum converges to beta() like the cosine
    series of w*x.
    """
    w = design.frequency
    z2 = -((w * np.asarray(x, dtype=float)) ** 2)
    acc = np.zeros_like(z2)
    term = np.ones_like(z2)
    for k in range(terms):
        if k > 0:
            term = term * z2 / ((2 * k - 1) * (2 * k))
        acc = acc + term
    return design.coefficient * acc * np.sin(w * t)


def demod_gradient_signal(amplitude: float, omega: float, t):
    """(2/a)sin(w*t); multiplies the output to estimate the gradient."""
    if not (amplitude > 0):
        raise ValidationError(f"probe amplitude must be positive, got {amplitude}")
    return (2.0 / amplitude) * np.sin(omega * t)


def demod_hessian_signal(amplitude: float, omega: float, t):
    """-(8/a^2)cos(2w*t); multiplies the output to estimate the curvature."""
    if not (amplitude > 0):
        raise ValidationError(f"probe amplitude must be positive, got {amplitude}")
    return -(8.0 / amplitude ** 2) * np.cos(2.0 * omega * t)


def grad_estimate(y, demod):
    return y * demod


def hess_estimate(y, demod):
    return y * demod


def trailing_period_mean(times: np.ndarray, values: np.ndarray, period: float) -> float:
    """Trapezoid mean over exactly one period ending at the last sample.

    The left edge rarely falls on a sample, so it is linearly interpolated.
    Requires the samples to span at least one period.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size != values.size or times.size < 2:
        raise ValidationError("need matching time/value samples, at least two points")
    t0 = times[-1] - period
    if times[0] > t0 + 1e-12 * period:
        raise ValidationError("samples span less than one period")
    j = int(np.searchsorted(times, t0))
    if j == 0:
        tt, vv = times, values
        return float(_trapezoid(vv, tt) / (times[-1] - times[0]))
    v0 = values[j - 1] + (values[j] - values[j - 1]) * (t0 - times[j - 1]) / (times[j] - times[j - 1])
    tt = np.concatenate(([t0], times[j:]))
    vv = np.concatenate(([v0], values[j:]))
    return float(_trapezoid(vv, tt) / period)
