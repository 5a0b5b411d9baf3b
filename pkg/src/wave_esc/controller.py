"""Boundary controllers: ideal full-state law, averaged law, and the
real-time filtered law.

The ideal law U = kbar*Z - c0*int(u_t) needs the true curvature inside kbar
and the unmeasurable integrated error inside Z. The real-time variant
replaces both with demodulated estimates and passes the result through a
first-order low-pass (corner frequency c) so the command is a state variable.

Two practical elements make the demodulated law usable at moderate dither
frequencies (they are classical adaptive-control practice, and both reduce
to the textbook law as the dither frequency grows):

* the gradient/curvature estimates entering the law are trailing one-period
  means of the demodulated products, not the raw products — the raw products
  carry zero-mean ripple proportional to (8/a^2)*|y| that, multiplied by the
  bracket term, destabilizes the loop long before averaging can act;
* the curvature estimate is projected onto a sign-definite band
  [-hess_max, -hess_min] (the curvature is known negative a priori), which
  bounds the effective decay rate while the estimate converges.

Both behaviors can be disabled with raw_estimates=True to reproduce the
unstable literal law in experiments.

The integral identity int g(y)*u_t dy = D*theta_hat - Theta + a*sin(w t)
(integration by parts, using g(D)=0, g'(0)=0, g''=-1, the zero-slope end and
the boundary trace of the error field) lets the bracket be assembled from
measurable scalars only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .backstepping import BacksteppingGains, transform_z
from .errors import ControllerBlowupError, ValidationError
from .probing import (ProbeDesign, demod_gradient_signal, demod_hessian_signal,
                      perturbation)
from .wave_field import Grid, spatial_integral

HESS_PROJECTION = (0.01, 15.0)  # magnitude band for the projected curvature estimate


def _empty() -> np.ndarray:
    return np.empty(0, dtype=float)


@dataclass(frozen=True)
class ControllerState:
    """Integrator theta_hat, filter output u_cmd, and the demodulation history.

    The controller never sees the map parameters: gain, c0, the filter corner
    and the domain length are its only constants.
    """

    gain: float                 # K > 0 (zero allowed: adaptation off)
    c0: float
    corner_freq: float          # filter corner c > 0
    domain_length: float
    theta_hat: float = 0.0
    u_cmd: float = 0.0
    t: float = 0.0
    warm_periods: float = 1.0
    hess_bounds: tuple = HESS_PROJECTION
    raw_estimates: bool = False
    hist_t: np.ndarray = field(default_factory=_empty, repr=False)
    hist_g: np.ndarray = field(default_factory=_empty, repr=False)
    hist_h: np.ndarray = field(default_factory=_empty, repr=False)

    def __post_init__(self):
        if not (self.corner_freq > 0):
            raise ValidationError(f"filter corner must be positive, got {self.corner_freq}")
        if self.gain < 0:
            raise ValidationError(f"controller gain must be nonnegative, got {self.gain}")
        if not np.isfinite(self.u_cmd):
            raise ValidationError("filter state is not finite")


@dataclass(frozen=True)
class Measurements:
    """Sensor bundle consumed by the real-time law at one instant."""

    y: float                 # map output
    Theta: float             # integrated (distributed) map input
    u_field: np.ndarray      # error-field velocity on the grid
    u_t_field: np.ndarray    # error-field acceleration on the grid
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.y) and np.isfinite(self.Theta)):
            raise ValidationError("scalar measurements are not finite")
        if not (np.isfinite(self.u_field).all() and np.isfinite(self.u_t_field).all()):
            raise ValidationError("field measurements are not finite")


def ideal_control(vartheta: float, u: np.ndarray, u_t: np.ndarray, grid: Grid,
                  gains: BacksteppingGains) -> float:
    """Full-state law: kbar*Z - c0*int(u_t)."""
    z = transform_z(vartheta, u, u_t, grid, gains)
    return float(gains.kbar * z - gains.c0 * spatial_integral(u_t, grid))


def average_control(vartheta_av: float, u_av: np.ndarray, u_t_av: np.ndarray, grid: Grid,
                    gains: BacksteppingGains) -> float:
    """Averaged law: gain*(H*vartheta) + gain*H*[bracket] - c0*int(u_t).

    With the averaged estimates substituted (mean gradient product =
    H*vartheta, mean curvature product = H) this is algebraically the ideal
    law with kbar = gain*H, so it delegates to it; the identity is exact,
    not approximate.
    """
    return ideal_control(vartheta_av, u_av, u_t_av, grid, gains)


def filter_step(u_cmd: float, target: float, corner_freq: float, dt: float) -> float:
    """Exact exponential step of du/dt = -c*(u - target) with target held over dt."""
    return target + (u_cmd - target) * math.exp(-corner_freq * dt)


def boundary_input(state: ControllerState, probe: ProbeDesign, t: float) -> float:
    """Actuated-end displacement: integrator value plus the boundary dither."""
    return float(state.theta_hat + perturbation(probe, t))


def _window_mean(times: np.ndarray, values: np.ndarray, period: float) -> float:
    """Trapezoid mean over [t_end - period, t_end] with an interpolated left
    edge; assumes uniformly spaced samples (the sampled control loop)."""
    t0 = times[-1] - period
    j = int(np.searchsorted(times, t0))
    if j == 0:
        j = 1
    dt = times[1] - times[0]
    v0 = values[j - 1] + (values[j] - values[j - 1]) * (t0 - times[j - 1]) / dt
    body = values[j:]
    integral = (times[j] - t0) * 0.5 * (v0 + values[j]) \
        + dt * (body.sum() - 0.5 * (body[0] + body[-1]))
    return float(integral / period)


def _estimates(state: ControllerState, probe: ProbeDesign, g_raw: float, h_raw: float):
    """Trailing one-period means with curvature projection (or the raw products)."""
    if state.raw_estimates:
        return g_raw, h_raw, state.hist_t, state.hist_g, state.hist_h
    # keep one sample beyond the window start so the left edge can be interpolated
    j = int(np.searchsorted(state.hist_t, state.t - probe.period))
    keep = slice(max(0, j - 1), None)
    hist_t = np.append(state.hist_t[keep], state.t)
    hist_g = np.append(state.hist_g[keep], g_raw)
    hist_h = np.append(state.hist_h[keep], h_raw)
    if state.t >= state.warm_periods * probe.period and hist_t[-1] - hist_t[0] >= probe.period:
        g_est = _window_mean(hist_t, hist_g, probe.period)
        h_est = _window_mean(hist_t, hist_h, probe.period)
        lo, hi = state.hess_bounds
        h_est = min(-lo, max(-hi, h_est))
    else:
        g_est, h_est = 0.0, 0.0  # estimator warm-up: not one full period of data yet
    return g_est, h_est, hist_t, hist_g, hist_h


def filtered_control_step(state: ControllerState, meas: Measurements, probe: ProbeDesign,
                          dt: float) -> ControllerState:
    """One sample step of the real-time law.

    Demodulates the output, forms the measurable bracket
    B = D*c0*int(u) + D*theta_hat - Theta + a*sin(w t), filters the target
    gain*G + gain*H_est*B - c0*int(u_t) through the exact exponential update,
    then advances the integrator with the new command.
    """
    grid = Grid(state.domain_length, np.asarray(meas.u_field).size)
    a, w = probe.amplitude, probe.frequency
    t = meas.t

    g_raw = float(demod_gradient_signal(a, w, t) * meas.y)
    h_raw = float(demod_hessian_signal(a, w, t) * meas.y)
    g_est, h_est, hist_t, hist_g, hist_h = _estimates(state, probe, g_raw, h_raw)

    int_u = spatial_integral(meas.u_field, grid)
    int_ut = spatial_integral(meas.u_t_field, grid)
    bracket = (state.domain_length * state.c0 * int_u
               + state.domain_length * state.theta_hat - meas.Theta + a * math.sin(w * t))
    target = state.gain * g_est + state.gain * h_est * bracket - state.c0 * int_ut

    if not np.isfinite(target):
        raise ControllerBlowupError(
            "controller target went non-finite",
            components={"grad_est": g_est, "hess_est": h_est, "bracket": bracket,
                        "int_u": int_u, "int_u_t": int_ut, "y": meas.y, "t": t},
        )
    u_cmd = filter_step(state.u_cmd, target, state.corner_freq, dt)
    theta_hat = state.theta_hat + dt * u_cmd
    if not (np.isfinite(u_cmd) and np.isfinite(theta_hat)):
        raise ControllerBlowupError(
            "controller state went non-finite",
            components={"u_cmd": u_cmd, "theta_hat": theta_hat, "target": target, "t": t},
        )
    return replace(state, theta_hat=theta_hat, u_cmd=u_cmd, t=t + dt,
                   hist_t=hist_t, hist_g=hist_g, hist_h=hist_h)
