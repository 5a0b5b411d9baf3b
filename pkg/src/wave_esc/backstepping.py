"""Compensation kernels, state transformations, and stability functionals.

The error system (scalar integrated error plus a wave field driven at x = D)
is mapped by an invertible change of variables onto a transparent target
system: a scalar that decays at rate lam and a wave field with a dissipative
end at x = 0 and a pinned end at x = D. Two kernels do the work: the
polynomial weight g(y) = (D^2 - y^2)/2 (zero slope at 0, zero value at D,
curvature -1) and the exponential kernel gamma(x) solving gamma'' = lam^2 *
gamma with a mixed condition at 0 and gamma(D) = kbar.

Everything here is a pure function of immutable snapshots; the module also
provides the trajectory-level residual report used to machine-check that a
simulated run actually lands on the target system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigError, KernelSingularityError, ValidationError
from .wave_field import Grid, spatial_integral

LAMBDA_GUARD_TOL = 1e-9   # absolute guard on the degenerate decay rate (c0 > 1 only)
DENOM_EVAL_TOL = 1e-12    # kernel denominator magnitude floor at evaluation time


@dataclass(frozen=True)
class BacksteppingGains:
    """Coupling c0, effective gain kbar < 0, decay rate lam = -D*kbar, ratio r.

    Build through the factories, which validate; the plain constructor is raw
    (used by tests to reach the evaluation-time guards).
    """

    c0: float
    kbar: float
    domain_length: float
    gain: float | None = None  # K, when kbar was formed as K*(curvature)

    @property
    def lam(self) -> float:
        return -self.domain_length * self.kbar

    @property
    def r(self) -> float:
        return (1.0 + self.c0) / (1.0 - self.c0)

    @classmethod
    def from_kbar(cls, kbar: float, c0: float, domain_length: float,
                  gain: float | None = None) -> "BacksteppingGains":
        if not (domain_length > 0):
            raise ConfigError(f"domain length must be positive, got {domain_length}")
        if not (c0 > 0):
            raise ConfigError(f"coupling c0 must be positive, got {c0}")
        if abs(c0 - 1.0) < 1e-9:
            raise ConfigError("coupling c0 = 1 makes the kernel ratio r undefined")
        if not (kbar < 0):
            raise ConfigError(f"effective gain must be negative, got {kbar}")
        g = cls(c0, kbar, domain_length, gain)
        if c0 > 1.0:
            # for c0 > 1 one decay rate makes the kernel denominator vanish
            lam_bad = math.log((1.0 + c0) / (c0 - 1.0)) / (2.0 * domain_length)
            if abs(g.lam - lam_bad) < LAMBDA_GUARD_TOL:
                raise KernelSingularityError(
                    f"decay rate {g.lam:g} hits the degenerate value {lam_bad:g} for c0={c0:g}"
                )
        if abs(_gamma_denominator_scaled(g)) < 1e-9:
            raise KernelSingularityError(
                f"kernel denominator is numerically zero for c0={c0:g}, kbar={kbar:g}"
            )
        return g

    @classmethod
    def from_map_gain(cls, gain: float, hessian: float, c0: float,
                      domain_length: float) -> "BacksteppingGains":
        """Effective gain kbar = gain * hessian (hessian < 0, gain > 0)."""
        if not (gain > 0):
            raise ConfigError(f"controller gain must be positive, got {gain}")
        return cls.from_kbar(gain * hessian, c0, domain_length, gain=gain)


@dataclass(frozen=True)
class LyapunovConfig:
    """Cross-term weight for the energy functional; must be small enough
    that the functional stays positive definite."""

    delta: float = 0.05

    def __post_init__(self):
        if not (self.delta > 0):
            raise ConfigError(f"cross-term weight must be positive, got {self.delta}")


def g_kernel(y, domain_length: float):
    """(D^2 - y^2)/2."""
    return (domain_length ** 2 - np.asarray(y, dtype=float) ** 2) / 2.0


def g_kernel_prime(y, domain_length: float):
    """-y (so the slope at the actuated end is -D)."""
    del domain_length
    return -np.asarray(y, dtype=float)


def _gamma_denominator_scaled(gains: BacksteppingGains) -> float:
    """Kernel denominator with e^{lam D} factored out (overflow-free for lam > 0)."""
    lam, r, D = gains.lam, gains.r, gains.domain_length
    return 1.0 + r * math.exp(-2.0 * lam * D)


def gamma_kernel(gains: BacksteppingGains, x):
    """kbar * (e^{lam x} + r e^{-lam x}) / (e^{lam D} + r e^{-lam D}).

    Evaluated with e^{lam D} factored out of both numerator and denominator,
    which keeps every exponent nonpositive on [0, D].
    """
    denom = _gamma_denominator_scaled(gains)
    if abs(denom) < DENOM_EVAL_TOL:
        raise KernelSingularityError(f"kernel denominator {denom:g} below {DENOM_EVAL_TOL:g}")
    lam, r, D = gains.lam, gains.r, gains.domain_length
    x = np.asarray(x, dtype=float)
    return gains.kbar * (np.exp(lam * (x - D)) + r * np.exp(-lam * (x + D))) / denom


def gamma_kernel_prime(gains: BacksteppingGains, x):
    """Exact x-derivative of the exponential kernel."""
    denom = _gamma_denominator_scaled(gains)
    if abs(denom) < DENOM_EVAL_TOL:
        raise KernelSingularityError(f"kernel denominator {denom:g} below {DENOM_EVAL_TOL:g}")
    lam, r, D = gains.lam, gains.r, gains.domain_length
    x = np.asarray(x, dtype=float)
    return gains.kbar * lam * (np.exp(lam * (x - D)) - r * np.exp(-lam * (x + D))) / denom


def transform_z(vartheta: float, u: np.ndarray, u_t: np.ndarray, grid: Grid,
                gains: BacksteppingGains) -> float:
    """Scalar target state: vartheta + D*c0*int(u) + int(g*u_t)."""
    D, c0 = gains.domain_length, gains.c0
    g = g_kernel(grid.nodes, D)
    return float(vartheta + D * c0 * spatial_integral(u, grid)
                 + spatial_integral(g * np.asarray(u_t, dtype=float), grid))


def transform_w(u: np.ndarray, u_t: np.ndarray, z: float, grid: Grid,
                gains: BacksteppingGains) -> np.ndarray:
    """Field target state: w(x) = u(x) - gamma(x)*z + c0 * int_0^x u_t."""
    u = np.asarray(u, dtype=float)
    u_t = np.asarray(u_t, dtype=float)
    cum = cumulative_trapezoid(u_t, dx=grid.dx, initial=0.0)
    return u - gamma_kernel(gains, grid.nodes) * z + gains.c0 * cum


def transform_w_time_derivative(u: np.ndarray, u_t: np.ndarray, z: float, grid: Grid,
                                gains: BacksteppingGains) -> np.ndarray:
    """dw/dt along trajectories: u_t + lam*gamma(x)*z + c0 * du/dx."""
    u = np.asarray(u, dtype=float)
    ux = np.gradient(u, grid.dx, edge_order=2)
    return np.asarray(u_t, dtype=float) + gains.lam * gamma_kernel(gains, grid.nodes) * z \
        + gains.c0 * ux


def inverse_transform_u(w: np.ndarray, u_t: np.ndarray, z: float, grid: Grid,
                        gains: BacksteppingGains) -> np.ndarray:
    """Recover u from (w, z) and the field velocity: u = w + gamma*z - c0 * int_0^x u_t."""
    cum = cumulative_trapezoid(np.asarray(u_t, dtype=float), dx=grid.dx, initial=0.0)
    return np.asarray(w, dtype=float) + gamma_kernel(gains, grid.nodes) * z - gains.c0 * cum


def lyapunov_functional(z: float, w: np.ndarray, w_t: np.ndarray, grid: Grid,
                        cfg: LyapunovConfig) -> float:
    """z^2/2 + (|w_x|^2 + |w_t|^2)/2 + delta * int (y-2) w_x w_t dy.

    Raises if the computed value is negative: the cross-term weight is then
    too large for positive definiteness.
    """
    w = np.asarray(w, dtype=float)
    w_t = np.asarray(w_t, dtype=float)
    wx = np.gradient(w, grid.dx, edge_order=2)
    quad = 0.5 * (spatial_integral(wx ** 2, grid) + spatial_integral(w_t ** 2, grid))
    cross = spatial_integral((grid.nodes - 2.0) * wx * w_t, grid)
    value = 0.5 * z ** 2 + quad + cfg.delta * cross
    if value < 0:
        raise ConfigError(
            f"energy functional went negative ({value:g}); decrease the cross-term "
            f"weight (delta={cfg.delta:g})"
        )
    return float(value)


def probe_delta_positive_definite(cfg: LyapunovConfig, grid: Grid, trials: int = 100,
                                  seed: int = 0) -> None:
    """Random-field check that the functional dominates a quarter of the field energy."""
    rng = np.random.default_rng(seed)
    x = grid.nodes
    for _ in range(trials):
        coef = rng.normal(size=4)
        w = sum(c * np.cos((k + 1) * np.pi * x / grid.domain_length) for k, c in enumerate(coef))
        w_t = sum(c * np.sin((k + 1) * np.pi * x / grid.domain_length)
                  for k, c in enumerate(rng.normal(size=4)))
        wx = np.gradient(w, grid.dx, edge_order=2)
        floor = 0.25 * (spatial_integral(wx ** 2, grid) + spatial_integral(w_t ** 2, grid))
        if lyapunov_functional(0.0, w, w_t, grid, cfg) < floor:
            raise ConfigError(
                f"cross-term weight delta={cfg.delta:g} is too large: the energy functional "
                "fails to dominate a quarter of the field energy"
            )


def omega_norm(vartheta: float, u: np.ndarray, u_t: np.ndarray, grid: Grid) -> float:
    """|vartheta|^2 + |u_x|^2 + |u_t|^2 (squared-norm stability measure)."""
    u = np.asarray(u, dtype=float)
    ux = np.gradient(u, grid.dx, edge_order=2)
    return float(vartheta ** 2 + spatial_integral(ux ** 2, grid)
                 + spatial_integral(np.asarray(u_t, dtype=float) ** 2, grid))


@dataclass(frozen=True)
class TargetResiduals:
    """Normalized sup residuals of the target-system equations along a trajectory.

    ode:       |dz/dt + lam*z|          / (lam * sup|z|)
    neumann:   |w_x(0) - c0*w_t(0)|     / sup|w_x|
    dirichlet: |w(D)|                   / sup|w|
    wave:      |w_tt - w_xx| (interior) / sup|w_xx|

    The wave residual is evaluated on stencil-clean core nodes (two nodes in
    from each boundary): the boundary-adjacent stencils mix in the endpoint
    closures and are not a test of the interior equation.
    """

    ode: float
    neumann: float
    dirichlet: float
    wave: float

    def as_dict(self):
        return {"ode": self.ode, "neumann": self.neumann,
                "dirichlet": self.dirichlet, "wave": self.wave}

    def max(self) -> float:
        return max(self.ode, self.neumann, self.dirichlet, self.wave)


def target_residuals(times: np.ndarray, z: np.ndarray, w_snapshots: np.ndarray,
                     grid: Grid, gains: BacksteppingGains) -> TargetResiduals:
    """Check a recorded trajectory against the target dynamics.

    Expects uniformly spaced snapshot times and w_snapshots of shape
    (len(times), grid.node_count). All derivatives are central differences.
    """
    times = np.asarray(times, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w_snapshots, dtype=float)
    if w.shape != (times.size, grid.node_count):
        raise ValidationError("snapshot array shape does not match times/grid")
    if times.size < 5:
        raise ValidationError("need at least five snapshots for residual estimates")
    dts = np.diff(times)
    dt = float(dts[0])
    if not np.allclose(dts, dt, rtol=1e-9, atol=0.0):
        raise ValidationError("snapshots must be uniformly spaced in time")
    dx = grid.dx
    eps = 1e-300

    zdot = np.gradient(z, dt, edge_order=2)
    ode = float(np.max(np.abs(zdot + gains.lam * z)) / (gains.lam * np.max(np.abs(z)) + eps))

    wx_all = np.gradient(w, dx, axis=1, edge_order=2)
    wx0 = (-3.0 * w[:, 0] + 4.0 * w[:, 1] - w[:, 2]) / (2.0 * dx)
    wt0 = np.gradient(w[:, 0], dt, edge_order=2)
    neumann = float(np.max(np.abs(wx0 - gains.c0 * wt0)) / (np.max(np.abs(wx_all)) + eps))

    dirichlet = float(np.max(np.abs(w[:, -1])) / (np.max(np.abs(w)) + eps))

    core = slice(2, -2)
    wtt = (w[2:, core] - 2.0 * w[1:-1, core] + w[:-2, core]) / dt ** 2
    wxx = (w[1:-1, 3:-1] - 2.0 * w[1:-1, core] + w[1:-1, 1:-3]) / dx ** 2
    wave = float(np.max(np.abs(wtt - wxx)) / (np.max(np.abs(wxx)) + eps))

    return TargetResiduals(ode, neumann, dirichlet, wave)
