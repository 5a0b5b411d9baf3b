"""Unit-speed wave equation on [0, D] with a free (zero-slope) end at x = 0
and a displacement-actuated end at x = D.

Discretization
--------------
Uniform grid, standard 3-point Laplacian, velocity-Verlet time stepping
(kick - drift - kick), default dt = dx/2. The zero-slope condition at x = 0
is built into the Laplacian through a mirror ghost node; the actuated end is
overwritten with the supplied boundary value after every step, and its
velocity is reconstructed by second-order backward differencing of the
boundary history. The scheme is symplectic and second order; the discrete
(trapezoid-weighted) energy of the undriven problem is conserved to O(dt^2)
with no secular drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BlowupError, ConfigError, ValidationError


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid with nodes x_i = i*dx, x_0 = 0, x_{N-1} = D."""

    domain_length: float
    node_count: int

    def __post_init__(self):
        if not (self.domain_length > 0):
            raise ConfigError(f"domain length must be positive, got {self.domain_length}")
        if self.node_count < 3:
            raise ConfigError(f"need at least 3 grid nodes, got {self.node_count}")

    @property
    def dx(self) -> float:
        return self.domain_length / (self.node_count - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, self.domain_length, self.node_count)
        x.flags.writeable = False
        return x


@dataclass(frozen=True)
class WaveField:
    """Immutable snapshot of (displacement, velocity) at time t.

    prev_boundary holds the actuated-end displacement one step earlier; it
    feeds the 3-point backward difference for the boundary velocity.
    """

    grid: Grid
    displacement: np.ndarray
    velocity: np.ndarray
    t: float = 0.0
    step_index: int = 0
    prev_boundary: float | None = None


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float).copy()
    a.flags.writeable = False
    return a


def init_field(grid: Grid, displacement0, velocity0) -> WaveField:
    """Field at t = 0 with the given initial data."""
    a0 = np.asarray(displacement0, dtype=float)
    v0 = np.asarray(velocity0, dtype=float)
    if a0.shape != (grid.node_count,) or v0.shape != (grid.node_count,):
        raise ConfigError(
            f"initial data shape {a0.shape}/{v0.shape} does not match grid size {grid.node_count}"
        )
    if not (np.isfinite(a0).all() and np.isfinite(v0).all()):
        raise ValidationError("initial field data contains non-finite entries")
    return WaveField(grid, _freeze(a0), _freeze(v0))


def second_difference(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Second x-derivative estimate, O(dx^2) in the interior.

    Node 0 uses the mirror ghost (valid for fields with zero slope at x = 0);
    the last node uses the 4-point one-sided formula.
    """
    f = np.asarray(values, dtype=float)
    if f.shape != (grid.node_count,):
        raise ValidationError(f"array length {f.shape} does not match grid size {grid.node_count}")
    dx2 = grid.dx ** 2
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / dx2
    out[0] = 2.0 * (f[1] - f[0]) / dx2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / dx2
    return out


def step(field: WaveField, boundary_value: float, dt: float) -> WaveField:
    """Advance the field by dt with the actuated end pinned to boundary_value.

    boundary_value is the displacement at x = D at the END of the step, so
    field.displacement[-1] == boundary_value holds afterwards (exactly).
    Requires dt <= dx (unit wave speed).
    """
    grid = field.grid
    dx = grid.dx
    if not np.isfinite(boundary_value):
        raise ValidationError("boundary value is not finite")
    if dt > dx * (1.0 + 1e-12):
        raise ConfigError(f"CFL violation: dt={dt:g} exceeds dx={dx:g}")

    alpha, vel = field.displacement, field.velocity
    with np.errstate(over="ignore", invalid="ignore"):
        v_half = vel + 0.5 * dt * second_difference(alpha, grid)
        a_new = alpha + dt * v_half
        p_old = alpha[-1]
        a_new[-1] = boundary_value
        v_new = v_half + 0.5 * dt * second_difference(a_new, grid)
        if field.prev_boundary is None:
            v_new[-1] = (boundary_value - p_old) / dt
        else:
            v_new[-1] = (3.0 * boundary_value - 4.0 * p_old + field.prev_boundary) / (2.0 * dt)

    idx = field.step_index + 1
    if not (np.isfinite(a_new).all() and np.isfinite(v_new).all()):
        raise BlowupError("wave field went non-finite", step_index=idx)
    return WaveField(grid, _freeze(a_new), _freeze(v_new), field.t + dt, idx, p_old)


def spatial_integral(values: np.ndarray, grid: Grid) -> float:
    """Composite-trapezoid integral of nodal values over [0, D]."""
    f = np.asarray(values, dtype=float)
    if f.shape != (grid.node_count,):
        raise ValidationError(f"array length {f.shape} does not match grid size {grid.node_count}")
    return float(0.5 * grid.dx * (2.0 * f.sum() - f[0] - f[-1]))


def distributed_output(field: WaveField) -> float:
    """Spatially integrated displacement; this is the map input."""
    return spatial_integral(field.displacement, field.grid)


def boundary_slope(values: np.ndarray, grid: Grid, end: str) -> float:
    """Second-order one-sided x-derivative at the chosen endpoint ('left'|'right')."""
    f = np.asarray(values, dtype=float)
    if f.shape != (grid.node_count,):
        raise ValidationError(f"array length {f.shape} does not match grid size {grid.node_count}")
    dx = grid.dx
    if end == "left":
        return float((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx))
    if end == "right":
        return float((3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx))
    raise ValidationError(f"end must be 'left' or 'right', got {end!r}")


def field_energy(field: WaveField) -> float:
    """Discrete energy: trapezoid-weighted kinetic term plus link-wise stiffness term."""
    dx = field.grid.dx
    v2 = field.velocity ** 2
    kinetic = 0.5 * (v2.sum() - 0.5 * v2[0] - 0.5 * v2[-1]) * dx
    stiffness = 0.5 * np.sum((np.diff(field.displacement) / dx) ** 2) * dx
    return float(kinetic + stiffness)
