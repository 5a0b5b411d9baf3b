#!/usr/bin/env python3
"""Averaged error system: exponential decay on the target variables.

The change of variables (scalar Z, field w) maps the averaged loop onto
Z' = -lam Z plus a wave field with a dissipative end. This script shows
the scalar tracking exp(-lam t) from a plain start, and the per-step decay
of the energy functional plus second-order target residuals from a start
that is compatible with the control law (classical-solution territory).
"""

import numpy as np

from wave_esc import (BacksteppingGains, Grid, compatible_average_init,
                      fit_exponential, run_average_system, target_residuals)

gains = BacksteppingGains.from_map_gain(0.1, -2.0, 0.5, 1.0)
lam = gains.lam
grid = Grid(1.0, 101)

print(f"decay rate lam = {lam}")
print("\nplain start (unit scalar error, resting fields):")
tr = run_average_system(gains, grid, vartheta0=1.0, horizon=2.0 / lam)
mask = tr.t > 0
gap = np.max(np.abs(tr.Z[mask] / (tr.Z[0] * np.exp(-lam * tr.t[mask])) - 1))
print(f"  Z tracks Z(0) e^(-lam t) to {gap:.2e} relative over lam*t <= 2")
rate, amp = fit_exponential(tr.t[tr.t >= 1.0], tr.Omega[tr.t >= 1.0])
print(f"  fitted norm decay rate rho = {rate:.4f} (amplitude {amp:.3f})")

print("\nlaw-compatible smooth start (energy decay + residuals):")
for n in (101, 201):
    g = Grid(1.0, n)
    vth0, u0, ut0 = compatible_average_init(gains, g)
    trn = run_average_system(gains, g, vth0, u0, ut0, horizon=8.0, record_stride=1)
    k0 = max(1, trn.V.size // 100)
    worst = np.max(trn.V[k0 + 1:] / trn.V[k0:-1] - 1)
    res = target_residuals(trn.t, trn.Z, trn.w_snapshots, g, gains)
    print(f"  N={n}: V(0)={trn.V[0]:.4f} -> V(T)={trn.V[-1]:.6f}, "
          f"worst per-step increase {worst:+.2e}")
    print(f"        residuals: ode {res.ode:.2e}, dissipative end {res.neumann:.2e}, "
          f"pinned end {res.dirichlet:.2e}, interior wave {res.wave:.2e}")
print("  (each residual shrinks about fourfold per grid halving)")
