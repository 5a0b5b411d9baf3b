#!/usr/bin/env python3
"""Compensation-kernel verification table.

The polynomial weight g(y) = (D^2 - y^2)/2 and the exponential kernel
gamma(x) must satisfy their boundary-value problems for the closed loop to
land on the decaying target system. This prints the residual table (also
available as `wave-esc verify kernels`) and demonstrates the degenerate-case
guards.
"""

import math

import numpy as np

from wave_esc import (BacksteppingGains, KernelSingularityError, g_kernel,
                      g_kernel_prime, gamma_kernel)

gains = BacksteppingGains.from_map_gain(gain=0.1, hessian=-2.0, c0=0.5, domain_length=1.0)
D = gains.domain_length
print(f"gains: c0={gains.c0}, effective gain {gains.kbar}, decay rate lam={gains.lam}, "
      f"ratio r={gains.r}")

print("\npolynomial weight g:")
print(f"  g(D)  = {float(g_kernel(D, D)):+.3e}   (must be 0)")
print(f"  g'(0) = {float(g_kernel_prime(0.0, D)):+.3e}   (must be 0)")
ys = np.linspace(0, D, 9)
h = 1e-4
curv = (g_kernel(ys + h, D) - 2 * g_kernel(ys, D) + g_kernel(ys - h, D)) / h**2
print(f"  max |g'' + 1| over the domain = {np.max(np.abs(curv + 1)):.3e}")

print("\nexponential kernel gamma:")
print(f"  gamma(D) - kbar = {float(gamma_kernel(gains, D)) - gains.kbar:+.3e}   (exact)")
g0 = float(gamma_kernel(gains, 0.0))
gp0 = (float(gamma_kernel(gains, 1e-6)) - float(gamma_kernel(gains, -1e-6))) / 2e-6
print(f"  gamma(0) = {g0:.8f}")
print(f"  mixed condition |gamma'(0) + c0*lam*gamma(0)| = {abs(gp0 + gains.c0 * gains.lam * g0):.3e}")
xs = np.linspace(0, D, 11)
res = (gamma_kernel(gains, xs + 1e-4) - 2 * gamma_kernel(gains, xs)
       + gamma_kernel(gains, xs - 1e-4)) / 1e-8 - gains.lam**2 * gamma_kernel(gains, xs)
print(f"  max |gamma'' - lam^2 gamma| = {np.max(np.abs(res)):.3e}  "
      f"(tolerance 1e-6*|kbar| = {1e-6 * abs(gains.kbar):.1e})")

print("\nguards:")
print(f"  coupling c0={gains.c0} < 1: the degenerate decay rate is complex, guard vacuous")
c0_bad = 3.0
lam_bad = math.log((1 + c0_bad) / (c0_bad - 1)) / (2 * D)
try:
    BacksteppingGains.from_kbar(-lam_bad / D, c0_bad, D)
except KernelSingularityError as exc:
    print(f"  c0={c0_bad}, lam={lam_bad:.6f}: rejected ({exc})")
ok = BacksteppingGains.from_kbar(-(lam_bad + 0.05) / D, c0_bad, D)
print(f"  c0={c0_bad}, lam={ok.lam:.6f}: accepted, gamma(0) = {float(gamma_kernel(ok, 0.0)):.6f}")
