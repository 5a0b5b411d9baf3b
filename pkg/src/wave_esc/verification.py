"""Property battery behind the `verify` command.

Every check is a named pass/fail with the measured number, so the table
reads like a lab report. Sections can run individually (`kernels`, `probe`,
`wave`, `averaging`, `average-system`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backstepping as bs
from .backstepping import BacksteppingGains
from .errors import KernelSingularityError, ValidationError
from .probing import (beta, check_frequency, demod_gradient_signal,
                      demod_hessian_signal, perturbation, series_beta,
                      trailing_period_mean)
from .backstepping import target_residuals
from .simulation import (SimConfig, averaging_oracle, compatible_average_init,
                         fit_exponential, run_average_system)
from .wave_field import Grid, field_energy, init_field, spatial_integral, step

SECTIONS = ("kernels", "probe", "wave", "averaging", "average-system")


@dataclass(frozen=True)
class CheckResult:
    section: str
    name: str
    passed: bool
    measured: float
    bound: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return (f"[{status}] {self.section:14s} {self.name:44s} "
                f"measured={self.measured:.3e} bound={self.bound:.3e}{extra}")


def _check(results, section, name, measured, bound, note=""):
    results.append(CheckResult(section, name, measured <= bound, float(measured),
                               float(bound), note))


def _gains(config: SimConfig) -> BacksteppingGains:
    return config.diagnostic_gains()


# ---------------------------------------------------------------------------

def verify_kernels(config: SimConfig, rng: np.random.Generator) -> list[CheckResult]:
    out = []
    gains = _gains(config)
    D = gains.domain_length

    out_val = abs(float(bs.g_kernel(D, D)))
    _check(out, "kernels", "g vanishes at the actuated end", out_val, 0.0)
    _check(out, "kernels", "g slope vanishes at x=0", abs(float(bs.g_kernel_prime(0.0, D))), 0.0)
    y = rng.uniform(0, D, 16)
    h = 1e-4
    curv = (bs.g_kernel(y + h, D) - 2 * bs.g_kernel(y, D) + bs.g_kernel(y - h, D)) / h ** 2
    _check(out, "kernels", "g curvature is -1", float(np.max(np.abs(curv + 1.0))), 1e-7)

    gamma_D = float(bs.gamma_kernel(gains, D))
    _check(out, "kernels", "gamma(D) equals the effective gain", abs(gamma_D - gains.kbar), 0.0)
    h = 1e-6
    g0 = float(bs.gamma_kernel(gains, 0.0))
    gp0 = float((bs.gamma_kernel(gains, h) - bs.gamma_kernel(gains, -h)) / (2 * h))
    _check(out, "kernels", "gamma mixed condition at x=0",
           abs(gp0 + gains.c0 * gains.lam * g0), 1e-9)
    x = rng.uniform(0, D, 50)
    h = 1e-4
    res = (bs.gamma_kernel(gains, x + h) - 2 * bs.gamma_kernel(gains, x)
           + bs.gamma_kernel(gains, x - h)) / h ** 2 - gains.lam ** 2 * bs.gamma_kernel(gains, x)
    _check(out, "kernels", "gamma solves the decay ODE", float(np.max(np.abs(res))),
           1e-6 * abs(gains.kbar), "50 random probes, h=1e-4")

    # guard demonstrations: the degenerate decay rate and the singular denominator
    c0_bad = 3.0
    lam_bad = math.log((1 + c0_bad) / (c0_bad - 1)) / (2 * D)
    try:
        BacksteppingGains.from_kbar(-lam_bad / D, c0_bad, D)
        caught = 0.0
    except KernelSingularityError:
        caught = 1.0
    out.append(CheckResult("kernels", "degenerate decay rate rejected", caught == 1.0,
                           caught, 1.0))
    raw = BacksteppingGains(c0_bad, -lam_bad / D, D)  # raw constructor skips validation
    try:
        bs.gamma_kernel(raw, 0.5 * D)
        caught = 0.0
    except KernelSingularityError:
        caught = 1.0
    out.append(CheckResult("kernels", "singular kernel denominator rejected", caught == 1.0,
                           caught, 1.0))
    if gains.c0 < 1.0:
        out.append(CheckResult("kernels", "degenerate-rate guard vacuous for c0<1", True, 0.0,
                               0.0, f"c0={gains.c0:g}: the guard value is complex, nothing to avoid"))
    return out


def verify_probe(config: SimConfig, rng: np.random.Generator) -> list[CheckResult]:
    out = []
    probe = config.probe
    D, w, a = probe.domain_length, probe.frequency, probe.amplitude

    verdict = check_frequency(w, D)
    out.append(CheckResult("probe", "frequency admissible", verdict.admissible,
                           verdict.distance, 1e-9 * math.pi / D,
                           f"nearest resonance k={verdict.nearest_k}"))
    # propagated dither integrates to a*sin(w t) (fine quadrature)
    fine = Grid(D, 1001)
    ts = np.linspace(0.0, 2 * probe.period, 97)
    gap = max(abs(spatial_integral(beta(probe, fine.nodes, t), fine) - a * math.sin(w * t))
              for t in ts)
    _check(out, "probe", "dither integral matches a*sin(wt)", gap, 1e-4, "N=1001")
    # discrete wave residual of the dither field
    h = 1e-4
    xs = rng.uniform(0, D, 100)
    tsr = rng.uniform(0, 2 * probe.period, 100)
    tt = (beta(probe, xs, tsr + h) - 2 * beta(probe, xs, tsr) + beta(probe, xs, tsr - h)) / h ** 2
    xx = (beta(probe, xs + h, tsr) - 2 * beta(probe, xs, tsr) + beta(probe, xs - h, tsr)) / h ** 2
    _check(out, "probe", "dither field solves the wave equation",
           float(np.max(np.abs(tt - xx))), 1e-5, "100 random points, h=1e-4")
    # series construction agrees with the closed form
    xs = np.linspace(0, D, 41)
    t0 = 0.37 * probe.period
    gap = float(np.max(np.abs(series_beta(probe, xs, t0, terms=20) - beta(probe, xs, t0))))
    _check(out, "probe", "series construction matches closed form", gap, 1e-10, "20 terms")
    # boundary dither value
    _check(out, "probe", "boundary dither equals field trace at x=D",
           abs(float(perturbation(probe, t0)) - float(beta(probe, D, t0))), 0.0)
    # demodulation signals are zero-mean over one period
    tgrid = np.linspace(0.0, probe.period, 20001)
    m_mean = abs(trailing_period_mean(tgrid, demod_gradient_signal(a, w, tgrid), probe.period))
    n_mean = abs(trailing_period_mean(tgrid, demod_hessian_signal(a, w, tgrid), probe.period))
    _check(out, "probe", "gradient demodulation is zero-mean", m_mean, 1e-10)
    _check(out, "probe", "curvature demodulation is zero-mean", n_mean, 1e-10)
    return out


def verify_wave(config: SimConfig, rng: np.random.Generator) -> list[CheckResult]:
    del rng
    out = []
    D = config.grid.domain_length
    w = 7.5 / D  # oscillatory but resolvable reference mode

    def oracle_error(n):
        grid = Grid(D, n)
        dt = grid.dx / 2
        x = grid.nodes
        fld = init_field(grid, np.zeros(n), w * np.cos(w * x))
        n_steps = int(round(10.0 / dt))
        for i in range(n_steps):
            fld = step(fld, math.cos(w * D) * math.sin(w * (i + 1) * dt), dt)
        exact = np.cos(w * x) * math.sin(w * fld.t)
        return float(np.max(np.abs(fld.displacement - exact)))

    e201 = oracle_error(201)
    _check(out, "wave", "driven analytic solution reproduced", e201, 1e-3, "N=201, t=10")
    e101 = oracle_error(101)
    ratio = e101 / e201
    out.append(CheckResult("wave", "error order under grid halving",
                           3.5 <= ratio <= 4.5, ratio, 4.5, "target window [3.5, 4.5]"))

    grid = Grid(D, 201)
    x = grid.nodes
    fld = init_field(grid, 0.3 * np.cos(np.pi * x / D) + 0.1 * np.cos(2 * np.pi * x / D),
                     np.zeros(201))
    held = float(fld.displacement[-1])
    e0 = field_energy(fld)
    drift = 0.0
    dt = grid.dx / 2
    for _ in range(int(round(10.0 / dt))):
        fld = step(fld, held, dt)
        drift = max(drift, abs(field_energy(fld) - e0) / e0)
    _check(out, "wave", "undriven energy drift", drift, 1e-3, "10 time units, N=201")
    return out


def verify_averaging(config: SimConfig, rng: np.random.Generator) -> list[CheckResult]:
    del rng
    out = []
    probe = config.probe
    a, w = probe.amplitude, probe.frequency
    hessian = config.map_params.hessian
    y_star = config.map_params.optimum
    tgrid = np.linspace(0.0, probe.period, 4001)
    for vth in (-0.5, 0.0, 0.3):
        y = y_star + 0.5 * hessian * (vth + a * np.sin(w * tgrid)) ** 2
        g_mean = averaging_oracle(tgrid, demod_gradient_signal(a, w, tgrid) * y, w)
        h_mean = averaging_oracle(tgrid, demod_hessian_signal(a, w, tgrid) * y, w)
        _check(out, "averaging", f"gradient product mean at offset {vth:+.1f}",
               abs(g_mean - hessian * vth), 1e-6)
        _check(out, "averaging", f"curvature product mean at offset {vth:+.1f}",
               abs(h_mean - hessian), 1e-6)
    return out


def verify_average_system(config: SimConfig, rng: np.random.Generator) -> list[CheckResult]:
    del rng
    out = []
    gains = _gains(config)
    lam = gains.lam

    # scalar decay and norm decay from the plain start (integrated quantities
    # tolerate the incompatible corner launched by the initial control value)
    grid = Grid(config.grid.domain_length, 101)
    tr = run_average_system(gains, grid, vartheta0=1.0, horizon=min(10.0, 2.0 / lam),
                            record_stride=10, delta=config.delta)
    mask = (lam * tr.t <= 2.0) & (tr.t > 0)
    rel = np.max(np.abs(tr.Z[mask] / (tr.Z[0] * np.exp(-lam * tr.t[mask])) - 1.0))
    _check(out, "average-system", "scalar target decay matches exp(-lam t)", rel, 0.02)
    rate, _amp = fit_exponential(tr.t[tr.t >= 1.0], tr.Omega[tr.t >= 1.0])
    out.append(CheckResult("average-system", "norm decays exponentially", rate > 0.0,
                           rate, 0.0, "fitted rate must be positive"))

    # classical-solution checks need data compatible with the law
    residuals = {}
    for n in (101, 201):
        grid_n = Grid(config.grid.domain_length, n)
        vth0, u0, ut0 = compatible_average_init(gains, grid_n)
        tr_n = run_average_system(gains, grid_n, vth0, u0, ut0, horizon=8.0,
                                  record_stride=1, delta=config.delta)
        if n == 101:
            k0 = max(1, tr_n.V.size // 100)
            viol = float(np.max(tr_n.V[k0 + 1:] / tr_n.V[k0:-1] - 1.0))
            _check(out, "average-system", "energy functional nonincreasing", max(viol, 0.0),
                   1e-6, "per recorded step, first 1% skipped")
        residuals[n] = target_residuals(tr_n.t, tr_n.Z, tr_n.w_snapshots, grid_n, gains)
    worst_ratio = min(
        residuals[101].as_dict()[k] / max(residuals[201].as_dict()[k], 1e-300)
        for k in ("ode", "neumann", "wave")
    )
    out.append(CheckResult("average-system", "target residuals shrink at second order",
                           worst_ratio >= 3.0, worst_ratio, 3.0,
                           "halving ratio, pinned-end residual excluded (already ~0)"))
    dx, dt = Grid(config.grid.domain_length, 101).dx, Grid(config.grid.domain_length, 101).dx / 2
    _check(out, "average-system", "residual magnitude at N=101",
           residuals[101].max(), 5.0 * (dx ** 2 + dt ** 2))
    return out


_SECTION_FUNCS = {
    "kernels": verify_kernels,
    "probe": verify_probe,
    "wave": verify_wave,
    "averaging": verify_averaging,
    "average-system": verify_average_system,
}


def run_verification(config: SimConfig, sections=None, seed: int = 0) -> list[CheckResult]:
    """Run the battery (or a subset of sections) and return all check results."""
    chosen = SECTIONS if not sections else tuple(sections)
    for s in chosen:
        if s not in _SECTION_FUNCS:
            raise ValidationError(f"unknown verification section {s!r}; pick from {SECTIONS}")
    results = []
    for s in chosen:
        rng = np.random.default_rng(seed)
        results.extend(_SECTION_FUNCS[s](config, rng))
    return results
