"""Plain-text configuration: `section.key = value` lines, `#` comments.

Unknown keys are rejected with their line number; every value is validated
through the same constructors the library uses, so a parsed configuration is
a valid one.
"""

from __future__ import annotations

import math

from .errors import ConfigError
from .probing import ProbeDesign
from .simulation import SimConfig
from .static_map import MapParams
from .wave_field import Grid

DEFAULTS = {
    "map.hessian": -2.0,
    "map.optimizer": 2.0,
    "map.optimum": 5.0,
    "grid.nodes": 101,
    "grid.domain_length": 1.0,
    "time.dt": None,          # None -> dx/2
    "time.horizon": 100.0,
    "probe.amplitude": 0.1,
    "probe.frequency": 7.5,
    "control.c0": 0.5,
    "control.gain_K": 0.1,
    "control.filter_c": 10.0,
    "control.theta_hat0": 0.0,
    "lyapunov.delta": 0.05,
    "sim.record_stride": 10,
}

_INT_KEYS = {"grid.nodes", "sim.record_stride"}


def parse_config(text: str) -> SimConfig:
    """Parse and fully validate a configuration; missing keys take defaults."""
    values = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in values:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                parsed = int(val)
            else:
                parsed = float(val)
                if not math.isfinite(parsed):
                    raise ValueError("non-finite")
        except ValueError:
            kind = "integer" if key in _INT_KEYS else "decimal"
            raise ConfigError(f"line {lineno}: key {key!r} needs a {kind} value, got {val!r}")
        values[key] = parsed
    return build_sim_config(values)


def build_sim_config(values: dict) -> SimConfig:
    try:
        params = MapParams.create(values["map.hessian"], values["map.optimizer"],
                                  values["map.optimum"])
        grid = Grid(values["grid.domain_length"], values["grid.nodes"])
        probe = ProbeDesign(values["probe.amplitude"], values["probe.frequency"],
                            values["grid.domain_length"])
        return SimConfig(
            map_params=params,
            grid=grid,
            probe=probe,
            gain=values["control.gain_K"],
            corner_freq=values["control.filter_c"],
            c0=values["control.c0"],
            theta_hat0=values["control.theta_hat0"],
            delta=values["lyapunov.delta"],
            dt=values["time.dt"],
            horizon=values["time.horizon"],
            record_stride=values["sim.record_stride"],
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(config: SimConfig) -> str:
    """Canonical `key = value` text for a configuration."""
    values = {
        "map.hessian": config.map_params.hessian,
        "map.optimizer": config.map_params.optimizer,
        "map.optimum": config.map_params.optimum,
        "grid.nodes": config.grid.node_count,
        "grid.domain_length": config.grid.domain_length,
        "time.dt": config.dt,
        "time.horizon": config.horizon,
        "probe.amplitude": config.probe.amplitude,
        "probe.frequency": config.probe.frequency,
        "control.c0": config.c0,
        "control.gain_K": config.gain,
        "control.filter_c": config.corner_freq,
        "control.theta_hat0": config.theta_hat0,
        "lyapunov.delta": config.delta,
        "sim.record_stride": config.record_stride,
    }
    lines = []
    for key, value in values.items():
        if value is None:
            continue
        if key in _INT_KEYS:
            lines.append(f"{key} = {value:d}")
        else:
            lines.append(f"{key} = {format(value, '.12g')}")
    return "\n".join(lines) + "\n"
