"""Command-line surface: run / sweep / verify.

wave-esc run    --config cfg.txt --out outdir
wave-esc sweep  --config cfg.txt --axis probe.amplitude=0.05,0.1,0.2 --out outdir
wave-esc verify [--config cfg.txt] [sections...]

Exit codes: 0 success, 1 configuration error, 2 numerical blowup (run/sweep);
verify exits 0 iff every check passes. The sweep worker pool is capped by the
WAVE_ESC_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import DEFAULTS, build_sim_config, dump_config, parse_config
from .errors import BlowupError, ConfigError, ValidationError
from .simulation import SimConfig, run_closed_loop, ultimate_bounds_report
from .verification import SECTIONS, run_verification

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2


def _load_config(path: str | None) -> SimConfig:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _write_run_outputs(config: SimConfig, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = run_closed_loop(config)
    (out_dir / "trace.csv").write_text(trace.to_csv(), encoding="utf-8")
    report = ultimate_bounds_report(trace, config)
    summary = dict(report.as_dict())
    summary.update({
        "config_hash": trace.config_hash,
        "steps": trace.steps,
        "record_stride": trace.stride,
        "rows": trace.t.size,
        "max_vartheta_route_gap": trace.max_vartheta_route_gap,
        "max_boundary_identity_gap": trace.max_boundary_identity_gap,
        "final_y": trace.y[-1],
        "final_theta": trace.theta[-1],
        "final_Theta": trace.Theta[-1],
    })
    lines = []
    for key, value in summary.items():
        if isinstance(value, float):
            lines.append(f"{key}={format(value, '.12g')}")
        else:
            lines.append(f"{key}={value}")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out_dir / "config.txt").write_text(dump_config(config), encoding="utf-8")
    return summary


def cmd_run(args) -> int:
    try:
        config = _load_config(args.config)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = _write_run_outputs(config, Path(args.out))
    except BlowupError as exc:
        print(f"numerical blowup: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    print(f"run complete: sup|y-y*| over tail = {summary['sup_y_err']:.6g} "
          f"(|cot(wD)| = {summary['cot_magnitude']:.4g})")
    print(f"outputs in {args.out}")
    return EXIT_OK


def _parse_axes(axis_args) -> dict:
    axes = {}
    for axis_str in axis_args or []:
        if "=" not in axis_str:
            raise ConfigError(f"axis must look like key=v1,v2,..., got {axis_str!r}")
        key, _, vals = axis_str.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"axis key {key!r} is not a known configuration key")
        try:
            values = [int(v) if key in ("grid.nodes", "sim.record_stride") else float(v)
                      for v in vals.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"axis {key!r}: {exc}")
        if not values:
            raise ConfigError(f"axis {key!r} has no values")
        axes[key] = values
    if not axes:
        raise ConfigError("sweep needs at least one --axis")
    return axes


def _sweep_point(payload):
    base_values, overrides, out_dir = payload
    values = dict(base_values)
    values.update(overrides)
    config = build_sim_config(values)
    summary = _write_run_outputs(config, Path(out_dir))
    return overrides, summary


def cmd_sweep(args) -> int:
    try:
        base = _load_config(args.config)
        axes = _parse_axes(args.axis)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    # rebuild the value table of the base config so overrides compose cleanly
    base_values = dict(DEFAULTS)
    for line in dump_config(base).splitlines():
        key, _, val = line.partition(" = ")
        base_values[key] = int(val) if key in ("grid.nodes", "sim.record_stride") else float(val)

    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    keys = sorted(axes)
    points = list(itertools.product(*(axes[k] for k in keys)))
    payloads = []
    for idx, combo in enumerate(points):
        overrides = dict(zip(keys, combo))
        tag = "_".join(f"{k}={v:g}" for k, v in overrides.items())
        payloads.append((base_values, overrides, str(out_root / f"point{idx:03d}_{tag}")))

    workers = os.cpu_count() or 1
    env_cap = os.environ.get("WAVE_ESC_THREADS")
    if env_cap:
        try:
            workers = max(1, min(workers, int(env_cap)))
        except ValueError:
            print(f"ignoring non-integer WAVE_ESC_THREADS={env_cap!r}", file=sys.stderr)
    workers = min(workers, len(payloads))

    results = []
    try:
        if workers <= 1:
            results = [_sweep_point(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_sweep_point, payloads))
    except BlowupError as exc:
        print(f"numerical blowup in sweep point: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error in sweep point: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    sup_keys = ("sup_theta_err", "sup_Theta_err", "sup_y_err", "sup_vartheta")
    header = keys + list(sup_keys) + ["implied_c1", "implied_c2", "implied_c3"]
    rows = [",".join(header)]
    for overrides, summary in results:
        row = [format(overrides[k], ".12g") for k in keys]
        row += [format(summary[k], ".12g") for k in sup_keys]
        row += [format(summary[k], ".12g") for k in ("implied_c1", "implied_c2", "implied_c3")]
        rows.append(",".join(row))
    (out_root / "sweep.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    fitted = {f"fitted_c{i}": max(s[f"implied_c{i}"] for _, s in results) for i in (1, 2, 3)}
    fit_lines = [f"{k}={format(v, '.12g')}" for k, v in fitted.items()]
    (out_root / "sweep_summary.txt").write_text("\n".join(fit_lines) + "\n", encoding="utf-8")
    print(f"sweep complete: {len(results)} points, calibration "
          + ", ".join(f"{k}={v:.4g}" for k, v in fitted.items()))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        config = _load_config(args.config)
        sections = args.sections or None
        results = run_verification(config, sections, seed=args.seed)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_CONFIG


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wave-esc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate the closed loop and write trace.csv")
    p_run.add_argument("--config", default=None, help="configuration file (defaults if omitted)")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="cartesian parameter sweep")
    p_sweep.add_argument("--config", default=None)
    p_sweep.add_argument("--axis", action="append",
                         help="key=v1,v2,... (repeatable)")
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the property battery")
    p_verify.add_argument("sections", nargs="*", choices=[[], *SECTIONS],
                          help=f"optional subset of {SECTIONS}")
    p_verify.add_argument("--config", default=None)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
