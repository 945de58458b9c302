"""Command-line front end: run sweeps, list presets, check invariants.

Subcommands::

    mmtwpa run <config|preset> [--out DIR] [--threads N] [--seed S]
               [--modes M] [--substeps K] [--no-figures]
    mmtwpa presets
    mmtwpa check [--device NAME_OR_FILE] [--drive X] [--frequency GHZ] ...
    mmtwpa convergence <config|preset> [--out DIR]

``run`` writes one CSV per scenario (stable column order, unit-suffixed
headers), renders a PNG per scenario, and emits ``run_summary.json`` with
the config echo, version, file paths, invariant summary, and timings.  The
default output directory comes from ``--out``, else ``$MMTWPA_OUT``, else
``./mmtwpa_out``.  Exit codes: 0 ok, 1 config error, 2 numerical failure,
3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .configio import ConfigError, load_device, load_scenarios
from .metrics import gain_db
from .modes import build_mode_ladder
from .pump import solve_pump
from .scenarios import (
    Scenario,
    available_presets,
    convergence_report,
    preset_scenario,
    run_scenario,
)
from .solver import scattering

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_INVARIANT = 3

# Sum-rule residual gate for run reports: loss channels restore the
# commutator sum rule only to integrator accuracy, so the lossy bound is
# looser than the 1e-9 lossless one checked by `mmtwpa check`.
UNITARITY_GATE = 1e-6

CONVERGENCE_GATES = {
    "dgain_modes_db": 0.05,
    "dgain_substeps_db": 0.01,
    "deta_substeps": 1e-5,
}


def _out_dir(arg: str | None) -> str:
    out = arg or os.environ.get("MMTWPA_OUT") or "mmtwpa_out"
    os.makedirs(out, exist_ok=True)
    return out


def _ladder_bounds(n_modes: int) -> tuple[int, int]:
    # m modes biased one extra rung toward the idler side: 6 -> [-3, 2].
    n_min = -((n_modes + 1) // 2)
    return n_min, n_modes + n_min - 1


def _resolve_scenarios(args) -> tuple[list[Scenario], dict]:
    """Config path or preset name -> scenarios plus an echo mapping."""
    target = args.config
    if target is None:
        raise ConfigError("no config file or preset name given")
    if target in available_presets():
        scenarios, echo = preset_scenario(target), {"preset": target}
    else:
        scenarios, echo = load_scenarios(target), {"config": target}

    overrides = {}
    if getattr(args, "modes", None):
        overrides["n_min"], overrides["n_max"] = _ladder_bounds(args.modes)
    if getattr(args, "substeps", None):
        overrides["substeps"] = args.substeps
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        scenarios = [dataclasses.replace(s, **overrides) for s in scenarios]
        echo["overrides"] = dict(overrides)
    return scenarios, echo


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return str(obj)


def _scenario_echo(s: Scenario) -> dict:
    echo = dataclasses.asdict(
        dataclasses.replace(s, device=getattr(s.device, "name", s.device)))
    echo["grid"] = [float(v) for v in s.grid]
    echo["aux_frequency_grid_ghz"] = [float(v) for v in s.aux_frequency_grid_ghz]
    return echo


def _write_csv(path: str, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def cmd_presets(_args) -> int:
    for name, blurb in sorted(available_presets().items()):
        print(f"{name:7s} {blurb}")
    return EXIT_OK


def cmd_run(args) -> int:
    scenarios, echo = _resolve_scenarios(args)
    out = _out_dir(args.out)
    report = {
        "version": __version__,
        "command": "run",
        "config": echo,
        "out_dir": out,
        "scenarios": [],
    }
    t0 = time.perf_counter()
    worst_residual = 0.0
    n_errors = 0
    results = []
    for s in scenarios:
        res = run_scenario(s, threads=args.threads)
        results.append(res)
        csv_path = os.path.join(out, f"{res.name}.csv")
        cols, rows = res.as_table()
        _write_csv(csv_path, cols, rows)
        residuals = [rec.get("unitarity_residual", 0.0) for rec in res.records
                     if isinstance(rec.get("unitarity_residual"), float)]
        res_max = max(residuals, default=0.0)
        worst_residual = max(worst_residual, res_max)
        n_errors += len(res.errors)
        entry = {
            "name": res.name,
            "scenario": _scenario_echo(s),
            "csv": csv_path,
            "n_points": len(res.records),
            "n_errors": len(res.errors),
            "errors": [{"index": i, "message": msg} for i, msg in res.errors],
            "max_unitarity_residual": res_max,
            "wall_time_s": res.wall_time_s,
        }
        report["scenarios"].append(entry)
        print(f"{res.name}: {len(res.records)} points, "
              f"{len(res.errors)} failures, residual {res_max:.2e}, "
              f"{res.wall_time_s:.1f} s -> {csv_path}")

    if not args.no_figures:
        from .plotting import render_all

        figures = render_all(results, out)
        for entry in report["scenarios"]:
            entry["figure"] = figures.get(entry["name"])

    invariant_pass = worst_residual < UNITARITY_GATE
    report["invariants"] = {
        "max_unitarity_residual": worst_residual,
        "gate": UNITARITY_GATE,
        "pass": invariant_pass,
    }
    report["wall_time_s"] = time.perf_counter() - t0
    summary_path = os.path.join(out, "run_summary.json")
    with open(summary_path, "w") as fh:
        json.dump(report, fh, indent=2, default=_json_default)
    print(f"summary -> {summary_path}")

    if n_errors:
        print(f"{n_errors} grid points failed", file=sys.stderr)
        return EXIT_NUMERICAL
    if not invariant_pass:
        print(f"sum-rule residual {worst_residual:.2e} exceeds "
              f"{UNITARITY_GATE:.0e}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_check(args) -> int:
    bundle = load_device(args.device)
    profile = bundle.profile
    drive = bundle.drive_profile
    if args.drive is not None:
        peak = float(np.max(drive))
        drive = drive * (args.drive / peak) if peak > 0 else \
            np.full(profile.length_cells, args.drive)
    omega_p = profile.from_ghz(bundle.pump_frequency_ghz)
    omega_s = profile.from_ghz(args.frequency)
    n_min, n_max = _ladder_bounds(args.modes)

    def solve(drive_profile, loss):
        pump = solve_pump(profile, float(omega_p), drive_profile,
                          wavevector_mode=bundle.wavevector_mode,
                          polynomial=bundle.kp_polynomial)
        ladder = build_mode_ladder(float(omega_s), float(omega_p), n_min, n_max)
        return scattering(profile, ladder, pump, port_impedance="matched",
                          loss_tangent=loss, substeps=args.substeps)

    checks = []
    lossless = solve(drive, 0.0)
    checks.append(("lossless_pseudo_unitarity",
                   lossless.pseudo_unitarity_residual, 1e-9))
    lossy = solve(drive, 1e-3)
    checks.append(("lossy_sum_rule", lossy.pseudo_unitarity_residual, 1e-6))

    idle = solve(np.zeros(profile.length_cells), 0.0)
    m = idle.s0.shape[0] // 2
    trans = np.abs(np.diag(idle.s0)[:m])
    off = idle.s0.copy()
    np.fill_diagonal(off, 0.0)
    checks.append(("zero_pump_identity_transmission",
                   float(np.max(np.abs(trans - 1.0))), 1e-9))
    checks.append(("zero_pump_identity_leakage",
                   float(np.max(np.abs(off[:, :m]))), 1e-9))

    pump = solve_pump(profile, float(omega_p), drive,
                      wavevector_mode=bundle.wavevector_mode,
                      polynomial=bundle.kp_polynomial)
    ladder = build_mode_ladder(float(omega_s), float(omega_p), n_min, n_max)
    fine = scattering(profile, ladder, pump, port_impedance="matched",
                      substeps=2 * args.substeps)
    checks.append(("step_halving_gain_delta_db",
                   abs(gain_db(fine) - gain_db(lossless)), 0.01))
    wide_ladder = build_mode_ladder(float(omega_s), float(omega_p),
                                    *_ladder_bounds(2 * args.modes))
    wide = scattering(profile, ladder=wide_ladder, pump=pump,
                      port_impedance="matched", substeps=args.substeps,
                      allow_invalid_modes=True)
    checks.append(("mode_doubling_gain_delta_db",
                   abs(gain_db(wide) - gain_db(lossless)), 0.05))
    checks.append(("boundary_condition_number",
                   lossless.boundary_condition_number, 1e12))

    print(f"device {bundle.name}: L={profile.length_cells}, "
          f"pump {bundle.pump_frequency_ghz} GHz, signal {args.frequency} GHz, "
          f"peak drive {float(np.max(drive)):.3f}, m={args.modes}")
    ok = True
    for name, value, gate in checks:
        passed = value < gate
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {value:.3e} "
              f"(gate {gate:.0e})")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_convergence(args) -> int:
    scenarios, _echo = _resolve_scenarios(args)
    out = _out_dir(args.out)
    ok = True
    for s in scenarios:
        rows = convergence_report(s)
        cols = list(rows[0].keys())
        path = os.path.join(out, f"convergence_{s.name}.csv")
        _write_csv(path, cols, [[r.get(c, "") for c in cols] for r in rows])
        print(f"{s.name} -> {path}")
        for r in rows:
            verdicts = []
            for key, gate in CONVERGENCE_GATES.items():
                if key in r and np.isfinite(r[key]):
                    passed = r[key] < gate
                    ok &= passed
                    verdicts.append(f"{key}={r[key]:.2e}"
                                    f"{'' if passed else ' (FAIL)'}")
            print(f"  grid={r['grid_value']:g} gain={r['gain_db']:.2f} dB "
                  + " ".join(verdicts))
    return EXIT_OK if ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmtwpa",
        description="Multimode TWPA scattering, noise, and Floquet studies.")
    parser.add_argument("--version", action="version",
                        version=f"mmtwpa {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, with_config=True):
        if with_config:
            p.add_argument("config", nargs="?", default=None,
                           help="scenario YAML file or preset name")
            p.add_argument("--config", dest="config_flag", default=None,
                           help="alternative to the positional config")
        p.add_argument("--out", default=None,
                       help="output directory (default $MMTWPA_OUT or ./mmtwpa_out)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--modes", type=int, default=None,
                       help="total ladder size m (overrides scenario n_min/n_max)")
        p.add_argument("--substeps", type=int, default=None)

    run_p = sub.add_parser("run", help="execute scenarios, write CSV/JSON/PNG")
    add_common(run_p)
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")
    run_p.set_defaults(func=cmd_run)

    presets_p = sub.add_parser("presets", help="list bundled scenarios")
    presets_p.set_defaults(func=cmd_presets)

    check_p = sub.add_parser("check", help="run the invariant suite on a device")
    check_p.add_argument("--device", default="conventional_73ghz",
                         help="builder name or device YAML file")
    check_p.add_argument("--drive", type=float, default=None,
                         help="peak normalized pump current override")
    check_p.add_argument("--frequency", type=float, default=6.0,
                         help="signal frequency in GHz")
    check_p.add_argument("--modes", type=int, default=6)
    check_p.add_argument("--substeps", type=int, default=4)
    check_p.set_defaults(func=cmd_check)

    conv_p = sub.add_parser("convergence",
                            help="mode-doubling / step-halving report")
    add_common(conv_p)
    conv_p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config_flag", None):
        args.config = args.config_flag
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
