"""Declarative sweep experiments over devices and operating conditions.

A :class:`Scenario` names a device, a sweep axis with its grid, and the
outputs to record; :func:`run_scenario` executes the grid (optionally with
a thread pool), aggregates per-point failures without aborting, and returns
order-stable records.  Bundled presets reproduce the standard studies:
drive sweeps with Floquet exponents, gain/QE spectra, loss and out-of-band
impedance studies, gain scaling, the distributed-resonator comparison, and
critical-current disorder Monte Carlo.  Scenario execution emits data only;
rendering lives in the CLI report path.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from . import devices as dev_mod
from .circuit import NormalizedProfile, perturb_critical_current
from .coupling import constant_port, stepwise_port
from .devices import DeviceBundle
from .floquet import classify_modes, floquet_modes, spectral_gap
from .metrics import (
    estimate_dynamic_range,
    gain_db,
    noise_decomposition,
    quantum_efficiency,
    reflection_db,
)
from .modes import build_mode_ladder
from .pump import pump_reflection, solve_pump
from .solver import scattering

SWEEP_AXES = ("frequency", "drive", "loss_tangent", "out_of_band_impedance",
              "device_length", "sigma_ic")
KNOWN_OUTPUTS = ("gain", "reflection", "eta_bar", "floquet", "noise_budget",
                 "pump_reflection", "p1db")


@dataclass(eq=False)
class Scenario:
    """One sweep: device, axis, grid, requested outputs, solver settings."""

    name: str
    device: str | DeviceBundle
    sweep: str
    grid: np.ndarray
    outputs: tuple[str, ...] = ("gain",)
    device_kwargs: dict = field(default_factory=dict)
    signal_frequency_ghz: float = 6.0   # fixed signal for non-frequency sweeps
    drive_scale: float | None = None    # peak I_pn override (scales the profile)
    n_min: int = -3
    n_max: int = 2
    substeps: int = 4
    seed: int = 0
    loss_tangent: float | None = None
    port_model: str = "matched"         # matched | constant | stepwise
    port_z_ohm: float = 50.0
    port_z_out_ohm: float = 1000.0
    port_cutoff_ghz: float = 16.0
    forward_backward: bool = True
    sigma_ic: float = 0.0               # disorder level for Monte Carlo rows
    monte_carlo_seeds: int = 0
    aux_frequency_grid_ghz: np.ndarray = field(
        default_factory=lambda: np.linspace(5.0, 7.0, 41))

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        self.validate()

    def validate(self) -> None:
        if self.sweep not in SWEEP_AXES:
            raise ValueError(f"sweep must be one of {SWEEP_AXES}")
        if self.grid.size == 0:
            raise ValueError("grid must be non-empty")
        if np.any(np.diff(self.grid) < 0):
            raise ValueError("grid must be monotone non-decreasing")
        if not self.outputs:
            raise ValueError("outputs must be non-empty")
        unknown = set(self.outputs) - set(KNOWN_OUTPUTS)
        if unknown:
            raise ValueError(f"unknown outputs {sorted(unknown)}")
        if self.port_model not in ("matched", "constant", "stepwise"):
            raise ValueError("port_model must be matched, constant, or stepwise")

    def resolve_device(self, **overrides) -> DeviceBundle:
        if isinstance(self.device, DeviceBundle):
            if overrides:
                raise ValueError("cannot override parameters of a prebuilt bundle")
            return self.device
        kwargs = dict(self.device_kwargs)
        kwargs.update(overrides)
        builder = dev_mod.DEVICE_BUILDERS.get(self.device)
        if builder is None:
            raise ValueError(f"unknown device {self.device!r}; known: "
                             f"{sorted(dev_mod.DEVICE_BUILDERS)}")
        return builder(**kwargs)

    def port(self, z_out: float | None = None):
        if self.port_model == "stepwise" or z_out is not None:
            return stepwise_port(self.port_z_ohm,
                                 self.port_z_out_ohm if z_out is None else z_out,
                                 self.port_cutoff_ghz * 1e9)
        if self.port_model == "matched":
            return "matched"
        return constant_port(self.port_z_ohm)


@dataclass(eq=False)
class ScenarioResult:
    name: str
    scenario: Scenario
    records: list[dict]
    errors: list[tuple[int, str]]
    wall_time_s: float

    @property
    def columns(self) -> list[str]:
        cols: list[str] = []
        for rec in self.records:
            for key in rec:
                if key not in cols:
                    cols.append(key)
        return cols

    def as_table(self) -> tuple[list[str], list[list]]:
        cols = self.columns
        rows = [[rec.get(c, "") for c in cols] for rec in self.records]
        return cols, rows


def _scaled_drive(bundle: DeviceBundle, peak: float | None) -> np.ndarray:
    drive = bundle.drive_profile
    if peak is None:
        return drive
    nominal = float(np.max(drive))
    return drive * (peak / nominal)


def _solve_point(bundle: DeviceBundle, profile: NormalizedProfile, s: Scenario,
                 f_signal_ghz: float, drive_peak: float | None = None,
                 port=None, loss_tangent: float | None = None,
                 pump=None, allow_invalid: bool = False) -> dict:
    omega_s = float(profile.from_ghz(f_signal_ghz))
    omega_p = float(profile.from_ghz(bundle.pump_frequency_ghz))
    if pump is None:
        pump = solve_pump(profile, omega_p, _scaled_drive(bundle, drive_peak),
                          wavevector_mode=bundle.wavevector_mode,
                          polynomial=bundle.kp_polynomial)
    ladder = build_mode_ladder(omega_s, omega_p, s.n_min, s.n_max)
    port = port if port is not None else s.port()
    lt = s.loss_tangent if loss_tangent is None else loss_tangent
    result = scattering(profile, ladder, pump, port_impedance=port,
                        loss_tangent=lt, substeps=s.substeps,
                        forward_backward=s.forward_backward,
                        allow_invalid_modes=allow_invalid)
    row = {
        "signal_frequency_ghz": f_signal_ghz,
        "gain_db": gain_db(result),
        "reflection_db": reflection_db(result),
        "unitarity_residual": result.pseudo_unitarity_residual,
        "condition_number": result.boundary_condition_number,
        "oscillating": result.oscillation_flag,
    }
    if "eta_bar" in s.outputs:
        qe = quantum_efficiency(result)
        row.update(eta=qe.eta, eta_bar=qe.eta_bar,
                   caves_added_noise=qe.caves_added_noise)
    if "noise_budget" in s.outputs:
        budget = noise_decomposition(result)
        row["signal_noise_share"] = budget.signal_share()
        sig = budget.signal_slot
        for k, label in enumerate(budget.slot_labels):
            row[f"noise_from_{label}"] = float(
                budget.coherent_weights[sig, k] + budget.loss_weights[sig, k])
    if "pump_reflection" in s.outputs:
        row["pump_reflection_db"] = pump_reflection(profile, pump, s.port_z_ohm)
    if "p1db" in s.outputs:
        g0 = 10.0 ** (row["gain_db"] / 10.0)
        if g0 > 1.0:
            center = int(np.argmax(pump.drive_profile))
            row["p1db_dbm"] = estimate_dynamic_range(
                g0, pump.pump_current,
                float(pump.pump_impedance_profile[center]))
    return row


def _floquet_row(bundle: DeviceBundle, profile: NormalizedProfile, s: Scenario,
                 drive_peak: float) -> dict:
    omega_p = float(profile.from_ghz(bundle.pump_frequency_ghz))
    omega_s = float(profile.from_ghz(s.signal_frequency_ghz))
    pump = solve_pump(profile, omega_p, np.full(profile.length_cells, drive_peak),
                      wavevector_mode=bundle.wavevector_mode,
                      polynomial=bundle.kp_polynomial)
    ladder = build_mode_ladder(omega_s, omega_p, s.n_min, s.n_max)
    fm = floquet_modes(profile, ladder, pump, substeps=s.substeps)
    labels, _ = classify_modes(fm)
    n_amp = labels.count("amplifying")
    row = {
        "floquet_period_cells": fm.period,
        "max_re_exponent": float(np.max(fm.exponents.real)),
        "n_amplifying": n_amp,
        "spectral_gap": spectral_gap(fm),
    }
    return row


def _mc_stats(values: list[float], prefix: str) -> dict:
    arr = np.asarray(values, dtype=float)
    return {
        f"{prefix}_median": float(np.median(arr)),
        f"{prefix}_p10": float(np.percentile(arr, 10)),
        f"{prefix}_p90": float(np.percentile(arr, 90)),
    }


def _run_point(s: Scenario, index: int, value: float,
               allow_invalid: bool = False) -> dict:
    """One grid point; pure function of (scenario, value) plus the seed."""
    if s.sweep == "device_length":
        bundle = s.resolve_device(length_cells=int(round(value)))
    else:
        bundle = s.resolve_device()
    profile = bundle.profile
    row: dict = {}

    if s.sweep == "frequency":
        row["signal_frequency_ghz"] = value
        f_signal = value
    else:
        f_signal = s.signal_frequency_ghz

    drive_peak = s.drive_scale
    loss = s.loss_tangent
    port = None

    if s.sweep == "drive":
        drive_peak = value
        row["drive_ipn"] = value
    elif s.sweep == "loss_tangent":
        loss = value
        row["loss_tangent"] = value
    elif s.sweep == "device_length":
        row["length_cells"] = int(round(value))
    elif s.sweep == "sigma_ic":
        row["sigma_ic"] = value

    if s.sweep == "out_of_band_impedance":
        row["z_out_ohm"] = value
        port = s.port(z_out=value)
        gains, etas, refls = [], [], []
        for f in s.aux_frequency_grid_ghz:
            sub = _solve_point(bundle, profile, s, float(f), drive_peak,
                               port=port, loss_tangent=loss)
            gains.append(sub["gain_db"])
            refls.append(sub["reflection_db"])
            etas.append(sub.get("eta_bar", np.nan))
        center = gains[len(gains) // 2]
        row.update(
            gain_center_db=float(center),
            gain_ripple_db=float(np.max(gains) - np.min(gains)),
            reflection_max_db=float(np.max(refls)),
        )
        if "eta_bar" in s.outputs:
            row["eta_bar_max"] = float(np.nanmax(etas))
        return row

    mc_sigma = value if s.sweep == "sigma_ic" else s.sigma_ic
    if mc_sigma > 0 or (s.sweep == "sigma_ic" and s.monte_carlo_seeds > 0):
        n_seeds = max(s.monte_carlo_seeds, 1)
        gains, etas = [], []
        for i in range(n_seeds):
            perturbed = (perturb_critical_current(profile, mc_sigma,
                                                  s.seed + 1000 * index + i)
                         if mc_sigma > 0 else profile)
            sub = _solve_point(bundle, perturbed, s, f_signal, drive_peak,
                               loss_tangent=loss)
            gains.append(sub["gain_db"])
            etas.append(sub.get("eta_bar", np.nan))
        row.update(_mc_stats(gains, "gain_db"))
        if "eta_bar" in s.outputs:
            row.update(_mc_stats(etas, "eta_bar"))
        row["n_seeds"] = n_seeds
        return row

    row.update(_solve_point(bundle, profile, s, f_signal, drive_peak,
                            loss_tangent=loss, port=port,
                            allow_invalid=allow_invalid))
    if "floquet" in s.outputs:
        peak = drive_peak if drive_peak is not None else float(np.max(bundle.drive_profile))
        if peak > 0:
            row.update(_floquet_row(bundle, profile, s, peak))
    return row


def run_scenario(s: Scenario, threads: int = 1) -> ScenarioResult:
    """Execute every grid point; failures are recorded, not raised.

    Deterministic for fixed scenario + seed: grid points derive their RNG
    streams from (seed, point index), independent of thread scheduling.
    """
    s.validate()
    t0 = time.perf_counter()
    records: list[dict | None] = [None] * s.grid.size
    errors: list[tuple[int, str]] = []

    def work(i: int) -> None:
        try:
            records[i] = _run_point(s, i, float(s.grid[i]))
        except Exception as exc:  # noqa: BLE001 - aggregate per-point failures
            errors.append((i, f"{type(exc).__name__}: {exc}"))
            records[i] = {"error": str(exc)}

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(s.grid.size)))
    else:
        for i in range(s.grid.size):
            work(i)

    axis_key = {
        "frequency": "signal_frequency_ghz", "drive": "drive_ipn",
        "loss_tangent": "loss_tangent", "out_of_band_impedance": "z_out_ohm",
        "device_length": "length_cells", "sigma_ic": "sigma_ic",
    }[s.sweep]
    for i, rec in enumerate(records):
        if axis_key not in rec:
            rec[axis_key] = float(s.grid[i])
    errors.sort(key=lambda e: e[0])
    return ScenarioResult(name=s.name, scenario=s, records=records,
                          errors=errors, wall_time_s=time.perf_counter() - t0)


def convergence_report(s: Scenario, points: tuple[int, ...] | None = None) -> list[dict]:
    """Mode-count doubling and substep-halving deltas at representative points.

    Substep doubling also refines the noise quadrature (they share a grid),
    so the eta delta doubles as the quadrature-refinement check.  The
    doubled ladder deliberately reaches past the band edge: the extra rungs
    are evanescent there, and their negligible effect on the gain is the
    truncation statement.
    """
    if points is None:
        points = tuple(sorted({0, s.grid.size // 2, s.grid.size - 1}))
    rows = []
    for i in points:
        value = float(s.grid[i])
        base = _run_point(s, i, value)
        wide = dataclasses.replace(
            s, n_min=s.n_min - (s.n_max - s.n_min + 1) // 2,
            n_max=s.n_max + (s.n_max - s.n_min + 1 + 1) // 2)
        modes_row = _run_point(wide, i, value, allow_invalid=True)
        fine = dataclasses.replace(s, substeps=2 * s.substeps)
        fine_row = _run_point(fine, i, value)
        row = {
            "grid_value": value,
            "gain_db": base.get("gain_db", np.nan),
            "dgain_modes_db": abs(modes_row.get("gain_db", np.nan) - base.get("gain_db", np.nan)),
            "dgain_substeps_db": abs(fine_row.get("gain_db", np.nan) - base.get("gain_db", np.nan)),
        }
        if "eta" in base:
            row["deta_substeps"] = abs(fine_row.get("eta", np.nan) - base.get("eta", np.nan))
            row["deta_modes"] = abs(modes_row.get("eta", np.nan) - base.get("eta", np.nan))
        rows.append(row)
    return rows


def _freq_grid(lo: float, hi: float, n: int = 201) -> np.ndarray:
    return np.linspace(lo, hi, n)


def preset_scenario(name: str) -> list[Scenario]:
    """Bundled figure-style scenarios by name (fig3, fig4, ...)."""
    presets = {
        "fig3": _preset_fig3, "fig4": _preset_fig4, "fig5": _preset_fig5,
        "fig7": _preset_fig7, "fig8": _preset_fig8, "fig9": _preset_fig9,
        "fig10": _preset_fig10,
    }
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(presets)}")
    return presets[name]()


def available_presets() -> dict[str, str]:
    return {
        "fig3": "homogeneous 73 GHz design: drive sweep with Floquet exponents "
                "and noise decomposition at 6 GHz",
        "fig4": "gain / QE / reflection spectra: Gaussian-graded vs homogeneous "
                "two-junction designs",
        "fig5": "loss-tangent sweep of eta_bar plus reflection spectra for the "
                "73 GHz design (with and without forward-backward coupling)",
        "fig7": "stepwise out-of-band port impedance study (ripple, eta_bar)",
        "fig8": "gain scaling with device length for the graded design",
        "fig9": "lumped LC vs quarter-wave TLR resonators: gain and QE spectra",
        "fig10": "critical-current disorder Monte Carlo (median, 10/90 pct)",
    }


def _preset_fig3() -> list[Scenario]:
    return [Scenario(
        name="fig3_drive_sweep",
        device="conventional_73ghz",
        sweep="drive",
        grid=np.linspace(0.0, 0.6, 31),
        outputs=("gain", "eta_bar", "noise_budget", "floquet"),
        signal_frequency_ghz=6.0,
        port_model="constant",
    )]


def _preset_fig4() -> list[Scenario]:
    grid = _freq_grid(3.0, 12.0)
    common = dict(sweep="frequency", grid=grid,
                  outputs=("gain", "reflection", "eta_bar", "pump_reflection", "p1db"))
    return [
        Scenario(name="fig4_floquet", device="floquet_gaussian", **common),
        Scenario(name="fig4_conventional", device="conventional_65ghz", **common),
    ]


def _preset_fig5() -> list[Scenario]:
    return [
        Scenario(
            name="fig5_loss_sweep",
            device="conventional_73ghz",
            sweep="loss_tangent",
            grid=np.logspace(-7, -2, 26),
            outputs=("gain", "eta_bar"),
            signal_frequency_ghz=6.0,
        ),
        Scenario(
            name="fig5_reflection",
            device="conventional_73ghz",
            sweep="frequency",
            grid=_freq_grid(3.0, 9.0, 121),
            outputs=("gain", "reflection"),
        ),
        Scenario(
            name="fig5_reflection_no_fb",
            device="conventional_73ghz",
            sweep="frequency",
            grid=_freq_grid(3.0, 9.0, 121),
            outputs=("gain", "reflection"),
            forward_backward=False,
        ),
    ]


def _preset_fig7() -> list[Scenario]:
    grid = np.array([50.0, 100.0, 1000.0])
    out = ("gain", "reflection", "eta_bar")
    return [
        Scenario(name="fig7_conventional", device="conventional_65ghz",
                 sweep="out_of_band_impedance", grid=grid, outputs=out),
        Scenario(name="fig7_floquet", device="floquet_gaussian",
                 sweep="out_of_band_impedance", grid=grid, outputs=out),
    ]


def _preset_fig8() -> list[Scenario]:
    return [Scenario(
        name="fig8_gain_scaling",
        device="floquet_gaussian",
        sweep="device_length",
        grid=np.arange(1900, 2201, 50, dtype=float),
        outputs=("gain", "eta_bar"),
        signal_frequency_ghz=6.0,
    )]


def _preset_fig9() -> list[Scenario]:
    grid = _freq_grid(3.0, 12.0, 121)
    out = ("gain", "eta_bar")
    return [
        Scenario(name="fig9_lumped", device="floquet_gaussian",
                 sweep="frequency", grid=grid, outputs=out),
        Scenario(name="fig9_tlr", device="floquet_gaussian",
                 sweep="frequency", grid=grid, outputs=out,
                 device_kwargs={"pmr_kind": "quarter_wave_tlr"}),
    ]


def _preset_fig10() -> list[Scenario]:
    return [
        Scenario(
            name="fig10_sigma_sweep",
            device="floquet_gaussian",
            sweep="sigma_ic",
            grid=np.array([0.0, 0.02, 0.05, 0.10]),
            outputs=("gain", "eta_bar"),
            signal_frequency_ghz=6.0,
            monte_carlo_seeds=20,
            seed=7,
        ),
        Scenario(
            name="fig10_spectrum_sigma05",
            device="floquet_gaussian",
            sweep="frequency",
            grid=_freq_grid(4.0, 11.0, 21),
            outputs=("gain", "eta_bar"),
            sigma_ic=0.05,
            monte_carlo_seeds=20,
            seed=7,
        ),
    ]
