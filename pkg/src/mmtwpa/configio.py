"""YAML scenario and device files for the command-line front end.

A scenario file either names a bundled preset::

    preset: fig4

or lists sweeps explicitly::

    scenarios:
      - name: gain_spectrum
        device: floquet_gaussian          # builder name or inline mapping
        sweep: frequency
        grid: {start: 3.0, stop: 12.0, points: 201}
        outputs: [gain, eta_bar]
        port_model: matched

Grids are explicit lists or {start, stop, points, spacing: linear|log}
mappings.  Devices are builder names with optional ``device_kwargs``, or an
inline mapping with SI-suffixed keys (``critical_current_a``,
``ground_capacitance_f``, ...) describing the hardware directly; per-cell
entries accept a scalar, a full-length list, and the drive additionally a
``{gaussian: {peak, fwhm_fraction}}`` directive.  An optional
``perturb: {sigma, seed}`` block draws one frozen critical-current disorder
realization.
"""

from __future__ import annotations

import dataclasses
import os

import numpy as np
import yaml

from . import devices as dev_mod
from .circuit import CircuitSpec, gaussian_drive_profile, perturb_critical_current
from .devices import DeviceBundle
from .scenarios import Scenario, preset_scenario

# Config keys (SI unit suffix) -> CircuitSpec per-cell profile fields.
_PROFILE_KEYS = {
    "critical_current_a": "critical_current_profile",
    "junction_capacitance_f": "junction_capacitance_profile",
    "ground_capacitance_f": "ground_capacitance_profile",
    "coupling_capacitance_f": "coupling_capacitance_profile",
}
# key -> (CircuitSpec field, converter); YAML leaves dotless scientific
# notation ("170e-12") as strings, so numerics are coerced explicitly.
_SCALAR_KEYS = {
    "resonator_inductance_h": ("resonator_inductance", float),
    "resonator_capacitance_f": ("resonator_capacitance", float),
    "pmr_period": ("pmr_period", int),
    "junctions_per_cell": ("junctions_per_cell", int),
    "length_cells": ("length_cells", int),
    "loss_tangent": ("loss_tangent", float),
    "pmr_kind": ("pmr_kind", str),
    "tlr_phase_velocity_m_s": ("tlr_phase_velocity", float),
    "tlr_impedance_ohm": ("tlr_impedance_profile",
                          lambda v: np.asarray(v, dtype=float)),
    "tlr_length_m": ("tlr_length", float),
}
_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(Scenario)}


class ConfigError(ValueError):
    """Malformed configuration file or section."""


def load_config(path: str) -> dict:
    """Parse a YAML file into a mapping; wraps IO and syntax errors."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _grid_from_config(spec, where: str) -> np.ndarray:
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "points", "spacing", "values"}
        if extra:
            raise ConfigError(f"{where}: unknown grid keys {sorted(extra)}")
        if "values" in spec:
            return np.asarray(spec["values"], dtype=float)
        try:
            start, stop = float(spec["start"]), float(spec["stop"])
            points = int(spec.get("points", 201))
        except KeyError as exc:
            raise ConfigError(f"{where}: grid needs start and stop") from exc
        spacing = spec.get("spacing", "linear")
        if spacing == "linear":
            return np.linspace(start, stop, points)
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError(f"{where}: log grid endpoints must be > 0")
            return np.logspace(np.log10(start), np.log10(stop), points)
        raise ConfigError(f"{where}: spacing must be linear or log")
    raise ConfigError(f"{where}: grid must be a list or a start/stop mapping")


def _drive_from_config(spec, length: int, where: str) -> np.ndarray:
    if isinstance(spec, dict):
        if set(spec) != {"gaussian"}:
            raise ConfigError(f"{where}: drive mapping must be {{gaussian: ...}}")
        g = spec["gaussian"]
        try:
            return gaussian_drive_profile(float(g["peak"]), length,
                                          float(g["fwhm_fraction"]))
        except KeyError as exc:
            raise ConfigError(f"{where}: gaussian drive needs peak and "
                              "fwhm_fraction") from exc
    arr = np.atleast_1d(np.asarray(spec, dtype=float))
    if arr.size == 1:
        return np.full(length, float(arr[0]))
    if arr.shape != (length,):
        raise ConfigError(f"{where}: drive list must have length {length}")
    return arr


def device_from_config(cfg: dict, where: str = "device") -> DeviceBundle:
    """Build a DeviceBundle from a config mapping.

    Either ``{builder: <name>, kwargs: {...}}`` for the bundled families or
    a full SI-keyed hardware description with an operating point.
    """
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where}: device section must be a mapping")
    cfg = dict(cfg)
    name = cfg.pop("name", None)
    perturb = cfg.pop("perturb", None)

    if "builder" in cfg:
        builder_name = cfg.pop("builder")
        kwargs = cfg.pop("kwargs", {})
        if cfg:
            raise ConfigError(f"{where}: unexpected keys {sorted(cfg)} next "
                              "to builder")
        builder = dev_mod.DEVICE_BUILDERS.get(builder_name)
        if builder is None:
            raise ConfigError(f"{where}: unknown builder {builder_name!r}; "
                              f"known: {sorted(dev_mod.DEVICE_BUILDERS)}")
        try:
            bundle = builder(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: builder {builder_name} rejected "
                              f"kwargs: {exc}") from exc
    else:
        try:
            length = int(cfg["length_cells"])
        except KeyError as exc:
            raise ConfigError(f"{where}: length_cells is required") from exc
        fields = {}
        for key, field_name in _PROFILE_KEYS.items():
            if key not in cfg:
                raise ConfigError(f"{where}: missing {key}")
            fields[field_name] = np.asarray(cfg.pop(key), dtype=float)
        for key, (field_name, conv) in _SCALAR_KEYS.items():
            if key in cfg:
                try:
                    fields[field_name] = conv(cfg.pop(key))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{where}: bad value for {key}: "
                                      f"{exc}") from exc
        drive_spec = cfg.pop("drive", 0.0)
        pump_ghz = float(cfg.pop("pump_frequency_ghz", 0.0))
        mode = cfg.pop("wavevector_mode", "adiabatic_formula")
        if cfg:
            raise ConfigError(f"{where}: unknown device keys {sorted(cfg)}")
        try:
            spec = CircuitSpec(**fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        if pump_ghz <= 0:
            raise ConfigError(f"{where}: pump_frequency_ghz must be > 0")
        bundle = DeviceBundle(
            name=name or "custom",
            spec=spec,
            drive_profile=_drive_from_config(drive_spec, length, where),
            pump_frequency_ghz=pump_ghz,
            wavevector_mode=mode,
        )

    if perturb is not None:
        try:
            sigma, seed = float(perturb["sigma"]), int(perturb.get("seed", 0))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"{where}: perturb needs a sigma") from exc
        bundle.profile = perturb_critical_current(bundle.profile, sigma, seed)
    return bundle


def scenarios_from_config(cfg: dict, default_name: str = "scenario") -> list[Scenario]:
    """Expand a parsed config mapping into Scenario objects."""
    if "preset" in cfg:
        extra = set(cfg) - {"preset"}
        if extra:
            raise ConfigError(f"preset configs take no other keys, got "
                              f"{sorted(extra)}")
        try:
            return preset_scenario(cfg["preset"])
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc

    entries = cfg.get("scenarios")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("config must contain a preset or a non-empty "
                          "'scenarios' list")
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"scenarios[{i}] must be a mapping")
        entry = dict(entry)
        where = f"scenarios[{i}]"
        name = entry.pop("name", f"{default_name}_{i}")
        try:
            sweep = entry.pop("sweep")
            grid = _grid_from_config(entry.pop("grid"), where)
            device = entry.pop("device")
        except KeyError as exc:
            raise ConfigError(f"{where}: missing required key {exc}") from exc
        if isinstance(device, dict):
            device = device_from_config(device, where=f"{where}.device")
        if "outputs" in entry:
            entry["outputs"] = tuple(entry["outputs"])
        unknown = set(entry) - _SCENARIO_FIELDS
        if unknown:
            raise ConfigError(f"{where}: unknown scenario keys {sorted(unknown)}")
        try:
            out.append(Scenario(name=name, device=device, sweep=sweep,
                                grid=grid, **entry))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return out


def load_scenarios(path: str) -> list[Scenario]:
    """Load and expand a scenario file."""
    stem = os.path.splitext(os.path.basename(path))[0]
    return scenarios_from_config(load_config(path), default_name=stem)


def load_device(path_or_name: str) -> DeviceBundle:
    """Resolve a device from a builder name or a YAML device file."""
    if path_or_name in dev_mod.DEVICE_BUILDERS:
        return dev_mod.DEVICE_BUILDERS[path_or_name]()
    if os.path.exists(path_or_name):
        cfg = load_config(path_or_name)
        if "device" not in cfg:
            raise ConfigError(f"{path_or_name}: no 'device' section")
        return device_from_config(cfg["device"], where=path_or_name)
    raise ConfigError(f"{path_or_name!r} is neither a known device builder "
                      f"({sorted(dev_mod.DEVICE_BUILDERS)}) nor a config file")
