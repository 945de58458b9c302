"""Figure rendering for scenario results.

Used by the CLI report path: each scenario gets one PNG next to its CSV.
Panels are chosen from whatever columns the sweep produced -- a gain panel
(dB quantities), a quantum-inefficiency panel (log scale), and an extras
panel (reflection, Floquet exponents, dynamic range).  Scenario execution
itself never imports this module.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  - backend must be set first
import numpy as np

from .scenarios import ScenarioResult

_AXIS_LABELS = {
    "signal_frequency_ghz": "signal frequency (GHz)",
    "drive_ipn": "normalized pump current I_pn",
    "loss_tangent": "loss tangent",
    "z_out_ohm": "out-of-band impedance (ohm)",
    "length_cells": "device length (cells)",
    "sigma_ic": "critical-current spread sigma",
}
_LOG_X_SWEEPS = {"loss_tangent", "out_of_band_impedance"}

_GAIN_COLUMNS = ("gain_db", "gain_db_median", "gain_center_db", "gain_ripple_db")
_ETA_COLUMNS = ("eta_bar", "eta_bar_median", "eta_bar_max")
_EXTRA_COLUMNS = ("reflection_db", "reflection_max_db", "max_re_exponent",
                  "pump_reflection_db", "p1db_dbm")


def _column(result: ScenarioResult, name: str) -> np.ndarray:
    vals = []
    for rec in result.records:
        v = rec.get(name, np.nan)
        try:
            vals.append(float(v))
        except (TypeError, ValueError):
            vals.append(np.nan)
    return np.asarray(vals)


def _axis_column(result: ScenarioResult) -> tuple[np.ndarray, str]:
    key = {
        "frequency": "signal_frequency_ghz", "drive": "drive_ipn",
        "loss_tangent": "loss_tangent", "out_of_band_impedance": "z_out_ohm",
        "device_length": "length_cells", "sigma_ic": "sigma_ic",
    }[result.scenario.sweep]
    return _column(result, key), _AXIS_LABELS[key]


def _plot_with_band(ax, x, result, center: str, style: str = "-") -> bool:
    y = _column(result, center)
    if not np.any(np.isfinite(y)):
        return False
    ax.plot(x, y, style, label=center)
    if center.endswith("_median"):
        stem = center[: -len("_median")]
        lo, hi = _column(result, stem + "_p10"), _column(result, stem + "_p90")
        if np.any(np.isfinite(lo)):
            ax.fill_between(x, lo, hi, alpha=0.25, linewidth=0)
    return True


def render_result(result: ScenarioResult, path: str) -> str | None:
    """Render one scenario to ``path``; returns the path, or None if no
    numeric columns were available (every point failed)."""
    x, x_label = _axis_column(result)
    if not np.any(np.isfinite(x)):
        return None
    cols = set(result.columns)
    panels = []
    for group, log_y in ((_GAIN_COLUMNS, False), (_ETA_COLUMNS, True),
                         (_EXTRA_COLUMNS, False)):
        present = [c for c in group if c in cols]
        if present:
            panels.append((present, log_y))
    if not panels:
        return None

    fig, axes = plt.subplots(len(panels), 1, sharex=True,
                             figsize=(6.4, 2.6 * len(panels)), squeeze=False)
    drew_any = False
    for ax, (names, log_y) in zip(axes[:, 0], panels):
        drew = False
        for name in names:
            drew |= _plot_with_band(ax, x, result, name)
        if log_y and drew:
            y = _column(result, names[0])
            if np.any(y[np.isfinite(y)] > 0):
                ax.set_yscale("log")
        if result.scenario.sweep in _LOG_X_SWEEPS and np.all(x[np.isfinite(x)] > 0):
            ax.set_xscale("log")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8, loc="best")
        drew_any |= drew
    if not drew_any:
        plt.close(fig)
        return None
    axes[-1, 0].set_xlabel(x_label)
    axes[0, 0].set_title(result.name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_all(results, out_dir: str) -> dict[str, str]:
    """Render every result to ``<out_dir>/<name>.png``; skips empty ones."""
    import os

    paths = {}
    for result in results:
        target = os.path.join(out_dir, f"{result.name}.png")
        written = render_result(result, target)
        if written:
            paths[result.name] = written
    return paths
