"""Multimode quantum dynamics of Josephson traveling-wave parametric amplifiers.

Frequency-domain transfer-matrix simulator for TWPAs built from Josephson
junction transmission lines with phase-matching resonator loading.  Computes
multimode scattering, added noise and quantum efficiency, Floquet mode
structure, dynamic range, and directionality for both homogeneous devices and
devices with adiabatically varying cell parameters.
"""

from .circuit import CircuitSpec, NormalizedProfile, gaussian_drive_profile, perturb_critical_current
from .modes import ModeLadder, band_edge_frequency, validate_modes
from .pump import PumpSolution, amplitude_from_drive, pump_wavevector, solve_pump
from .coupling import BoundaryMatrices, ModeMatrices, assemble_coupling_matrix, mode_impedances
from .solver import ScatteringSolution, scattering, transfer_matrix
from .floquet import FloquetModes, floquet_modes, mode_amplitudes
from .metrics import (
    added_noise_photons,
    estimate_dynamic_range,
    gain_db,
    noise_decomposition,
    quantum_efficiency,
    quantum_inefficiency,
)
from .scenarios import Scenario, ScenarioResult, available_presets, preset_scenario, run_scenario

__all__ = [
    "CircuitSpec",
    "NormalizedProfile",
    "gaussian_drive_profile",
    "perturb_critical_current",
    "ModeLadder",
    "band_edge_frequency",
    "validate_modes",
    "PumpSolution",
    "amplitude_from_drive",
    "pump_wavevector",
    "solve_pump",
    "BoundaryMatrices",
    "ModeMatrices",
    "assemble_coupling_matrix",
    "mode_impedances",
    "ScatteringSolution",
    "scattering",
    "transfer_matrix",
    "FloquetModes",
    "floquet_modes",
    "mode_amplitudes",
    "added_noise_photons",
    "estimate_dynamic_range",
    "gain_db",
    "noise_decomposition",
    "quantum_efficiency",
    "quantum_inefficiency",
    "Scenario",
    "ScenarioResult",
    "available_presets",
    "preset_scenario",
    "run_scenario",
]

__version__ = "0.1.0"
