"""Classical pump solution under the stiff (undepleted) approximation.

The strong pump is treated as a classical traveling wave; the modes see it
only through the per-cell flux-derivative amplitude A_px0(x) and the
accumulated phase of its wavevector k_p(x).  Junction nonlinearity converts
the normalized drive current I_pn(x) = I_p/I_0(x) into the amplitude via
I_pn = 2 J1(A) - beta omega_p^2 A, solved on the monotone branch.  Pump
attenuation from dielectric loss is neglected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import j0, j1, jn

from .circuit import NormalizedProfile

# Fitted k_p(I_pn) cubic (rad/cell) used by the homogeneous 73 GHz-cutoff
# design; coefficients in ascending powers of I_pn.  Graded designs use the
# adiabatic formula instead.
KP_POLY_73GHZ = (0.08195, 0.0, 1.1601e-2, -4.996e-3)

WAVEVECTOR_MODES = ("fitted_polynomial", "adiabatic_formula")


def _drive_residual(a: float, i_pn: float, beta_w2: float) -> float:
    return 2.0 * j1(a) - beta_w2 * a - i_pn


def _turning_amplitude(beta_w2: float) -> float:
    """First stationary point of 2 J1(A) - beta omega^2 A.

    d/dA [2 J1(A)] = J0(A) - J2(A); the branch ends where that equals
    beta omega^2.  The root lies below the first zero of J1' at A = 1.8412
    for any positive beta omega^2.
    """
    f = lambda a: (j0(a) - jn(2, a)) - beta_w2
    if f(1e-12) <= 0:
        raise ValueError("junction capacitance term exceeds the Josephson "
                         "response; no propagating pump branch")
    return brentq(f, 1e-12, 1.8411837813406593, xtol=1e-15)


def amplitude_from_drive(i_pn, beta: float, omega_p: float):
    """Invert the drive relation for the flux-derivative amplitude A_px0.

    Scalar or array ``i_pn``; root of 2 J1(A) - beta omega_p^2 A = I_pn on
    the monotone branch, polished to |residual| < 1e-12.  Raises for drives
    beyond the branch turning point (overdriven junction).
    """
    beta_w2 = beta * omega_p * omega_p
    a_turn = _turning_amplitude(beta_w2)
    i_max = 2.0 * j1(a_turn) - beta_w2 * a_turn

    def solve_one(val: float) -> float:
        if val < 0:
            raise ValueError("drive must be >= 0")
        if val == 0.0:
            return 0.0
        if val >= i_max:
            raise ValueError(f"drive {val:.4f} beyond the turning point "
                             f"(max {i_max:.4f}): overdriven junction")
        return brentq(_drive_residual, 0.0, a_turn, args=(val, beta_w2),
                      xtol=1e-15, rtol=8.9e-16)

    arr = np.asarray(i_pn, dtype=float)
    if arr.ndim == 0:
        return solve_one(float(arr))
    out = np.array([solve_one(v) for v in arr.ravel()]).reshape(arr.shape)
    return out


def drive_from_amplitude(a_px0, beta: float, omega_p: float):
    """Forward drive relation I_pn = 2 J1(A) - beta omega_p^2 A."""
    a = np.asarray(a_px0, dtype=float)
    return 2.0 * j1(a) - beta * omega_p * omega_p * a


def _effective_pump_capacitance(profile: NormalizedProfile, omega_p: float) -> np.ndarray:
    """Per-cell loaded capacitance at the pump frequency.

    Dispatches on the resonator kind so distributed stubs see their own
    loading curve, not the lumped pole formula.
    """
    from .coupling import capacitance_diagonal

    cap = capacitance_diagonal(omega_p, profile,
                               np.arange(profile.length_cells))
    return np.real(cap)


def pump_wavevector(mode: str, i_pn, profile: NormalizedProfile, omega_p: float,
                    cell=None, polynomial=KP_POLY_73GHZ):
    """Pump wavevector in rad/cell for the given drive value(s).

    ``fitted_polynomial`` evaluates the calibration cubic in I_pn;
    ``adiabatic_formula`` uses the local linearized dispersion
    k_p = omega_p sqrt(c_p / (mu (2 J1(A)/A - beta omega_p^2))) with the
    loaded capacitance c_p at the cell (``cell`` indexes the profile; None
    means the reference cell for scalars or all cells for arrays).
    """
    if mode not in WAVEVECTOR_MODES:
        raise ValueError(f"wavevector mode must be one of {WAVEVECTOR_MODES}")
    i_pn = np.asarray(i_pn, dtype=float)
    if mode == "fitted_polynomial":
        coeffs = np.asarray(polynomial, dtype=float)
        return np.polynomial.polynomial.polyval(i_pn, coeffs)

    if cell is None:
        cell = (profile.reference_cell if i_pn.ndim == 0
                else np.arange(profile.length_cells))
    c_p = _effective_pump_capacitance(profile, omega_p)[cell]
    mu = profile.mu[cell]
    a = amplitude_from_drive(i_pn, profile.beta, omega_p)
    # 2 J1(A)/A -> 1 as A -> 0; evaluate stably.
    with np.errstate(invalid="ignore"):
        chord = np.where(np.asarray(a) > 1e-8, 2.0 * j1(a) / np.where(a == 0, 1, a),
                         1.0 - np.asarray(a) ** 2 / 8.0)
    radicand = c_p / (mu * (chord - profile.beta * omega_p**2))
    if np.any(radicand <= 0):
        raise ValueError("negative radicand in the adiabatic pump dispersion; "
                         "pump beyond the local band")
    return omega_p * np.sqrt(radicand)


@dataclass(eq=False)
class PumpSolution:
    """Solved classical pump over the whole device.

    Per-cell arrays are sampled at cell centers; ``boundary_phase`` holds
    the accumulated phase Int_0^x k_p dx' at the L+1 cell boundaries, so the
    phase at any interior point is the piecewise-linear interpolant.
    """

    pump_frequency: float            # normalized
    drive_profile: np.ndarray        # I_pn(x)
    amplitude_profile: np.ndarray    # A_px0(x)
    wavevector_profile: np.ndarray   # rad/cell
    boundary_phase: np.ndarray       # rad, length L+1
    pump_impedance_profile: np.ndarray  # ohm
    wavevector_mode: str
    pump_current: float = 0.0        # A, physical input current

    @property
    def accumulated_phase(self) -> np.ndarray:
        """Phase at cell centers."""
        return self.phase_at(np.arange(self.drive_profile.size) + 0.5)

    def phase_at(self, x):
        grid = np.arange(self.boundary_phase.size, dtype=float)
        return np.interp(x, grid, self.boundary_phase)

    def wavevector_at(self, x):
        idx = np.clip(np.floor(np.asarray(x)).astype(int), 0,
                      self.wavevector_profile.size - 1)
        return self.wavevector_profile[idx]

    def total_phase(self) -> float:
        return float(self.boundary_phase[-1])


def solve_pump(profile: NormalizedProfile, omega_p: float, drive_profile,
               wavevector_mode: str = "adiabatic_formula",
               polynomial=KP_POLY_73GHZ) -> PumpSolution:
    """Solve amplitude, wavevector, phase, and impedance for a drive profile.

    ``drive_profile`` is I_pn per cell (scalars broadcast).  The physical
    pump current implied by the profile is I_pn(x) * I_0(x), constant across
    the device for profiles generated from one input current; the stored
    value uses the reference cell.
    """
    drive = np.atleast_1d(np.asarray(drive_profile, dtype=float))
    if drive.size == 1:
        drive = np.full(profile.length_cells, float(drive[0]))
    if drive.shape != (profile.length_cells,):
        raise ValueError("drive profile length must match the device")

    amp = amplitude_from_drive(drive, profile.beta, omega_p)
    kp = pump_wavevector(wavevector_mode, drive, profile, omega_p,
                         cell=np.arange(profile.length_cells), polynomial=polynomial)
    kp = np.asarray(kp, dtype=float)
    boundary_phase = np.concatenate(([0.0], np.cumsum(kp)))

    c_p = _effective_pump_capacitance(profile, omega_p)
    with np.errstate(invalid="ignore", divide="ignore"):
        chord = np.where(amp > 1e-8, 2.0 * j1(amp) / np.where(amp == 0, 1, amp),
                         1.0 - amp**2 / 8.0)
    z_nl = profile.z_ref / np.sqrt(
        c_p * profile.mu * (chord - profile.beta * omega_p**2))

    i_ref = float(drive[profile.reference_cell] * profile.i0_ref)
    return PumpSolution(
        pump_frequency=float(omega_p),
        drive_profile=drive,
        amplitude_profile=np.asarray(amp, dtype=float),
        wavevector_profile=kp,
        boundary_phase=boundary_phase,
        pump_impedance_profile=z_nl,
        wavevector_mode=wavevector_mode,
        pump_current=i_ref,
    )


def pump_reflection(profile: NormalizedProfile, pump: PumpSolution,
                    z_port: float = 50.0, floor_db: float = -200.0) -> float:
    """Pump power reflection in dB from the two-interface estimate.

    Interfaces at the device ends with the local nonlinear pump impedance,
    round-trip phase 2 * Int k_p; interior adiabatic grading contributes no
    additional reflection at this order.
    """
    z_in = pump.pump_impedance_profile[0]
    z_out = pump.pump_impedance_profile[-1]
    r01 = (z_in - z_port) / (z_in + z_port)
    r12 = (z_port - z_out) / (z_port + z_out)
    ph = np.exp(2j * pump.total_phase())
    s11 = (r01 + r12 * ph) / (1.0 + r01 * r12 * ph)
    power = abs(s11) ** 2
    if power <= 10.0 ** (floor_db / 10.0):
        return floor_db
    return float(10.0 * np.log10(power))
