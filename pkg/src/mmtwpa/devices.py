"""Bundled device families and their operating points.

Two hardware families are provided: a homogeneous design with a ~73 GHz
band edge (single junction per cell, PMR every 3 cells) and a two-junction
family with a lower band edge used both as a homogeneous device and as the
Gaussian-graded adiabatic design.  The graded design varies the junction
critical current and the ground/coupling capacitances together so the
nominal line impedance stays constant while the normalized drive I_pn(x)
follows a Gaussian; the physical input pump current is the same for every
cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .circuit import CircuitSpec, NormalizedProfile, gaussian_drive_profile, normalize_circuit
from .pump import KP_POLY_73GHZ

# Operating pump frequency of the 73 GHz-cutoff homogeneous design, GHz.
# Not part of the hardware table: this is the frequency at which the fitted
# k_p polynomial's zero-drive value equals (k_s + |k_i|)/2 for a 6 GHz
# signal, i.e. where the polynomial is phase-matched at vanishing drive
# (exponent-pair bifurcation at I_pn ~ 0.025), rounded to 0.1 MHz.  The
# idler (7.49 GHz) stays clear of the PMR gap (7.243-7.269 GHz).
PUMP_FREQ_73GHZ_GHZ = 6.7450

# Operating pump frequency of the two-junction family, GHz.
PUMP_FREQ_65GHZ_GHZ = 7.875


@dataclass(eq=False)
class DeviceBundle:
    """A circuit plus its operating point, ready for sweeps."""

    name: str
    spec: CircuitSpec
    drive_profile: np.ndarray          # I_pn per cell at the nominal drive
    pump_frequency_ghz: float
    wavevector_mode: str
    kp_polynomial: tuple = KP_POLY_73GHZ
    profile: NormalizedProfile = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.profile = normalize_circuit(self.spec)

    @property
    def pump_frequency_norm(self) -> float:
        return float(self.profile.from_ghz(self.pump_frequency_ghz))


def conventional_73ghz(length_cells: int = 2037, drive: float = 0.52,
                       loss_tangent: float = 0.0) -> DeviceBundle:
    """Homogeneous single-junction design, PMR every 3 cells.

    4.55 uA junctions with 55 fF shunts, 45 fF ground capacitors, PMRs of
    170 pH / 2.82 pF coupled through 20 fF.  Band edge ~73 GHz; operated
    with the fitted k_p polynomial.
    """
    spec = CircuitSpec(
        critical_current_profile=4.55e-6,
        junction_capacitance_profile=55e-15,
        ground_capacitance_profile=45e-15,
        coupling_capacitance_profile=20e-15,
        resonator_inductance=170e-12,
        resonator_capacitance=2.82e-12,
        pmr_period=3,
        junctions_per_cell=1,
        length_cells=length_cells,
        loss_tangent=loss_tangent,
    )
    return DeviceBundle(
        name="conventional_73ghz",
        spec=spec,
        drive_profile=np.full(length_cells, float(drive)),
        pump_frequency_ghz=PUMP_FREQ_73GHZ_GHZ,
        wavevector_mode="fitted_polynomial",
        kp_polynomial=KP_POLY_73GHZ,
    )


def _two_junction_base(length_cells: int, loss_tangent: float,
                       i0_profile, cg_profile, cc_profile, cj_profile,
                       pmr_period: int = 8, **tlr_fields) -> CircuitSpec:
    return CircuitSpec(
        critical_current_profile=i0_profile,
        junction_capacitance_profile=cj_profile,
        ground_capacitance_profile=cg_profile,
        coupling_capacitance_profile=cc_profile,
        resonator_inductance=247e-12,
        resonator_capacitance=1.533e-12,
        pmr_period=pmr_period,
        junctions_per_cell=2,
        length_cells=length_cells,
        loss_tangent=loss_tangent,
        **tlr_fields,
    )


def conventional_65ghz(length_cells: int = 700, drive: float = 0.6,
                       loss_tangent: float = 0.0) -> DeviceBundle:
    """Homogeneous two-junction design, PMR every 8 cells.

    3.5 uA junctions (two in series per cell) with 40 fF shunts each,
    76.2 fF ground capacitors, PMRs of 247 pH / 1.533 pF through 40 fF.
    """
    spec = _two_junction_base(
        length_cells, loss_tangent,
        i0_profile=3.5e-6, cg_profile=76.2e-15, cc_profile=40e-15,
        cj_profile=40e-15)
    return DeviceBundle(
        name="conventional_65ghz",
        spec=spec,
        drive_profile=np.full(length_cells, float(drive)),
        pump_frequency_ghz=PUMP_FREQ_65GHZ_GHZ,
        wavevector_mode="adiabatic_formula",
    )


def _tlr_geometry(l_r: float, c_r: float, cc_full: float,
                  velocity: float) -> tuple[float, float]:
    """Quarter-wave stub length and C_c*Z_tlr product mirroring a lumped PMR.

    The lumped per-cell loading has a pole at w_rt = 1/sqrt(L_r(C_r+C_c))
    and a zero at w_r = 1/sqrt(L_r C_r).  Matching the stub loading's pole
    position and residue (value and slope of the reciprocal) pins both the
    electrical length theta = w_rt*l/v and the product P = Cc*Z_tlr:
        theta*(1+tan^2)/tan = 2/(1-(w_rt/w_r)^2) - 1,   P = 1/(w_rt*tan).
    The stub's zero at v/(4l) then lands on w_r to within ~1e-4.
    """
    w_r = 1.0 / np.sqrt(l_r * c_r)
    w_rt = 1.0 / np.sqrt(l_r * (c_r + cc_full))
    target = 2.0 / (1.0 - (w_rt / w_r) ** 2) - 1.0

    def f(theta: float) -> float:
        t = np.tan(theta)
        return theta * (1.0 + t * t) / t - target

    theta = brentq(f, 0.3, np.pi / 2.0 - 1e-9, xtol=1e-14)
    length = theta * velocity / w_rt
    product = 1.0 / (w_rt * np.tan(theta))
    return length, product


def floquet_gaussian(length_cells: int = 2000, peak_drive: float = 0.6,
                     fwhm_fraction: float = 0.62, loss_tangent: float = 0.0,
                     pmr_kind: str = "lumped_lc") -> DeviceBundle:
    """Gaussian-graded adiabatic design built on the two-junction family.

    I_pn(x) peaks at the center; the critical current scales as
    I0(x) = I0_center * peak/I_pn(x) (largest junctions at the edges) and
    the capacitances follow 1/I0(x) to hold the nominal impedance constant.
    ``pmr_kind='quarter_wave_tlr'`` swaps the lumped PMRs for quarter-wave
    resonator stubs placed every cell with C_c scaled down accordingly.
    """
    i_pn = gaussian_drive_profile(peak_drive, length_cells, fwhm_fraction)
    mu = peak_drive / i_pn              # mu(center) = 1
    nu = 1.0 / mu
    i0_center = 3.5e-6
    cg0 = 76.2e-15

    if pmr_kind == "lumped_lc":
        spec = _two_junction_base(
            length_cells, loss_tangent,
            i0_profile=i0_center * mu,
            cg_profile=cg0 * nu,
            cc_profile=40e-15 * nu,
            cj_profile=40e-15 * mu)
        bundle_name = "floquet_gaussian"
    elif pmr_kind == "quarter_wave_tlr":
        # One stub per cell carrying the smeared lumped coupler (40 fF / 8
        # cells).  Stub length and the constant C_c(x)*Z_tlr(x) product are
        # pinned by the lumped pole/residue; Z_tlr(x) then runs from ~79 ohm
        # at the center to ~480 ohm at the device ends.
        length, product = _tlr_geometry(247e-12, 1.533e-12, 40e-15, 1.3e8)
        cc = 5e-15 * nu
        spec = _two_junction_base(
            length_cells, loss_tangent,
            i0_profile=i0_center * mu,
            cg_profile=cg0 * nu,
            cc_profile=cc,
            cj_profile=40e-15 * mu,
            pmr_period=1,
            pmr_kind="quarter_wave_tlr",
            tlr_phase_velocity=1.3e8,
            tlr_impedance_profile=product / cc,
            tlr_length=length)
        bundle_name = "floquet_gaussian_tlr"
    else:
        raise ValueError(f"unsupported pmr_kind {pmr_kind} for this design")

    return DeviceBundle(
        name=bundle_name,
        spec=spec,
        drive_profile=i_pn,
        pump_frequency_ghz=PUMP_FREQ_65GHZ_GHZ,
        wavevector_mode="adiabatic_formula",
    )


DEVICE_BUILDERS = {
    "conventional_73ghz": conventional_73ghz,
    "conventional_65ghz": conventional_65ghz,
    "floquet_gaussian": floquet_gaussian,
}
