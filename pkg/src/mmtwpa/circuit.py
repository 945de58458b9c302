"""Physical circuit parameters and their dimensionless per-cell profiles.

A device is a chain of unit cells: a series Josephson element (one or more
junctions), a capacitance to ground, and every ``pmr_period`` cells a shunt
LC resonator attached through a coupling capacitor.  All internal physics
runs in dimensionless units referenced to one chosen cell; this module owns
the conversion in both directions and the generation of spatial profiles
(homogeneous, Gaussian drive, random critical-current disorder).

Normalization conventions, with the reference cell marked ``0``:

* cell Josephson inductance ``L_J0 = n_jj * phi0 / I_0ref`` (``phi0`` the
  reduced flux quantum, junctions in series add),
* reference frequency ``omega_c = 1/sqrt(L_J0 * C_g0)``,
* reference impedance ``z_ref = sqrt(L_J0 / C_g0)``,
* ``mu(x) = I_0(x)/I_0ref``, ``nu(x) = C_g(x)/C_g0``,
  ``gamma_c(x) = C_c(x)/C_g0``.

The junction plasma frequency is assumed position independent, i.e. the
junction capacitance scales with the critical current; the normalized cell
junction capacitance is then ``beta * mu(x)`` with a single global ``beta``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.constants import e as _ECHARGE, hbar as _HBAR

# Reduced flux quantum hbar/2e in Wb.
PHI0_BAR = _HBAR / (2.0 * _ECHARGE)

PMR_KINDS = ("lumped_lc", "quarter_wave_tlr", "coplanar_stub")


def _as_profile(values, length: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.size == 1:
        arr = np.full(length, float(arr[0]))
    if arr.shape != (length,):
        raise ValueError(f"{name} must have length {length}, got shape {arr.shape}")
    return arr


@dataclass(eq=False)
class CircuitSpec:
    """SI description of a device, one entry per unit cell where applicable.

    Scalars passed for the per-cell profiles are broadcast to the full
    length.  ``critical_current_profile`` and ``junction_capacitance_profile``
    are per junction; junctions within a cell are identical and in series.
    """

    critical_current_profile: np.ndarray    # A, per junction
    junction_capacitance_profile: np.ndarray  # F, per junction
    ground_capacitance_profile: np.ndarray  # F
    coupling_capacitance_profile: np.ndarray  # F, value of the PMR coupler serving the cell
    resonator_inductance: float             # H
    resonator_capacitance: float            # F
    pmr_period: int
    junctions_per_cell: int
    length_cells: int
    loss_tangent: float = 0.0
    pmr_kind: str = "lumped_lc"
    tlr_phase_velocity: float = 1.3e8       # m/s, distributed kinds only
    tlr_impedance_profile: np.ndarray | None = None  # ohm, distributed kinds only
    tlr_length: float = 0.0                 # m, distributed kinds only

    def __post_init__(self) -> None:
        n = int(self.length_cells)
        self.length_cells = n
        self.pmr_period = int(self.pmr_period)
        self.junctions_per_cell = int(self.junctions_per_cell)
        self.critical_current_profile = _as_profile(
            self.critical_current_profile, n, "critical_current_profile")
        self.junction_capacitance_profile = _as_profile(
            self.junction_capacitance_profile, n, "junction_capacitance_profile")
        self.ground_capacitance_profile = _as_profile(
            self.ground_capacitance_profile, n, "ground_capacitance_profile")
        self.coupling_capacitance_profile = _as_profile(
            self.coupling_capacitance_profile, n, "coupling_capacitance_profile")
        if self.tlr_impedance_profile is not None:
            self.tlr_impedance_profile = _as_profile(
                self.tlr_impedance_profile, n, "tlr_impedance_profile")
        self.validate()

    def validate(self) -> None:
        if self.length_cells < 1:
            raise ValueError("length_cells must be positive")
        if self.pmr_period < 1:
            raise ValueError("pmr_period must be >= 1")
        if self.junctions_per_cell < 1:
            raise ValueError("junctions_per_cell must be >= 1")
        if self.pmr_kind not in PMR_KINDS:
            raise ValueError(f"pmr_kind must be one of {PMR_KINDS}")
        if self.loss_tangent < 0:
            raise ValueError("loss_tangent must be >= 0")
        for name in ("critical_current_profile", "junction_capacitance_profile",
                     "ground_capacitance_profile", "coupling_capacitance_profile"):
            arr = getattr(self, name)
            if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} entries must be positive and finite")
        if self.resonator_inductance <= 0 or self.resonator_capacitance <= 0:
            raise ValueError("resonator L and C must be positive")
        if self.pmr_kind != "lumped_lc":
            if self.tlr_impedance_profile is None:
                raise ValueError(f"{self.pmr_kind} requires tlr_impedance_profile")
            if np.any(self.tlr_impedance_profile <= 0):
                raise ValueError("tlr_impedance_profile entries must be positive")
            if self.tlr_length <= 0:
                raise ValueError(f"{self.pmr_kind} requires tlr_length > 0")
            if self.tlr_phase_velocity <= 0:
                raise ValueError("tlr_phase_velocity must be positive")


@dataclass(eq=False)
class NormalizedProfile:
    """Dimensionless per-cell profiles plus the reference scales.

    Treated as immutable after construction; transformations return new
    instances.  ``gamma_c`` holds the bare ratio C_c(x)/C_g0 of the coupler
    serving each cell; the dynamically acting, period-smeared coupling is
    :meth:`gamma_eff`.
    """

    mu: np.ndarray
    nu: np.ndarray
    gamma_c: np.ndarray
    beta: float
    lr_tilde: float
    cr_tilde: float
    omega_c: float        # rad/s
    ej0: float            # J, per junction
    omega_r: float        # normalized PMR zero (reference cell)
    omega_rt: float       # normalized PMR pole (reference cell)
    pmr_period: int
    loss_tangent: float
    i0_ref: float         # A, per junction
    cg0: float            # F
    z_ref: float          # ohm
    junctions_per_cell: int
    reference_cell: int
    pmr_kind: str = "lumped_lc"
    tlr_length: float = 0.0
    tlr_phase_velocity: float = 0.0
    tlr_impedance: np.ndarray | None = None       # ohm per cell
    coupling_cap_farad: np.ndarray | None = None  # F per cell, distributed kinds

    @property
    def length_cells(self) -> int:
        return self.mu.shape[0]

    def gamma_eff(self) -> np.ndarray:
        """Coupling capacitance ratio smeared over the insertion period."""
        return self.gamma_c / self.pmr_period

    def pmr_pole(self, cells=None) -> np.ndarray:
        """Normalized local pole of the PMR admittance, per cell.

        The resonator L and C are fixed hardware; only the coupler C_c(x)
        tracks the cell, so the pole 1/sqrt(L_r (C_r + C_c(x))) drifts where
        the profile is graded.
        """
        gc = self.gamma_c if cells is None else self.gamma_c[cells]
        return 1.0 / np.sqrt(self.lr_tilde * (self.cr_tilde + gc))

    def pmr_gap(self) -> tuple[float, float]:
        """Normalized stopband (lowest local pole, zero) of the PMR loading."""
        return float(np.min(self.pmr_pole())), self.omega_r

    def to_hz(self, omega_norm) -> np.ndarray:
        """Normalized angular frequency to frequency in Hz (sign preserved)."""
        return np.asarray(omega_norm) * self.omega_c / (2.0 * np.pi)

    def from_ghz(self, f_ghz) -> np.ndarray:
        """Frequency in GHz to normalized angular frequency."""
        return np.asarray(f_ghz) * 1e9 * 2.0 * np.pi / self.omega_c

    def denormalize(self) -> CircuitSpec:
        """Reconstruct the SI description (junction capacitance as enforced)."""
        i0 = self.i0_ref * self.mu
        cj = self.beta * self.mu * self.cg0 * self.junctions_per_cell
        cg = self.cg0 * self.nu
        cc = self.cg0 * self.gamma_c
        lj0 = self.junctions_per_cell * PHI0_BAR / self.i0_ref
        return CircuitSpec(
            critical_current_profile=i0,
            junction_capacitance_profile=cj,
            ground_capacitance_profile=cg,
            coupling_capacitance_profile=cc,
            resonator_inductance=self.lr_tilde * lj0,
            resonator_capacitance=self.cr_tilde * self.cg0,
            pmr_period=self.pmr_period,
            junctions_per_cell=self.junctions_per_cell,
            length_cells=self.length_cells,
            loss_tangent=self.loss_tangent,
            pmr_kind=self.pmr_kind,
            tlr_phase_velocity=self.tlr_phase_velocity or 1.3e8,
            tlr_impedance_profile=None if self.tlr_impedance is None else self.tlr_impedance.copy(),
            tlr_length=self.tlr_length,
        )


def normalize_circuit(spec: CircuitSpec, reference_cell: int | None = None) -> NormalizedProfile:
    """Convert an SI circuit description to dimensionless per-cell profiles.

    The reference cell defaults to the cell with the smallest critical
    current, which is where the normalized drive amplitude peaks for graded
    designs (any cell of a homogeneous device).  The junction capacitance is
    re-expressed through the constant-plasma-frequency rule C_J(x) ~ I_0(x):
    beta is taken at the reference cell and the per-cell value is beta*mu(x)
    regardless of small deviations in the input profile.
    """
    spec.validate()
    if reference_cell is None:
        reference_cell = int(np.argmin(spec.critical_current_profile))
    if not 0 <= reference_cell < spec.length_cells:
        raise ValueError("reference_cell out of bounds")

    i0_ref = float(spec.critical_current_profile[reference_cell])
    cg0 = float(spec.ground_capacitance_profile[reference_cell])
    cj_cell_ref = float(spec.junction_capacitance_profile[reference_cell]) / spec.junctions_per_cell
    lj0 = spec.junctions_per_cell * PHI0_BAR / i0_ref

    mu = spec.critical_current_profile / i0_ref
    nu = spec.ground_capacitance_profile / cg0
    gamma_c = spec.coupling_capacitance_profile / cg0
    beta = cj_cell_ref / cg0
    lr_tilde = spec.resonator_inductance / lj0
    cr_tilde = spec.resonator_capacitance / cg0
    omega_c = 1.0 / np.sqrt(lj0 * cg0)
    omega_r = 1.0 / np.sqrt(lr_tilde * cr_tilde)
    omega_rt = 1.0 / np.sqrt(lr_tilde * (cr_tilde + gamma_c[reference_cell]))

    return NormalizedProfile(
        mu=mu,
        nu=nu,
        gamma_c=gamma_c,
        beta=beta,
        lr_tilde=lr_tilde,
        cr_tilde=cr_tilde,
        omega_c=omega_c,
        ej0=PHI0_BAR * i0_ref,
        omega_r=float(omega_r),
        omega_rt=float(omega_rt),
        pmr_period=spec.pmr_period,
        loss_tangent=spec.loss_tangent,
        i0_ref=i0_ref,
        cg0=cg0,
        z_ref=float(np.sqrt(lj0 / cg0)),
        junctions_per_cell=spec.junctions_per_cell,
        reference_cell=reference_cell,
        pmr_kind=spec.pmr_kind,
        tlr_length=spec.tlr_length,
        tlr_phase_velocity=spec.tlr_phase_velocity,
        tlr_impedance=None if spec.tlr_impedance_profile is None
        else spec.tlr_impedance_profile.copy(),
        coupling_cap_farad=spec.coupling_capacitance_profile.copy(),
    )


def cell_centers(length: int) -> np.ndarray:
    """Sampling positions of the per-cell profiles, in cell units.

    Cell j occupies [j, j+1); its parameters are sampled at the midpoint.
    Midpoint sampling keeps even-symmetric profiles exactly symmetric about
    the device center for any cell count.
    """
    return np.arange(length) + 0.5


def gaussian_drive_profile(peak_drive: float, length: int, fwhm_fraction: float) -> np.ndarray:
    """Per-cell normalized drive I_pn(x) with a Gaussian envelope.

    Centered on the device middle, maximum ``peak_drive``, full width at
    half maximum ``fwhm_fraction * length``.
    """
    if not 0.0 < peak_drive < 1.0:
        raise ValueError("peak_drive must lie in (0, 1): the pump cannot reach "
                         "the junction critical current")
    if fwhm_fraction <= 0:
        raise ValueError("fwhm_fraction must be positive")
    if length < 1:
        raise ValueError("length must be positive")
    sigma = fwhm_fraction * length / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    x = cell_centers(length)
    return peak_drive * np.exp(-((x - length / 2.0) ** 2) / (2.0 * sigma**2))


def perturb_critical_current(profile: NormalizedProfile, sigma: float,
                             seed: int) -> NormalizedProfile:
    """Apply iid relative Gaussian disorder to the critical-current profile.

    mu(x) -> mu(x) * (1 + sigma * eps(x)) with eps standard normal, one draw
    per cell; deterministic for a fixed seed.  The junction capacitance
    follows mu through the constant-plasma-frequency rule, so no other field
    changes.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return dataclasses.replace(profile, mu=profile.mu.copy())
    eps = np.random.default_rng(seed).standard_normal(profile.length_cells)
    factor = 1.0 + sigma * eps
    if np.any(factor <= 0):
        raise ValueError("perturbation drove a critical current <= 0; "
                         "reduce sigma")
    return dataclasses.replace(profile, mu=profile.mu * factor)
