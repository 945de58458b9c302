"""Position-dependent matrices of the multimode spatial equation of motion.

For m ladder modes the forward/backward field vector has 2m slots (forward
block first, backward block second, each in ladder order).  This module
assembles, per cell:

* the loaded capacitance diagonal C_nn (lumped PMR factor or distributed
  resonator variants),
* the inverse-inductance matrix, a Toeplitz of even Bessel functions of the
  pump amplitude dressed with accumulated pump phases,
* the nonlinear impedance Z_n = sqrt(L_nn / C_nn),
* the 2m x 2m coupling matrix K(x) of dA/dx = K A, and
* the port boundary matrices.

Cell parameters are piecewise constant, so within a cell K(x) varies only
through the pump phase: K(x) = D(phi) K_cell D(phi)^-1 with D the diagonal
phase frame exp(i 2 n phi(x)) repeated over both direction blocks.  The
batched :class:`CellMatrices` precomputes K_cell for every cell; the single
position helpers below wrap the same arithmetic for one x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
from scipy.special import jn

from .circuit import NormalizedProfile
from .modes import ModeLadder

if TYPE_CHECKING:
    from .pump import PumpSolution


class PoleProximityError(ValueError):
    """Requested frequency sits numerically on a resonator pole."""


def pmr_factor(omega, profile: NormalizedProfile, cell=None):
    """Loading factor alpha_r(omega) of the shunt LC resonator.

    (1 - w^2/w_r^2) / (1 - w^2/w_rt^2): unity at dc, zero at the resonator
    frequency w_r, pole at the coupled frequency w_rt < w_r.  ``cell``
    selects the local pole (the coupler capacitance varies along graded
    devices); None uses the reference cell.  ``omega`` and ``cell``
    broadcast.
    """
    w = np.asarray(omega, dtype=float)
    if cell is None:
        pole = profile.omega_rt
    else:
        pole = profile.pmr_pole(np.asarray(cell))
    if np.any(np.abs(np.abs(w) - pole) < 1e-6 * pole):
        raise PoleProximityError("frequency within 1e-6 of the PMR pole")
    ratio = (1.0 - w**2 / profile.omega_r**2) / (1.0 - w**2 / pole**2)
    return ratio if ratio.shape else float(ratio)


def _distributed_factor(omega_norm, profile: NormalizedProfile, cells) -> np.ndarray:
    """Resonance factor of a quarter-wave TLR behind the coupler, per cell.

    1 / (1 - w C_c Z_tlr tan(w l / v)) with w in rad/s; even in w.  The
    lumped analog of this factor is alpha_r.
    """
    w_si = np.abs(np.asarray(omega_norm, dtype=float)) * profile.omega_c
    cc = profile.coupling_cap_farad[cells]
    z = profile.tlr_impedance[cells]
    arg = w_si * profile.tlr_length / profile.tlr_phase_velocity
    denom = 1.0 - w_si * cc * z * np.tan(arg)
    if np.any(np.abs(denom) < 1e-6):
        raise PoleProximityError("frequency on a TLR resonance")
    if np.any(np.abs(np.cos(arg)) < 1e-9):
        raise PoleProximityError("frequency on a bare TLR tan() pole")
    return 1.0 / denom


def _stub_ground_factor(omega_norm, profile: NormalizedProfile, cells) -> np.ndarray:
    """Ground capacitor realized as a shorted coplanar stub: effective nu.

    tan(w l / v) / (w C_g0 Z_tlr), in units of C_g0; reduces to the lumped
    ground capacitance when w l / v << 1.
    """
    w_si = np.abs(np.asarray(omega_norm, dtype=float)) * profile.omega_c
    z = profile.tlr_impedance[cells]
    arg = w_si * profile.tlr_length / profile.tlr_phase_velocity
    if np.any(np.abs(np.cos(arg)) < 1e-9):
        raise PoleProximityError("frequency on a stub tan() pole")
    return np.tan(arg) / (w_si * profile.cg0 * z)


def capacitance_diagonal(omegas, profile: NormalizedProfile, cells) -> np.ndarray:
    """Loaded cell capacitance entries for ``cells`` x ``omegas``.

    ``cells`` indexes the profile; output shape (n_cells, n_omegas), with
    scalar axes squeezed away.
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    cells_in = np.asarray(cells)
    cidx = np.atleast_1d(cells_in)[:, None]  # (n_cells, 1) against (n_omegas,)
    nu = profile.nu[cidx]
    gamma = profile.gamma_eff()[cidx]
    if profile.pmr_kind == "lumped_lc":
        out = nu + gamma * pmr_factor(w, profile, cell=cidx)
    elif profile.pmr_kind == "quarter_wave_tlr":
        out = nu + gamma * _distributed_factor(w, profile, cidx)
    else:  # coplanar_stub: distributed ground capacitor, lumped PMRs on top
        out = _stub_ground_factor(w, profile, cidx) + \
            gamma * pmr_factor(w, profile, cell=cidx)
    if cells_in.ndim == 0:
        out = out[0]
    if np.asarray(omegas).ndim == 0:
        out = out[..., 0]
    return out


def _bessel_toeplitz(amplitudes: np.ndarray, ladder: ModeLadder) -> np.ndarray:
    """J_{2(n_c - n_r)}(A) for every cell: shape (L, m, m), real."""
    diff = ladder.indices[None, :] - ladder.indices[:, None]  # n_c - n_r
    orders = np.abs(2 * diff)
    max_order = orders.max()
    table = jn(np.arange(max_order + 1)[None, :], amplitudes[:, None])
    return table[:, orders]


def loss_rates(ladder: ModeLadder, loss_tangent: float) -> np.ndarray:
    """Per-slot dielectric loss rate gamma = |w| tan(delta), length 2m."""
    g = np.abs(ladder.frequencies) * loss_tangent
    return np.concatenate([g, g])


def sign_metric(ladder: ModeLadder) -> np.ndarray:
    """Commutator metric J over the 2m slots: sgn(w_n) on both blocks."""
    return np.concatenate([ladder.signs, ladder.signs])


def flux_metric(ladder: ModeLadder) -> np.ndarray:
    """Conserved quadratic form Sigma of the lossless generator: J1 (+) -J1."""
    return np.concatenate([ladder.signs, -ladder.signs])


@dataclass(eq=False)
class ModeMatrices:
    """Frequency-basis matrices at one position (spec-level reference API)."""

    x: float
    omegas: np.ndarray          # signed, normalized
    cmat: np.ndarray            # (m,) loaded capacitance diagonal
    linv: np.ndarray            # (m, m) inverse inductance
    z: np.ndarray               # (m,) nonlinear impedance, normalized
    k11: np.ndarray
    k12: np.ndarray
    k21: np.ndarray
    k22: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return np.diag(self.omegas)

    def k_full(self) -> np.ndarray:
        return np.block([[self.k11, self.k12], [self.k21, self.k22]])


@dataclass(eq=False)
class BoundaryMatrices:
    """Port continuity matrices; diagonal per mode, symmetric blocks."""

    bc11: np.ndarray  # (m,)
    bc12: np.ndarray  # (m,)

    @property
    def bc21(self) -> np.ndarray:
        return self.bc12

    @property
    def bc22(self) -> np.ndarray:
        return self.bc11

    def full(self) -> np.ndarray:
        m = self.bc11.size
        out = np.zeros((2 * m, 2 * m), dtype=complex)
        idx = np.arange(m)
        out[idx, idx] = self.bc11
        out[m + idx, m + idx] = self.bc11
        out[idx, m + idx] = self.bc12
        out[m + idx, idx] = self.bc12
        return out


def boundary_matrices(z_device, z_port) -> BoundaryMatrices:
    """Flux and current continuity at a device/port interface.

    Maps the port-side vector to the device-side vector; both impedances in
    the same units, per mode.  The blocks satisfy bc11^2 - bc12^2 = 1, so
    the interface is lossless and invertible.
    """
    z_device = np.asarray(z_device, dtype=complex)
    z_port = np.asarray(z_port, dtype=complex)
    if np.any(np.real(z_port) <= 0):
        raise ValueError("port impedances must have positive real part")
    ratio = np.sqrt(z_port / z_device)
    return BoundaryMatrices(bc11=(ratio + 1.0 / ratio) / 2.0,
                            bc12=(ratio - 1.0 / ratio) / 2.0)


def constant_port(z_ohm: float = 50.0) -> Callable[[float], float]:
    """Frequency-independent port impedance, |f| in Hz -> ohm."""
    return lambda f_hz: z_ohm


def linear_impedance_ohm(profile: NormalizedProfile, ladder: ModeLadder,
                         cell: int) -> np.ndarray:
    """Undriven per-mode impedance of one cell in ohm, PMR loading included.

    This is the small-signal line impedance a network analyzer would see
    with the pump off; ports matched to it leave only the pump-induced
    impedance shift as residual boundary mismatch.
    """
    w = ladder.frequencies
    cdiag = capacitance_diagonal(w, profile, int(cell))
    ldiag = 1.0 / (profile.mu[int(cell)] * (1.0 - profile.beta * w**2))
    return np.real(np.sqrt(ldiag.astype(complex) / cdiag)) * profile.z_ref


def stepwise_port(z_in_band: float = 50.0, z_out_of_band: float = 1000.0,
                  cutoff_hz: float = 16e9) -> Callable[[float], float]:
    """Stepwise out-of-band port model: z_in below the cutoff, z_out above."""

    def port(f_hz: float) -> float:
        return z_in_band if abs(f_hz) <= cutoff_hz else z_out_of_band

    return port


class CellMatrices:
    """Batched per-cell assembly of K and its constituents for a device.

    ``k_cell[l]`` is K at cell l in the zero-phase pump frame with loss
    included; the physical K at position x inside cell l is the elementwise
    phase dressing k_cell[l] * exp(i * delta * phi(x)).
    """

    def __init__(self, profile: NormalizedProfile, ladder: ModeLadder,
                 pump: "PumpSolution", loss_tangent: float | None = None,
                 forward_backward: bool = True):
        if loss_tangent is None:
            loss_tangent = profile.loss_tangent
        L = profile.length_cells
        m = ladder.m
        w = ladder.frequencies
        cells = np.arange(L)

        cdiag = capacitance_diagonal(w, profile, cells)          # (L, m)
        toep = _bessel_toeplitz(pump.amplitude_profile, ladder)  # (L, m, m)
        m0 = profile.mu[:, None, None] * (toep - profile.beta * np.diag(w**2))
        lmat = np.linalg.inv(m0)                                 # (L, m, m)
        ldiag = np.einsum("lii->li", lmat)
        zdiag = np.sqrt(ldiag.astype(complex) / cdiag)           # (L, m)
        if L >= 3:
            zx = np.gradient(zdiag, axis=0, edge_order=2)
        elif L == 2:
            zx = np.gradient(zdiag, axis=0, edge_order=1)
        else:
            zx = np.zeros_like(zdiag)

        sqw = np.sqrt(np.abs(w))
        left = (ladder.signs * sqw)[None, :] / np.sqrt(zdiag)    # (L, m)
        right = sqw[None, :] / np.sqrt(zdiag)
        x_sand = left[:, :, None] * lmat * right[:, None, :]     # (L, m, m)
        y_diag = w[None, :] * zdiag * cdiag                      # (L, m)
        gz = zx / (2.0 * zdiag)                                  # (L, m)

        k = np.zeros((L, 2 * m, 2 * m), dtype=complex)
        idx = np.arange(m)
        k11 = 0.5j * x_sand
        k11[:, idx, idx] += 0.5j * y_diag
        k[:, :m, :m] = k11
        k[:, m:, m:] = -k11
        if forward_backward:
            k12 = -0.5j * x_sand
            k12[:, idx, idx] += 0.5j * y_diag - gz
            k21 = 0.5j * x_sand
            k21[:, idx, idx] += -0.5j * y_diag - gz
            k[:, :m, m:] = k12
            k[:, m:, :m] = k21

        gamma = loss_rates(ladder, loss_tangent)
        k[:, idx, idx] -= gamma[:m] / 2.0
        k[:, m + idx, m + idx] += gamma[m:] / 2.0

        dind = 2 * np.concatenate([ladder.indices, ladder.indices])
        self.delta = dind[:, None] - dind[None, :]               # (2m, 2m) int
        self.k_cell = k
        self.cdiag = cdiag
        self.lmat_cell = lmat
        self.zdiag = zdiag
        self.gamma = gamma
        self.profile = profile
        self.ladder = ladder
        self.pump = pump
        self.loss_tangent = float(loss_tangent)
        self.forward_backward = forward_backward

    @property
    def length_cells(self) -> int:
        return self.k_cell.shape[0]

    def cell_of(self, x: float) -> int:
        return int(np.clip(np.floor(x), 0, self.length_cells - 1))

    def phase_dressing(self, phi: float) -> np.ndarray:
        return np.exp(1j * phi * self.delta)

    def k_at(self, x: float) -> np.ndarray:
        """Physical K(x), phases included."""
        cell = self.cell_of(x)
        phi = float(self.pump.phase_at(x))
        return self.k_cell[cell] * self.phase_dressing(phi)

    def impedance_ohm(self, cell: int) -> np.ndarray:
        return self.zdiag[cell] * self.profile.z_ref


def assemble_capacitance(x: float, ladder: ModeLadder,
                         profile: NormalizedProfile) -> np.ndarray:
    """Loaded capacitance diagonal at position x (cell containing x)."""
    cell = int(np.clip(np.floor(x), 0, profile.length_cells - 1))
    return np.asarray(capacitance_diagonal(ladder.frequencies, profile, cell))


def assemble_inverse_inductance(x: float, ladder: ModeLadder, pump: "PumpSolution",
                                profile: NormalizedProfile) -> np.ndarray:
    """Inverse-inductance matrix at x: Bessel Toeplitz with pump phases.

    Element (r, c) = mu [J_{2(n_c-n_r)}(A) exp(-i 2 (n_c-n_r) phi)
    - beta w_r^2 delta_{rc}]; Hermitian by the even-order Bessel symmetry.
    """
    cell = int(np.clip(np.floor(x), 0, profile.length_cells - 1))
    w = ladder.frequencies
    toep = _bessel_toeplitz(pump.amplitude_profile[cell:cell + 1], ladder)[0]
    phi = float(pump.phase_at(x))
    diff = ladder.indices[None, :] - ladder.indices[:, None]
    phases = np.exp(-2j * diff * phi)
    return profile.mu[cell] * (toep * phases - profile.beta * np.diag(w**2))


def nonlinear_impedance(linv: np.ndarray, cmat: np.ndarray) -> np.ndarray:
    """Z_n = sqrt(L_nn / C_nn) with L = linv^-1, principal branch."""
    lmat = np.linalg.inv(linv)
    return np.sqrt(np.diag(lmat) / np.asarray(cmat, dtype=complex))


def mode_impedances(profile: NormalizedProfile, ladder: ModeLadder,
                    pump: "PumpSolution", x: float) -> np.ndarray:
    """Physical per-mode nonlinear impedance at x, in ohm."""
    linv = assemble_inverse_inductance(x, ladder, pump, profile)
    cmat = assemble_capacitance(x, ladder, profile)
    return nonlinear_impedance(linv, cmat) * profile.z_ref


def assemble_coupling_matrix(x: float, ladder: ModeLadder, profile: NormalizedProfile,
                             pump: "PumpSolution",
                             forward_backward: bool = True) -> ModeMatrices:
    """All frequency-basis matrices at one position (lossless K blocks).

    Reference implementation; the solver uses :class:`CellMatrices` which
    produces identical K up to the shared phase dressing.
    """
    cells = CellMatrices(profile, ladder, pump, loss_tangent=0.0,
                         forward_backward=forward_backward)
    m = ladder.m
    k = cells.k_at(x)
    cell = cells.cell_of(x)
    return ModeMatrices(
        x=float(x),
        omegas=ladder.frequencies.copy(),
        cmat=np.asarray(cells.cdiag[cell]),
        linv=assemble_inverse_inductance(x, ladder, pump, profile),
        z=cells.zdiag[cell].copy(),
        k11=k[:m, :m], k12=k[:m, m:], k21=k[m:, :m], k22=k[m:, m:],
    )
