"""Two-point boundary-value scattering solver for the multimode line.

The spatial equation of motion dA/dx = K(x) A is linear, so one fundamental
matrix per device suffices: the solver integrates K with a fixed-step
two-node Gauss-Magnus scheme (4th order; the matrix exponential of the
Magnus increment preserves the commutator metric exactly for lossless
devices), applies the port continuity matrices at both ends, and solves the
linear system mapping incoming to outgoing modes.

Loss enters as -gamma/2 damping on forward slots and +gamma/2 on backward
slots plus distributed vacuum noise injection; the noise scattering maps
S_n(x) share the fundamental matrix, and their quadratic integrals are
accumulated during the same pass with composite Simpson weights on the
substep grid.

Slot convention for the 2m-vector: forward block then backward block, each
in ladder order.  in = [A+(0-); A-(L+)], out = [A+(L+); A-(0-)]: S0[j, k]
scatters incoming slot k to outgoing slot j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .circuit import NormalizedProfile
from .coupling import (
    CellMatrices,
    boundary_matrices,
    constant_port,
    flux_metric,
    linear_impedance_ohm,
    sign_metric,
)
from .modes import ModeLadder, validate_modes
from .pump import PumpSolution

_GAUSS_OFFSET = np.sqrt(3.0) / 6.0
OSCILLATION_CONDITION = 1e12


class ParametricOscillationError(RuntimeError):
    """Boundary system numerically singular: device oscillates."""


def _resolve_port(port_impedance) -> Callable[[float], float]:
    if port_impedance is None:
        return constant_port(50.0)
    if callable(port_impedance):
        return port_impedance
    return constant_port(float(port_impedance))


def _magnus_step(cells: CellMatrices, cell: int, a: float, h: float) -> np.ndarray:
    """Magnus increment exponential over [a, a+h] inside one cell."""
    x1 = a + h * (0.5 - _GAUSS_OFFSET)
    x2 = a + h * (0.5 + _GAUSS_OFFSET)
    kc = cells.k_cell[cell]
    k1 = kc * cells.phase_dressing(float(cells.pump.phase_at(x1)))
    k2 = kc * cells.phase_dressing(float(cells.pump.phase_at(x2)))
    omega = (h / 2.0) * (k1 + k2) + \
        (np.sqrt(3.0) * h * h / 12.0) * (k2 @ k1 - k1 @ k2)
    return expm(omega)


def _segments(x0: float, x1: float, n_cells: int):
    """Split [x0, x1] into per-cell overlaps (cell, a, b)."""
    if not 0.0 <= x0 <= x1 <= n_cells:
        raise ValueError("integration range outside the device")
    segs = []
    c = int(np.floor(x0))
    while x0 < x1 - 1e-12:
        c = min(c, n_cells - 1)
        b = min(float(c + 1), x1)
        segs.append((c, x0, b))
        x0 = b
        c += 1
    return segs


def transfer_matrix(profile: NormalizedProfile, ladder: ModeLadder,
                    pump: PumpSolution, x0: float = 0.0, x1: float | None = None,
                    substeps: int = 4, loss_tangent: float | None = None,
                    forward_backward: bool = True,
                    cells: CellMatrices | None = None) -> np.ndarray:
    """Fundamental matrix Pi(x0 -> x1) of dA/dx = K(x) A.

    Fixed-step integration with ``substeps`` Magnus steps per cell (partial
    end cells get the same count over their overlap).  ``cells`` may pass a
    prebuilt assembly to amortize it across calls.
    """
    if x1 is None:
        x1 = float(profile.length_cells)
    if cells is None:
        cells = CellMatrices(profile, ladder, pump, loss_tangent=loss_tangent,
                             forward_backward=forward_backward)
    dim = 2 * ladder.m
    pi = np.eye(dim, dtype=complex)
    for cell, a, b in _segments(float(x0), float(x1), profile.length_cells):
        h = (b - a) / substeps
        for s in range(substeps):
            pi = _magnus_step(cells, cell, a + s * h, h) @ pi
    return pi


@dataclass(eq=False)
class ScatteringSolution:
    """Multimode scattering matrix with noise maps and diagnostics.

    ``noise_integrals[j, k]`` is Int gamma_k |S_n(x)[j, k]|^2 dx: the
    second-moment weight of the loss channel attached to slot k in output
    slot j.  ``sn_prefactor @ inv(pi_samples[i])`` reproduces S_n at cell
    boundary i (see :meth:`sn_at`).
    """

    s0: np.ndarray
    ladder: ModeLadder
    gamma: np.ndarray                 # (2m,) loss rates
    j_metric: np.ndarray              # (2m,) commutator signs
    noise_integrals: np.ndarray       # (2m, 2m) real
    sn_prefactor: np.ndarray          # (2m, 2m) R = M_out^-1 Pi(0, L)
    loss_quadratic: np.ndarray        # (2m, 2m) Sum_k gamma_k J_k H_k
    boundary_condition_number: float
    pseudo_unitarity_residual: float
    oscillation_flag: bool
    substeps: int
    port_impedance_ohm: np.ndarray    # (m,) at the ports
    pi_samples: np.ndarray | None = field(default=None, repr=False)
    profile: NormalizedProfile | None = field(default=None, repr=False)
    pump: PumpSolution | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.ladder.m

    @property
    def signal_in(self) -> int:
        return self.ladder.signal_slot

    @property
    def signal_out(self) -> int:
        return self.ladder.signal_slot

    @property
    def signal_reflection_slot(self) -> int:
        return self.m + self.ladder.signal_slot

    def sn_at(self, boundary_index: int) -> np.ndarray:
        """Noise scattering map S_n at cell boundary ``boundary_index``."""
        if self.pi_samples is None:
            raise ValueError("solution was computed without stored transfer samples")
        return self.sn_prefactor @ np.linalg.inv(self.pi_samples[boundary_index])

    def lossless(self) -> bool:
        return bool(np.all(self.gamma == 0.0))


def check_pseudo_unitarity(result: ScatteringSolution) -> float:
    """Max-norm residual of the commutator sum rule.

    Lossless: S0 J S0^dag = J.  Lossy: the loss channels restore the sum
    rule, S0 J S0^dag + R (Sum_k gamma_k J_k H_k) R^dag = J with H_k the
    quadrature-accumulated noise-map integrals.
    """
    j = result.j_metric
    res = (result.s0 * j[None, :]) @ result.s0.conj().T - np.diag(j)
    res = res + result.sn_prefactor @ result.loss_quadratic @ result.sn_prefactor.conj().T
    return float(np.max(np.abs(res)))


def scattering(profile: NormalizedProfile, ladder: ModeLadder, pump: PumpSolution,
               port_impedance=None, loss_tangent: float | None = None,
               substeps: int = 4, forward_backward: bool = True,
               store_transfer: bool = True, allow_invalid_modes: bool = False,
               raise_on_oscillation: bool = False) -> ScatteringSolution:
    """Solve the boundary-value scattering problem for one operating point.

    ``port_impedance`` is an ohm value, a callable of |f| in Hz (stepwise
    out-of-band models), or the string "matched" for ports matched per mode
    to the undriven line impedance of the respective end cell; ``substeps``
    must be even so the in-pass Simpson noise quadrature has matching
    panels.  Modes flagged invalid (PMR gap, beyond band edge) are rejected
    unless ``allow_invalid_modes``.
    """
    if substeps < 2 or substeps % 2:
        raise ValueError("substeps must be even and >= 2")
    validity = validate_modes(ladder, profile)
    if not (validity.all_ok() or allow_invalid_modes):
        bad = ladder.indices[~validity.ok]
        raise ValueError(f"ladder modes {bad.tolist()} are in the PMR gap or "
                         "beyond the band edge; adjust n_min/n_max or pass "
                         "allow_invalid_modes=True")

    cells = CellMatrices(profile, ladder, pump, loss_tangent=loss_tangent,
                         forward_backward=forward_backward)
    L = profile.length_cells
    m = ladder.m
    dim = 2 * m
    gamma = cells.gamma

    n_mat = np.eye(dim, dtype=complex)
    w_mat = np.eye(dim, dtype=complex)
    h_acc = np.zeros((dim, dim, dim), dtype=complex)
    pi_samples = np.empty((L + 1, dim, dim), dtype=complex) if store_transfer else None
    if store_transfer:
        pi_samples[0] = n_mat

    lossy = bool(np.any(gamma > 0.0))
    h = 1.0 / substeps
    # Composite Simpson weights over the substep nodes of one cell.
    simpson = np.full(substeps + 1, 2.0)
    simpson[1::2] = 4.0
    simpson[0] = simpson[-1] = 1.0
    simpson *= h / 3.0

    def accumulate(weight: float) -> None:
        h_acc.__iadd__(weight * np.einsum("ak,bk->abk", w_mat, w_mat.conj()))

    for cell in range(L):
        if lossy:
            accumulate(simpson[0])
        for s in range(substeps):
            e_step = _magnus_step(cells, cell, cell + s * h, h)
            n_mat = e_step @ n_mat
            w_mat = w_mat @ np.linalg.inv(e_step)
            if lossy:
                accumulate(simpson[s + 1])
        if store_transfer:
            pi_samples[cell + 1] = n_mat

    if isinstance(port_impedance, str):
        if port_impedance != "matched":
            raise ValueError(f"unknown port model {port_impedance!r}")
        z_left = linear_impedance_ohm(profile, ladder, 0)
        z_right = linear_impedance_ohm(profile, ladder, L - 1)
    else:
        port = _resolve_port(port_impedance)
        f_hz = np.abs(profile.to_hz(ladder.frequencies))
        z_left = np.array([port(f) for f in f_hz], dtype=float)
        z_right = z_left
    z_port = 0.5 * (z_left + z_right)
    b_left = boundary_matrices(cells.impedance_ohm(0), z_left).full()
    b_right = boundary_matrices(cells.impedance_ohm(L - 1), z_right).full()

    t_mat = n_mat @ b_left
    m_out = np.hstack([b_right[:, :m], -t_mat[:, m:]])
    m_in = np.hstack([t_mat[:, :m], -b_right[:, m:]])
    cond = float(np.linalg.cond(m_out))
    oscillating = cond > OSCILLATION_CONDITION
    if oscillating and raise_on_oscillation:
        raise ParametricOscillationError(
            f"boundary system condition number {cond:.3e}: parametric "
            "oscillation threshold reached")
    s0 = np.linalg.solve(m_out, m_in)
    r_mat = np.linalg.solve(m_out, n_mat)

    j_vec = sign_metric(ladder).astype(float)
    if lossy:
        noise_integrals = np.einsum("ja,abk,jb->jk", r_mat, h_acc,
                                    r_mat.conj()).real * gamma[None, :]
        loss_quadratic = np.einsum("abk,k->ab", h_acc, gamma * j_vec)
    else:
        noise_integrals = np.zeros((dim, dim))
        loss_quadratic = np.zeros((dim, dim), dtype=complex)

    solution = ScatteringSolution(
        s0=s0,
        ladder=ladder,
        gamma=gamma,
        j_metric=j_vec,
        noise_integrals=noise_integrals,
        sn_prefactor=r_mat,
        loss_quadratic=loss_quadratic,
        boundary_condition_number=cond,
        pseudo_unitarity_residual=0.0,
        oscillation_flag=oscillating,
        substeps=substeps,
        port_impedance_ohm=z_port,
        pi_samples=pi_samples,
        profile=profile,
        pump=pump,
    )
    solution.pseudo_unitarity_residual = check_pseudo_unitarity(solution)
    return solution


def scattering_lossless(profile: NormalizedProfile, ladder: ModeLadder,
                        pump: PumpSolution, port_impedance=None,
                        **kwargs) -> ScatteringSolution:
    """Scattering with the loss channels switched off."""
    return scattering(profile, ladder, pump, port_impedance=port_impedance,
                      loss_tangent=0.0, **kwargs)


def scattering_with_loss(profile: NormalizedProfile, ladder: ModeLadder,
                         pump: PumpSolution, loss_tangent: float | None = None,
                         port_impedance=None, **kwargs) -> ScatteringSolution:
    """Scattering with dielectric loss (defaults to the profile's tan delta)."""
    return scattering(profile, ladder, pump, port_impedance=port_impedance,
                      loss_tangent=loss_tangent, **kwargs)


def flux_conservation_residual(k_full: np.ndarray, ladder: ModeLadder) -> float:
    """Max-norm of K^dag Sigma + Sigma K; zero for lossless assemblies."""
    sigma = flux_metric(ladder).astype(float)
    res = k_full.conj().T * sigma[None, :] + sigma[:, None] * k_full
    return float(np.max(np.abs(res)))
