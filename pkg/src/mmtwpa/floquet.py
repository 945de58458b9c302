"""Floquet analysis of constant-drive segments.

A homogeneous pumped line is spatially periodic with period x_T = pi/k_p
(the inverse-inductance phases advance by 2 pi over x_T).  The transfer
matrix over one period (monodromy) yields the Floquet exponents r_alpha and
eigenmodes; above the drive bifurcation exactly one conjugate pair acquires
a nonzero real part, the amplifying and deamplifying modes.  Graded devices
are analyzed cell-by-cell in the frozen-drive approximation by snapshotting
a homogeneous device at the local parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .circuit import NormalizedProfile
from .coupling import CellMatrices
from .modes import ModeLadder
from .pump import PumpSolution
from .solver import transfer_matrix


def _is_constant(arr: np.ndarray, rtol: float = 1e-9) -> bool:
    scale = max(np.max(np.abs(arr)), 1e-30)
    return bool(np.max(np.abs(arr - arr.flat[0])) <= rtol * scale)


@dataclass(eq=False)
class FloquetModes:
    """Monodromy eigen-structure of one constant-drive segment.

    Exponents sorted by descending real part, then ascending imaginary
    part; ``eigenbasis`` columns are unit-norm with the largest component
    rotated real-positive (deterministic across runs).  ``generator`` is
    Q with M0 = exp(x_T Q).
    """

    period: float
    monodromy: np.ndarray
    exponents: np.ndarray
    eigenbasis: np.ndarray
    generator: np.ndarray
    ladder: ModeLadder
    drive: float
    x_offset: float = 0.0
    eigen_condition: float = 0.0
    degenerate_clusters: bool = False
    profile: NormalizedProfile | None = field(default=None, repr=False)
    pump: PumpSolution | None = field(default=None, repr=False)
    substeps: int = 4

    def periodic_part(self, xs) -> np.ndarray:
        """P(x) = Pi(x0 -> x0+x) exp(-x Q), sampled at offsets ``xs``.

        P(0) = identity and P is x_T-periodic up to integration error.
        """
        if self.profile is None or self.pump is None:
            raise ValueError("periodic_part requires the originating profile/pump")
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        cells = CellMatrices(self.profile, self.ladder, self.pump)
        out = np.empty((xs.size, *self.monodromy.shape), dtype=complex)
        for i, x in enumerate(xs):
            pi = transfer_matrix(self.profile, self.ladder, self.pump,
                                 self.x_offset, self.x_offset + x,
                                 substeps=self.substeps, cells=cells)
            out[i] = pi @ expm(-x * self.generator)
        return out


def monodromy(profile: NormalizedProfile, ladder: ModeLadder, pump: PumpSolution,
              x0: float = 0.0, substeps: int = 4) -> tuple[np.ndarray, float]:
    """Transfer matrix over one pump period starting at x0, and the period.

    Requires drive and cell parameters constant over the covered cells.
    """
    for name, arr in (("drive", pump.drive_profile), ("mu", profile.mu),
                      ("nu", profile.nu), ("gamma_c", profile.gamma_c),
                      ("k_p", pump.wavevector_profile)):
        if not _is_constant(arr):
            raise ValueError(f"Floquet analysis needs a constant-drive segment; "
                             f"{name} varies along the device")
    kp = float(pump.wavevector_profile[0])
    if kp <= 0:
        raise ValueError("pump wavevector must be positive")
    x_t = np.pi / kp
    if x0 + x_t > profile.length_cells:
        raise ValueError(f"device shorter than one pump period ({x_t:.1f} cells)")
    m0 = transfer_matrix(profile, ladder, pump, x0, x0 + x_t, substeps=substeps)
    return m0, x_t


def floquet_exponents(m0: np.ndarray, x_t: float,
                      degeneracy_gap: float = 1e-8) -> tuple[np.ndarray, np.ndarray, bool]:
    """Principal-branch exponents and eigenbasis of a monodromy matrix.

    Returns (exponents, eigenvectors, degenerate_flag); the flag marks
    eigenvalue clusters with relative gap below ``degeneracy_gap`` where the
    eigenbasis is unreliable.
    """
    evals, evecs = np.linalg.eig(m0)
    exps = np.log(evals) / x_t
    order = np.lexsort((exps.imag, -exps.real))
    exps = exps[order]
    evecs = evecs[:, order]
    # Deterministic normalization: unit norm, dominant entry real positive.
    evecs = evecs / np.linalg.norm(evecs, axis=0, keepdims=True)
    lead = np.argmax(np.abs(evecs), axis=0)
    phases = evecs[lead, np.arange(evecs.shape[1])]
    evecs = evecs * np.exp(-1j * np.angle(phases))[None, :]

    dist = np.abs(evals[:, None] - evals[None, :])
    np.fill_diagonal(dist, np.inf)
    degenerate = bool(np.min(dist) < degeneracy_gap * np.max(np.abs(evals)))
    return exps, evecs, degenerate


def floquet_modes(profile: NormalizedProfile, ladder: ModeLadder, pump: PumpSolution,
                  x0: float = 0.0, substeps: int = 4) -> FloquetModes:
    """Full Floquet decomposition of a constant-drive device."""
    m0, x_t = monodromy(profile, ladder, pump, x0=x0, substeps=substeps)
    exps, evecs, degenerate = floquet_exponents(m0, x_t)
    generator = evecs @ np.diag(exps) @ np.linalg.inv(evecs)
    return FloquetModes(
        period=x_t,
        monodromy=m0,
        exponents=exps,
        eigenbasis=evecs,
        generator=generator,
        ladder=ladder,
        drive=float(pump.drive_profile[0]),
        x_offset=float(x0),
        eigen_condition=float(np.linalg.cond(evecs)),
        degenerate_clusters=degenerate,
        profile=profile,
        pump=pump,
        substeps=substeps,
    )


def mode_amplitudes(state: np.ndarray, fm: FloquetModes, x: float = 0.0) -> np.ndarray:
    """Frequency-basis vector -> Floquet-basis coordinates at offset x.

    Q(x) = (P(x) V)^-1 A(x); at x = 0 this is V^-1 A.
    """
    if x == 0.0:
        basis = fm.eigenbasis
    else:
        basis = fm.periodic_part([x])[0] @ fm.eigenbasis
    cond = np.linalg.cond(basis)
    if cond > 1e12:
        raise np.linalg.LinAlgError(
            f"Floquet basis ill-conditioned at x={x} (cond {cond:.2e})")
    return np.linalg.solve(basis, np.asarray(state, dtype=complex))


floquet_decompose = mode_amplitudes


def classify_modes(fm: FloquetModes, tol: float = 1e-6) -> tuple[list[str], np.ndarray]:
    """Labels per Floquet mode and their frequency-slot weight decomposition.

    weights[k, alpha] = |V_{k alpha}|^2, columns normalized to 1: the share
    of frequency slot k in Floquet mode alpha.
    """
    labels = []
    for r in fm.exponents:
        if r.real > tol:
            labels.append("amplifying")
        elif r.real < -tol:
            labels.append("deamplifying")
        else:
            labels.append("stable")
    weights = np.abs(fm.eigenbasis) ** 2
    weights = weights / weights.sum(axis=0, keepdims=True)
    return labels, weights


def liouville_residual(fm: FloquetModes) -> float:
    """Deviation of sum(r_alpha) * x_T from a multiple of 2 pi i.

    The coupling matrix is traceless (forward and backward damping cancel,
    the lossless blocks satisfy K22 = -K11), so det M0 = 1 and the exponent
    sum vanishes modulo the principal-branch ambiguity.
    """
    total = np.sum(fm.exponents) * fm.period
    im_wrapped = (total.imag + np.pi) % (2.0 * np.pi) - np.pi
    return float(abs(total.real) + abs(im_wrapped))


def wrapped_exponent_distance(r1: complex, r2: complex, x_t: float) -> float:
    """Distance between exponents with Im compared modulo 2 pi / x_T."""
    dre = r1.real - r2.real
    period = 2.0 * np.pi / x_t
    dim = (r1.imag - r2.imag + period / 2.0) % period - period / 2.0
    return float(np.hypot(dre, dim))


def spectral_gap(fm: FloquetModes, tol: float = 1e-6) -> float:
    """Smallest wrapped distance from the amplifying/deamplifying pair to
    any other exponent; infinity below bifurcation (no pair)."""
    labels, _ = classify_modes(fm, tol=tol)
    pair = [i for i, lab in enumerate(labels) if lab != "stable"]
    others = [i for i, lab in enumerate(labels) if lab == "stable"]
    if not pair or not others:
        return float("inf")
    return min(wrapped_exponent_distance(fm.exponents[i], fm.exponents[j], fm.period)
               for i in pair for j in others)


def exponent_sweep(profile: NormalizedProfile, ladder_for, omega_p: float,
                   drives, wavevector_mode: str = "fitted_polynomial",
                   polynomial=None, substeps: int = 4):
    """Floquet exponents across a drive grid for a homogeneous device.

    ``ladder_for`` is either a fixed ModeLadder or a callable drive ->
    ModeLadder.  Returns (exponents array (n_drives, 2m), list of
    FloquetModes).
    """
    from .pump import KP_POLY_73GHZ, solve_pump

    poly = KP_POLY_73GHZ if polynomial is None else polynomial
    results = []
    for d in np.asarray(drives, dtype=float):
        ladder = ladder_for(d) if callable(ladder_for) else ladder_for
        pump = solve_pump(profile, omega_p, d, wavevector_mode=wavevector_mode,
                          polynomial=poly)
        results.append(floquet_modes(profile, ladder, pump, substeps=substeps))
    exps = np.array([fm.exponents for fm in results])
    return exps, results
