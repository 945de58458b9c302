"""Truncated two-sided frequency ladder coupled by the pump.

Four-wave mixing couples a signal at omega_s to the set
omega_n = omega_s + 2n*omega_p.  Negative entries stand for the conjugate
(creation-operator) component at |omega_n|; signal is n = 0, idler n = -1.
Frequencies are normalized to the circuit reference omega_c throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .circuit import NormalizedProfile


@dataclass(frozen=True)
class ModeLadder:
    signal_frequency: float   # normalized, > 0
    pump_frequency: float     # normalized, > 0
    n_min: int
    n_max: int
    indices: np.ndarray = field(init=False, repr=False)
    frequencies: np.ndarray = field(init=False, repr=False)
    signs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        indices = np.arange(self.n_min, self.n_max + 1)
        freqs = self.signal_frequency + 2.0 * indices * self.pump_frequency
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "signs", np.sign(freqs))

    @property
    def m(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def signal_slot(self) -> int:
        return -self.n_min

    @property
    def idler_slot(self) -> int:
        return -self.n_min - 1

    def slot(self, n: int) -> int:
        if not self.n_min <= n <= self.n_max:
            raise ValueError(f"mode index {n} outside [{self.n_min}, {self.n_max}]")
        return n - self.n_min


def build_mode_ladder(omega_s: float, omega_p: float, n_min: int = -3,
                      n_max: int = 2) -> ModeLadder:
    """Construct the ladder omega_n = omega_s + 2n*omega_p for n_min..n_max.

    The ladder must contain the signal (n = 0) and the idler (n = -1), and
    no rung may sit at zero frequency (the ladder-operator normalization
    1/sqrt|omega| breaks down there).
    """
    if omega_s <= 0 or omega_p <= 0:
        raise ValueError("signal and pump frequencies must be positive")
    if n_min > -1 or n_max < 0:
        raise ValueError("ladder must contain signal (n=0) and idler (n=-1)")
    ladder = ModeLadder(float(omega_s), float(omega_p), int(n_min), int(n_max))
    if np.any(np.abs(ladder.frequencies) < 1e-12 * omega_p):
        raise ValueError("a ladder frequency is (numerically) zero; shift the "
                         "signal frequency")
    return ladder


@dataclass(frozen=True)
class ModeValidity:
    ok: np.ndarray            # per-mode: usable for propagation
    in_pmr_gap: np.ndarray    # per-mode: |omega| inside the PMR stopband
    above_cutoff: np.ndarray  # per-mode: |omega| beyond the linear band edge
    band_edge: float          # normalized, min over cells
    pmr_gap: tuple[float, float]  # normalized (low, high)

    def all_ok(self) -> bool:
        return bool(np.all(self.ok))


def band_edge_frequency(profile: NormalizedProfile, cell: int | None = None) -> float:
    """Normalized band edge of the undriven loaded line.

    Bloch condition of the discrete ladder at the zone boundary k = pi:
    omega^2 (c(omega) + 4 mu beta) = 4 mu, with c(omega) = nu +
    gamma_eff * alpha_r(omega) the loaded cell capacitance.  Solved
    self-consistently above the PMR zero where alpha_r is positive again.
    Returns the minimum over cells when ``cell`` is None: the smallest
    critical currents limit the whole device.
    """
    from .coupling import pmr_factor  # local import to avoid a cycle

    if cell is None:
        # The edge frequency is monotone in mu (for graded designs nu and
        # gamma track 1/mu, reinforcing the trend), so the minimum sits at
        # the smallest-mu cell; the ends are checked as well for safety.
        candidates = sorted({int(np.argmin(profile.mu)), 0, profile.length_cells - 1})
    else:
        candidates = [int(cell)]
    gamma_eff = profile.gamma_eff()

    def edge_for(j: int) -> float:
        mu = profile.mu[j]
        nu = profile.nu[j]

        def f(w: float) -> float:
            c = nu + gamma_eff[j] * np.real(pmr_factor(w, profile, cell=j))
            return w * w * (c + 4.0 * mu * profile.beta) - 4.0 * mu

        lo = profile.omega_r * (1.0 + 1e-9)
        hi = 2.0 * np.sqrt(mu / nu)  # root is below this unloaded-line bound
        if f(lo) >= 0:
            # Edge below the PMR structure: take the branch below the pole,
            # where the loading diverges and forces a crossing.
            lo, hi = 1e-9, profile.pmr_pole([j])[0] * (1.0 - 1e-9)
        return brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16)

    return float(min(edge_for(j) for j in candidates))


def validate_modes(ladder: ModeLadder, profile: NormalizedProfile) -> ModeValidity:
    """Flag ladder rungs inside the PMR stopband or beyond the band edge."""
    gap_lo, gap_hi = profile.pmr_gap()
    lo, hi = min(gap_lo, gap_hi), max(gap_lo, gap_hi)
    absw = np.abs(ladder.frequencies)
    in_gap = (absw >= lo) & (absw <= hi)
    edge = band_edge_frequency(profile)
    above = absw >= edge
    ok = ~(in_gap | above)
    return ModeValidity(ok=ok, in_pmr_gap=in_gap, above_cutoff=above,
                        band_edge=edge, pmr_gap=(lo, hi))
