"""Derived amplifier quantities: gain, reflection, quantum efficiency,
noise budgets, and dynamic range.

Variance bookkeeping uses vacuum 1/2 quanta per input slot and per loss
channel by default; thermal occupations enter through the variance
arguments.  The quantum efficiency of the signal output is

    eta = var_in(signal) / (total output-signal variance / G)

with G the signal power gain, compared against the phase-preserving ideal
eta_ideal = 1 / (2 - 1/G) through eta_bar = 1 - eta/eta_ideal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .solver import ScatteringSolution

VACUUM_VARIANCE = 0.5


def transmission_db(result: ScatteringSolution, out_slot: int, in_slot: int) -> float:
    """|S0[out, in]|^2 in dB over the full 2m slot space."""
    val = np.abs(result.s0[out_slot, in_slot]) ** 2
    return float(10.0 * np.log10(max(val, 1e-300)))


def gain_db(result: ScatteringSolution) -> float:
    """Signal power gain: forward signal out per forward signal in."""
    return transmission_db(result, result.signal_out, result.signal_in)


def reflection_db(result: ScatteringSolution) -> float:
    """Signal power reflection back out of the input port."""
    return transmission_db(result, result.signal_reflection_slot, result.signal_in)


def gain_and_reflection(result: ScatteringSolution) -> dict:
    """Signal gain/reflection plus the per-mode spectra for the signal input.

    ``transmission_db`` rows are the forward outputs; ``backreflection_db``
    the backward outputs at the input port, both in ladder order.
    """
    m = result.m
    s_col = np.abs(result.s0[:, result.signal_in]) ** 2
    with np.errstate(divide="ignore"):
        col_db = 10.0 * np.log10(np.maximum(s_col, 1e-300))
    return {
        "gain_db": gain_db(result),
        "reflection_db": reflection_db(result),
        "transmission_db": col_db[:m],
        "backreflection_db": col_db[m:],
    }


@dataclass
class QEReport:
    eta: float
    eta_ideal: float
    eta_bar: float
    caves_added_noise: float
    gain_linear: float
    total_output_variance: float
    coherent_variance: float
    loss_variance: float
    below_unity_gain: bool


def _signal_variances(result: ScatteringSolution, input_variances,
                      loss_variances) -> tuple[float, float, np.ndarray, np.ndarray]:
    dim = 2 * result.m
    if input_variances is None:
        input_variances = np.full(dim, VACUUM_VARIANCE)
    else:
        input_variances = np.asarray(input_variances, dtype=float)
    if loss_variances is None:
        loss_variances = np.full(dim, VACUUM_VARIANCE)
    elif np.ndim(loss_variances) == 0:
        loss_variances = np.full(dim, float(loss_variances))
    else:
        loss_variances = np.asarray(loss_variances, dtype=float)
    s = result.signal_out
    coherent = float(np.sum(np.abs(result.s0[s, :]) ** 2 * input_variances))
    loss = float(np.sum(result.noise_integrals[s, :] * loss_variances))
    return coherent, loss, input_variances, loss_variances


def quantum_efficiency(result: ScatteringSolution, input_variances=None,
                       loss_variances=None) -> QEReport:
    """Signal-band quantum efficiency and inefficiency of a solved device.

    All coherent inputs (both directions, both ports) and all distributed
    loss channels count as noise sources; the signal input provides the
    numerator variance.
    """
    coherent, loss, in_var, _ = _signal_variances(result, input_variances,
                                                  loss_variances)
    total = coherent + loss
    g = float(np.abs(result.s0[result.signal_out, result.signal_in]) ** 2)
    var_in = float(in_var[result.signal_in])
    eta = var_in * g / total
    below = g < 1.0
    eta_ideal = 1.0 / (2.0 - 1.0 / g) if g > 0.5 else np.nan
    eta_bar = 1.0 - eta / eta_ideal if np.isfinite(eta_ideal) else np.nan
    caves = total / g - var_in
    return QEReport(
        eta=float(eta),
        eta_ideal=float(eta_ideal),
        eta_bar=float(eta_bar),
        caves_added_noise=float(caves),
        gain_linear=g,
        total_output_variance=float(total),
        coherent_variance=float(coherent),
        loss_variance=float(loss),
        below_unity_gain=below,
    )


def quantum_inefficiency(result: ScatteringSolution, **kwargs) -> float:
    """eta_bar = 1 - eta/eta_ideal; distance from the quantum limit."""
    return quantum_efficiency(result, **kwargs).eta_bar


def added_noise_photons(result: ScatteringSolution, **kwargs) -> float:
    """Input-referred added noise (Caves number) of the signal output."""
    return quantum_efficiency(result, **kwargs).caves_added_noise


def _slot_labels(result: ScatteringSolution) -> list[str]:
    labels = []
    for direction in ("fwd", "bwd"):
        for n in result.ladder.indices:
            labels.append(f"{direction}[{n:+d}]")
    return labels


@dataclass
class NoiseBudget:
    """Second-moment flow weights from every source into every output slot.

    ``coherent_weights[j, k]`` is |S0[j, k]|^2 var_k; ``loss_weights[j, k]``
    the integrated loss-channel contribution.  ``flows`` renders the
    signal-output row in (source, target, weight) form for budget plots.
    """

    coherent_weights: np.ndarray
    loss_weights: np.ndarray
    slot_labels: list[str]
    signal_slot: int
    input_variances: np.ndarray
    loss_variances: np.ndarray
    flows: list[tuple[str, str, float]] = field(default_factory=list)

    def output_variance(self, slot: int | None = None) -> float:
        j = self.signal_slot if slot is None else slot
        return float(self.coherent_weights[j].sum() + self.loss_weights[j].sum())

    def signal_share(self) -> float:
        j = self.signal_slot
        return float(self.coherent_weights[j, j] / self.output_variance(j))


def noise_decomposition(result: ScatteringSolution, input_variances=None,
                        loss_variances=None) -> NoiseBudget:
    """Decompose the output noise into per-source flows."""
    coherent, loss, in_var, loss_var = _signal_variances(
        result, input_variances, loss_variances)
    del coherent, loss
    weights = np.abs(result.s0) ** 2 * in_var[None, :]
    loss_w = result.noise_integrals * loss_var[None, :]
    labels = _slot_labels(result)
    s = result.signal_out
    flows = [(labels[k], labels[s], float(weights[s, k]))
             for k in range(weights.shape[1]) if weights[s, k] > 0]
    flows += [(f"loss:{labels[k]}", labels[s], float(loss_w[s, k]))
              for k in range(loss_w.shape[1]) if loss_w[s, k] > 0]
    return NoiseBudget(
        coherent_weights=weights,
        loss_weights=loss_w,
        slot_labels=labels,
        signal_slot=s,
        input_variances=in_var,
        loss_variances=loss_var,
        flows=flows,
    )


def estimate_dynamic_range(g0_linear: float, pump_current: float,
                           pump_impedance: float) -> float:
    """1 dB compression point in dBm from the pump-depletion model.

    G(P_s) = G0 / (1 + 2 G0 P_s / P_p) gives P_1dB = (10^0.1 - 1) P_p /
    (2 G0); the pump current is interpreted as an RMS value, P_p = I_p^2 Z_p.
    """
    if g0_linear <= 1.0:
        raise ValueError("dynamic-range estimate needs gain above unity")
    p_pump = pump_current**2 * pump_impedance
    p_1db = (10.0**0.1 - 1.0) * p_pump / (2.0 * g0_linear)
    return float(10.0 * np.log10(p_1db / 1e-3))
