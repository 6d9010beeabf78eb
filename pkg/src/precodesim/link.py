"""Power normalization, digital combining, spectral efficiency, and BER.

SNR convention for sweeps: snr_db = 10*log10(P / (K * noise_var)) with the
noise variance held at its configured value and the total power P swept.
The combiner output W acts on the RF-domain signal (shape N_s x N_r_RF),
i.e. it already is the Hermitian of the combining matrix in the receive
chain, so the stream-domain channel is W @ H_eff @ F.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assignment import PrecoderAssignment
from .beams import AnalogBeamformers, effective_channel
from .channel import ChannelRealization

ZF = "zf"
MMSE = "mmse"

ZF_CONDITION_LIMIT = 1e12


class SingularEffectiveChannel(RuntimeError):
    """Zero-forcing requested on a rank-deficient effective channel."""


@dataclass
class EqualizerSpec:
    kind: str                 # "zf" or "mmse"
    signal_cov: np.ndarray    # R_s, (N_s, N_s)
    noise_cov: np.ndarray     # R, (N_r_RF, N_r_RF)


@dataclass
class LinkMetrics:
    spectral_efficiency: float
    ber: float
    per_subcarrier_rate: np.ndarray


def snr_db_to_power(snr_db: float, num_subcarriers: int, noise_var: float = 1.0) -> float:
    return num_subcarriers * noise_var * 10.0 ** (snr_db / 10.0)


def make_equalizer(kind: str, power: float, num_subcarriers: int, num_streams: int,
                   noise_var: float, analog_combiner: np.ndarray | None = None,
                   ideal_noise: bool = False, rf_dim: int | None = None) -> EqualizerSpec:
    """Default covariances: R_s = (P/(K*N_s)) I and R = noise_var * W_RF^H W_RF.

    The analog combiner colors the noise; ``ideal_noise`` switches to the
    idealized white model R = noise_var * I for ablations.  ``rf_dim`` is
    only needed when no analog combiner is supplied.
    """
    if kind not in (ZF, MMSE):
        raise ValueError(f"unknown equalizer kind {kind!r}")
    signal_cov = (power / (num_subcarriers * num_streams)) * np.eye(num_streams)
    if analog_combiner is not None and not ideal_noise:
        noise_cov = noise_var * (analog_combiner.conj().T @ analog_combiner)
    else:
        if rf_dim is None:
            if analog_combiner is None:
                raise ValueError("rf_dim required when no analog combiner is given")
            rf_dim = analog_combiner.shape[1]
        noise_cov = noise_var * np.eye(rf_dim)
    return EqualizerSpec(kind=kind, signal_cov=signal_cov, noise_cov=noise_cov)


def normalize_power(assignment: PrecoderAssignment, analog_precoder: np.ndarray,
                    num_subcarriers: int, num_streams: int) -> PrecoderAssignment:
    """Scale all digital precoders by one scalar so the combined transmit
    power across subcarriers equals K * N_s exactly."""
    combined = analog_precoder @ assignment.matrices  # (K, N_t, N_s)
    total = float(np.sum(np.abs(combined) ** 2))
    if total <= 0.0:
        raise ValueError("cannot normalize an all-zero precoder assignment")
    scale = np.sqrt(num_subcarriers * num_streams / total)
    return replace(assignment, matrices=assignment.matrices * scale)


def combiner(h_eff_k: np.ndarray, f_k: np.ndarray, spec: EqualizerSpec) -> np.ndarray:
    """ZF pseudo-inverse or MMSE Wiener filter for one subcarrier."""
    a = h_eff_k @ f_k  # (N_r_RF, N_s)
    if spec.kind == ZF:
        singulars = np.linalg.svd(a, compute_uv=False)
        if singulars[-1] <= 0 or singulars[0] / singulars[-1] > ZF_CONDITION_LIMIT:
            raise SingularEffectiveChannel(
                "effective channel is rank deficient for zero forcing")
        gram = a.conj().T @ a
        return np.linalg.solve(gram, a.conj().T)
    gram = a @ spec.signal_cov @ a.conj().T + spec.noise_cov
    return spec.signal_cov @ a.conj().T @ np.linalg.inv(gram)


def compute_combiners(h_eff: np.ndarray, assignment: PrecoderAssignment,
                      spec: EqualizerSpec):
    """Batched combiners for all subcarriers.

    Returns (W, flags): W has shape (K, N_s, N_r_RF); ZF-singular
    subcarriers are flagged and get an all-zero combiner instead of an
    exception so sweeps can continue.
    """
    a = h_eff @ assignment.matrices  # (K, N_r_RF, N_s)
    num_subcarriers, _, num_streams = a.shape
    flags = np.zeros(num_subcarriers, dtype=bool)
    if spec.kind == ZF:
        singulars = np.linalg.svd(a, compute_uv=False)
        flags = (singulars[:, -1] <= 0) | (singulars[:, 0] > ZF_CONDITION_LIMIT * singulars[:, -1])
        safe = a.copy()
        safe[flags] = np.eye(a.shape[1], num_streams)
        gram = safe.conj().transpose(0, 2, 1) @ safe
        combiners = np.linalg.solve(gram, safe.conj().transpose(0, 2, 1))
        combiners[flags] = 0.0
        return combiners, flags
    ah = a.conj().transpose(0, 2, 1)
    gram = a @ spec.signal_cov @ ah + spec.noise_cov
    combiners = spec.signal_cov @ ah @ np.linalg.inv(gram)
    return combiners, flags


def spectral_efficiency(h_eff: np.ndarray, assignment: PrecoderAssignment,
                        combiners: np.ndarray | None, power: float,
                        noise_var: float) -> LinkMetrics:
    """Mean log-det rate over subcarriers of the stream-domain channel.

    ``combiners=None`` evaluates the rate of H_eff @ F directly (no
    combiner shaping), which is useful for ablations.
    """
    a = h_eff @ assignment.matrices  # (K, N_r_RF, N_s)
    h_eq = a if combiners is None else combiners @ a
    num_subcarriers = h_eq.shape[0]
    num_streams = assignment.matrices.shape[2]
    load = power / (num_subcarriers * num_streams * noise_var)
    gram = np.eye(h_eq.shape[1]) + load * (h_eq @ h_eq.conj().transpose(0, 2, 1))
    _, logdet = np.linalg.slogdet(gram)
    rates = logdet / np.log(2.0)
    return LinkMetrics(spectral_efficiency=float(np.mean(rates)),
                       ber=float("nan"), per_subcarrier_rate=rates)


def simulate_ber(channel: ChannelRealization, beams: AnalogBeamformers,
                 assignment: PrecoderAssignment, combiners: np.ndarray,
                 snr_db: float, num_symbols: int, rng: np.random.Generator,
                 noise_var: float = 1.0) -> float:
    """Monte-Carlo QPSK bit error rate through the full receive chain.

    Transmits Gray-mapped QPSK with per-subcarrier symbol energy
    P/(K*N_s), propagates through the true effective channel, adds AWGN at
    the antennas (colored by the analog combiner), equalizes with the
    given combiners, and hard-detects by quadrant.
    """
    h_eff = effective_channel(channel.freq, beams)
    num_subcarriers, _, _ = h_eff.shape
    num_streams = assignment.matrices.shape[2]
    num_rx = beams.combiner.shape[0]
    power = snr_db_to_power(snr_db, num_subcarriers, noise_var)
    amplitude = np.sqrt(power / (num_subcarriers * num_streams))

    signal_path = h_eff @ assignment.matrices  # (K, N_r_RF, N_s)
    bits = rng.integers(0, 2, size=(2, num_subcarriers, num_streams, num_symbols))
    symbols = amplitude * ((1.0 - 2.0 * bits[0]) + 1j * (1.0 - 2.0 * bits[1])) / np.sqrt(2.0)

    received = signal_path @ symbols
    noise = np.sqrt(noise_var / 2.0) * (
        rng.standard_normal((num_subcarriers, num_rx, num_symbols))
        + 1j * rng.standard_normal((num_subcarriers, num_rx, num_symbols)))
    received = received + beams.combiner.conj().T @ noise
    estimates = combiners @ received  # (K, N_s, S)

    errors = np.count_nonzero((estimates.real < 0) != (bits[0] == 1))
    errors += np.count_nonzero((estimates.imag < 0) != (bits[1] == 1))
    return errors / (2.0 * num_subcarriers * num_streams * num_symbols)
