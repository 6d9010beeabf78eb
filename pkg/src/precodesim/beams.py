"""Analog beamformer construction from dominant propagation paths.

Paths are ranked by their accumulated tap power; the strongest ones donate
their departure/arrival steering vectors as columns of the frequency-flat
analog precoder and combiner.  Entries keep constant modulus 1/sqrt(N) by
construction (optionally with quantized phases).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PathSet, SystemConfig, array_response, raised_cosine


@dataclass
class PathPowerRanking:
    powers: np.ndarray             # (L,), accumulated tap power per path
    selected_indices: np.ndarray   # path index per RF chain, strongest first


@dataclass
class AnalogBeamformers:
    precoder: np.ndarray  # F_RF, (N_t, N_t_RF)
    combiner: np.ndarray  # W_RF, (N_r, N_r_RF)


def path_powers(paths: PathSet, config: SystemConfig) -> np.ndarray:
    """Per-path power accumulated across all delay taps."""
    d_grid = np.arange(config.max_delay_taps) * paths.sampling_interval
    pulse = raised_cosine(d_grid[:, None] - paths.delays[None, :],
                          config.rolloff, paths.sampling_interval)
    return np.sum(np.abs(paths.gains[None, :] * pulse) ** 2, axis=0)


def select_paths(powers: np.ndarray, count: int) -> np.ndarray:
    """Greedy argmax without replacement; ties go to the lowest path index."""
    powers = np.asarray(powers)
    if count > len(powers):
        raise ValueError(f"cannot select {count} paths from {len(powers)}")
    order = np.argsort(-powers, kind="stable")
    return order[:count]


def rank_paths(paths: PathSet, config: SystemConfig) -> PathPowerRanking:
    """Rank paths by power and keep enough for both RF chain banks."""
    powers = path_powers(paths, config)
    count = max(config.num_tx_rf, config.num_rx_rf)
    return PathPowerRanking(powers=powers,
                            selected_indices=select_paths(powers, count))


def _quantize_phases(matrix: np.ndarray, bits: int) -> np.ndarray:
    step = 2.0 * np.pi / (2 ** bits)
    quantized = np.round(np.angle(matrix) / step) * step
    return np.abs(matrix) * np.exp(1j * quantized)


def build_analog(paths: PathSet, ranking: PathPowerRanking,
                 config: SystemConfig) -> AnalogBeamformers:
    """Stack steering vectors of the selected paths into F_RF and W_RF.

    Transmit chains take the AoDs of the top num_tx_rf paths, receive
    chains the AoAs of the top num_rx_rf paths of the same ranking.  With
    independent_rx_ranking the receive side re-ranks from scratch, which
    coincides with the shared ranking because the power metric carries no
    array-side information; the flag exists for auditability.
    """
    needed = max(config.num_tx_rf, config.num_rx_rf)
    if len(ranking.selected_indices) < needed:
        raise ValueError("ranking does not cover every RF chain")
    tx_sel = ranking.selected_indices[:config.num_tx_rf]
    if config.independent_rx_ranking:
        rx_sel = select_paths(ranking.powers, config.num_rx_rf)
    else:
        rx_sel = ranking.selected_indices[:config.num_rx_rf]
    f_rf = np.stack([array_response(config.num_tx_antennas, paths.aod[i],
                                    config.antenna_spacing) for i in tx_sel], axis=1)
    w_rf = np.stack([array_response(config.num_rx_antennas, paths.aoa[i],
                                    config.antenna_spacing) for i in rx_sel], axis=1)
    if config.phase_bits > 0:
        f_rf = _quantize_phases(f_rf, config.phase_bits)
        w_rf = _quantize_phases(w_rf, config.phase_bits)
    return AnalogBeamformers(precoder=f_rf, combiner=w_rf)


def analog_beamformers(paths: PathSet, config: SystemConfig) -> AnalogBeamformers:
    """Rank and build in one step."""
    return build_analog(paths, rank_paths(paths, config), config)


def effective_channel(freq: np.ndarray, beams: AnalogBeamformers) -> np.ndarray:
    """Reduced channel between RF chains: W_RF^H H[k] F_RF per subcarrier."""
    freq = np.asarray(freq)
    if freq.shape[-1] != beams.precoder.shape[0]:
        raise ValueError("channel/analog precoder dimension mismatch")
    if freq.shape[-2] != beams.combiner.shape[0]:
        raise ValueError("channel/analog combiner dimension mismatch")
    return beams.combiner.conj().T @ freq @ beams.precoder
