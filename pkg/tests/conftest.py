import numpy as np
import pytest

from precodesim import SystemConfig, analog_beamformers, draw_channel, effective_channel


def desk_config(**overrides):
    """Small system used across the unit tests (fast, still multi-stream)."""
    params = dict(
        num_tx_antennas=16, num_rx_antennas=8, num_tx_rf=4, num_rx_rf=4,
        num_streams=2, num_subcarriers=32, pilot_spacing=8, num_paths=6,
        max_delay_taps=8, codebook_bits=3,
    )
    params.update(overrides)
    return SystemConfig(**params)


def random_unit_vectors(rng, count, dim):
    raw = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


@pytest.fixture
def desk_scenario():
    """One seeded desk-scale realization with beams and effective channel."""
    cfg = desk_config()
    rng = np.random.default_rng(1234)
    paths, realization = draw_channel(cfg, rng)
    beams = analog_beamformers(paths, cfg)
    h_eff = effective_channel(realization.freq, beams)
    return cfg, paths, realization, beams, h_eff
