"""Wideband geometric mmWave channel synthesis.

Delay-domain channels are sums of L discrete propagation paths shaped by a
raised-cosine pulse; per-subcarrier responses follow by direct DFT
evaluation of the tap sequence.  Every operation is a pure function of a
config plus an explicitly passed numpy Generator, so realizations are
reproducible from a seed and safe to draw concurrently.

Internal indexing convention: arrays over subcarriers are 0-based, with
position i holding subcarrier k = i + 1 of the 1..K frequency grid.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid system configuration or malformed config file."""


@dataclass
class SystemConfig:
    """Static description of the transceiver and channel dimensions.

    Defaults mirror the large single-user setup used for the headline
    feedback-accounting numbers (128x32 array, 16/12 RF chains, 2048
    subcarriers, pilot spacing 128, 24 paths over 32 delay taps).
    """

    num_tx_antennas: int = 128
    num_rx_antennas: int = 32
    num_tx_rf: int = 16
    num_rx_rf: int = 12
    num_streams: int = 2
    num_subcarriers: int = 2048
    pilot_spacing: int = 128
    num_paths: int = 24
    max_delay_taps: int = 32
    total_power: float | None = None  # None -> num_subcarriers * noise_variance
    noise_variance: float = 1.0
    antenna_spacing: float = 0.5  # element spacing over wavelength
    rolloff: float = 1.0
    codebook_bits: int = 5
    csi_quality: float = 1.0
    phase_bits: int = 0  # 0 disables analog phase quantization
    independent_rx_ranking: bool = False
    ideal_mmse_noise: bool = False

    def __post_init__(self):
        if self.total_power is None:
            self.total_power = float(self.num_subcarriers) * self.noise_variance
        self.validate()

    def validate(self):
        positive_ints = (
            "num_tx_antennas", "num_rx_antennas", "num_tx_rf", "num_rx_rf",
            "num_streams", "num_subcarriers", "pilot_spacing", "num_paths",
            "max_delay_taps",
        )
        for name in positive_ints:
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.total_power <= 0:
            raise ConfigError("total_power must be positive")
        if self.noise_variance <= 0:
            raise ConfigError("noise_variance must be positive")
        if self.antenna_spacing <= 0:
            raise ConfigError("antenna_spacing must be positive")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ConfigError("rolloff must lie in [0, 1]")
        if self.codebook_bits < 1:
            raise ConfigError("codebook_bits must be a positive integer")
        if not 0.0 <= self.csi_quality <= 1.0:
            raise ConfigError("csi_quality must lie in [0, 1]")
        if self.phase_bits < 0:
            raise ConfigError("phase_bits must be a nonnegative integer")
        if self.num_streams > min(self.num_tx_rf, self.num_rx_rf):
            raise ConfigError("num_streams exceeds the available RF chains")
        if self.num_tx_rf > self.num_tx_antennas:
            raise ConfigError("num_tx_rf exceeds num_tx_antennas")
        if self.num_rx_rf > self.num_rx_antennas:
            raise ConfigError("num_rx_rf exceeds num_rx_antennas")
        if self.num_subcarriers % self.pilot_spacing != 0:
            raise ConfigError("pilot_spacing must divide num_subcarriers")
        if self.num_paths < max(self.num_tx_rf, self.num_rx_rf):
            raise ConfigError("num_paths must cover every RF chain without repetition")
        if self.max_delay_taps > self.num_subcarriers:
            raise ConfigError("max_delay_taps must not exceed num_subcarriers")


@dataclass
class PathSet:
    """Geometric parameters of the L propagation paths."""

    gains: np.ndarray      # complex, (L,)
    delays: np.ndarray     # seconds, (L,)
    aod: np.ndarray        # radians, (L,)
    aoa: np.ndarray        # radians, (L,)
    pathloss: float = 1.0
    sampling_interval: float = 1.0

    def __len__(self):
        return len(self.gains)


@dataclass
class ChannelRealization:
    """Delay taps plus the derived per-subcarrier frequency responses."""

    taps: np.ndarray  # (D, N_r, N_t)
    freq: np.ndarray  # (K, N_r, N_t), position i = subcarrier k = i + 1


def raised_cosine(t, rolloff, period=1.0):
    """Raised-cosine pulse sampled at times ``t``.

    The two removable 0/0 points of the closed form (t = +-period/(2*rolloff))
    are replaced by their analytic limit (pi/4) * sinc(1/(2*rolloff)).
    """
    x = np.asarray(t, dtype=float) / period
    if rolloff == 0.0:
        return np.sinc(x)
    denom = 1.0 - (2.0 * rolloff * x) ** 2
    singular = np.abs(denom) < 1e-10
    safe = np.where(singular, 1.0, denom)
    values = np.sinc(x) * np.cos(np.pi * rolloff * x) / safe
    limit = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * rolloff))
    return np.where(singular, limit, values)


def array_response(num_antennas, angle, spacing_ratio=0.5):
    """Unit-norm ULA steering vector for a departure/arrival angle."""
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    n = np.arange(num_antennas)
    phases = 2.0 * np.pi * spacing_ratio * np.sin(angle) * n
    return np.exp(1j * phases) / np.sqrt(num_antennas)


def draw_paths(config: SystemConfig, rng: np.random.Generator) -> PathSet:
    """Draw L paths: CN(0,1) gains, uniform delays, uniform angles.

    Delays are uniform on [0, (D-1)*T_s); angles uniform on [-pi/2, pi/2];
    pathloss fixed at 1.  Draw order is part of the determinism contract.
    """
    L = config.num_paths
    sampling_interval = 1.0
    gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2.0)
    delays = rng.uniform(0.0, (config.max_delay_taps - 1) * sampling_interval, L)
    aod = rng.uniform(-np.pi / 2.0, np.pi / 2.0, L)
    aoa = rng.uniform(-np.pi / 2.0, np.pi / 2.0, L)
    return PathSet(gains=gains, delays=delays, aod=aod, aoa=aoa,
                   pathloss=1.0, sampling_interval=sampling_interval)


def delay_taps(paths: PathSet, config: SystemConfig) -> np.ndarray:
    """Delay-domain channel: sum of pulse-shaped rank-1 path contributions.

    Returns taps of shape (D, N_r, N_t); each tap is a sum of at most L
    rank-1 outer products a_r(aoa) a_t(aod)^H weighted by the path gain and
    the raised-cosine pulse at that tap's delay offset.
    """
    L = len(paths)
    nt, nr = config.num_tx_antennas, config.num_rx_antennas
    d_grid = np.arange(config.max_delay_taps) * paths.sampling_interval
    pulse = raised_cosine(d_grid[:, None] - paths.delays[None, :],
                          config.rolloff, paths.sampling_interval)
    weights = paths.gains[None, :] * pulse  # (D, L)
    a_rx = np.stack([array_response(nr, phi, config.antenna_spacing)
                     for phi in paths.aoa], axis=1)  # (N_r, L)
    a_tx = np.stack([array_response(nt, theta, config.antenna_spacing)
                     for theta in paths.aod], axis=1)  # (N_t, L)
    scale = np.sqrt(paths.pathloss * nt * nr / L)
    return scale * np.einsum("dl,rl,tl->drt", weights, a_rx, a_tx.conj())


def to_frequency(taps: np.ndarray, num_subcarriers: int, positions=None) -> np.ndarray:
    """Per-subcarrier responses by direct DFT of the delay taps.

    ``positions`` selects 0-based grid positions (subcarrier k = i + 1);
    None evaluates the full grid.  Direct evaluation keeps the formula
    auditable; D << K makes the O(K*D) cost acceptable.
    """
    num_taps = taps.shape[0]
    if num_taps > num_subcarriers:
        raise ValueError("number of delay taps exceeds number of subcarriers")
    if positions is None:
        positions = np.arange(num_subcarriers)
    else:
        positions = np.asarray(positions)
    k = positions + 1  # physical subcarrier index, 1..K
    d = np.arange(num_taps)
    basis = np.exp(-2j * np.pi * np.outer(k, d) / num_subcarriers)  # (|pos|, D)
    return np.tensordot(basis, taps, axes=(1, 0))


def channel_realization(paths: PathSet, config: SystemConfig) -> ChannelRealization:
    taps = delay_taps(paths, config)
    freq = to_frequency(taps, config.num_subcarriers)
    return ChannelRealization(taps=taps, freq=freq)


def draw_channel(config: SystemConfig, rng: np.random.Generator):
    """Convenience: draw paths and build the full realization."""
    paths = draw_paths(config, rng)
    return paths, channel_realization(paths, config)


def corrupt_csi(true_eff: np.ndarray, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Gauss-Markov estimate of an effective channel.

    Returns rho * H + sqrt(1 - rho^2) * E with E i.i.d. CN(0,1), drawn
    independently for every subcarrier and entry.  rho = 1 returns the
    input unchanged (as a copy, without consuming the generator).
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("csi quality rho must lie in [0, 1]")
    if rho == 1.0:
        return true_eff.copy()
    err = (rng.standard_normal(true_eff.shape)
           + 1j * rng.standard_normal(true_eff.shape)) / np.sqrt(2.0)
    return rho * true_eff + np.sqrt(1.0 - rho * rho) * err


# --- config file I/O -------------------------------------------------------

_BOOL_FIELDS = ("independent_rx_ranking", "ideal_mmse_noise")


def read_key_values(path) -> dict:
    """Parse a plain-text ``key = value`` file ('#' starts a comment)."""
    result = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        if key in result:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        result[key] = value
    return result


def system_config_from_mapping(mapping: dict) -> SystemConfig:
    """Build a SystemConfig from string key/values; unknown keys are errors."""
    kwargs = {}
    field_types = {f.name: f.type for f in fields(SystemConfig)}
    for key, value in mapping.items():
        if key not in field_types:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _BOOL_FIELDS:
                kwargs[key] = bool(int(value))
            elif field_types[key] == "int":
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from exc
    return SystemConfig(**kwargs)


def load_system_config(path) -> SystemConfig:
    return system_config_from_mapping(read_key_values(path))


def save_system_config(config: SystemConfig, path):
    lines = []
    for f in fields(SystemConfig):
        value = getattr(config, f.name)
        if f.name in _BOOL_FIELDS:
            value = int(value)
        lines.append(f"{f.name} = {value!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# --- realization cache -----------------------------------------------------

def config_fingerprint(config: SystemConfig) -> str:
    canonical = ";".join(f"{f.name}={getattr(config, f.name)!r}"
                         for f in fields(SystemConfig))
    return hashlib.sha256(canonical.encode()).hexdigest()


def realization_cache_path(directory, config: SystemConfig, seed) -> Path:
    return Path(directory) / f"chan_{config_fingerprint(config)[:16]}_seed{seed}.npz"


def save_realization(path, realization: ChannelRealization):
    np.savez(path, taps=realization.taps, freq=realization.freq)


def load_realization(path) -> ChannelRealization:
    with np.load(path) as data:
        return ChannelRealization(taps=data["taps"], freq=data["freq"])
