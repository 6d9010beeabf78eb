import numpy as np
import pytest

from precodesim import (
    ChannelRealization,
    ConfigError,
    PathSet,
    SystemConfig,
    array_response,
    channel_realization,
    corrupt_csi,
    delay_taps,
    draw_paths,
    raised_cosine,
    to_frequency,
)
from precodesim.channel import (
    load_realization,
    load_system_config,
    realization_cache_path,
    save_realization,
    save_system_config,
)

from conftest import desk_config


def boresight_path():
    return PathSet(gains=np.array([1.0 + 0j]), delays=np.array([0.0]),
                   aod=np.array([0.0]), aoa=np.array([0.0]))


class TestArrayResponse:
    def test_broadside_is_uniform(self):
        np.testing.assert_allclose(array_response(4, 0.0), 0.5 * np.ones(4))

    def test_endfire_two_elements(self):
        expected = np.array([1.0, -1.0]) / np.sqrt(2.0)
        np.testing.assert_allclose(array_response(2, np.pi / 2, 0.5), expected, atol=1e-12)

    def test_matches_scalar_formula(self):
        # independent element-wise evaluation of the steering phase
        n_ant, angle, spacing = 8, 0.3, 0.5
        vector = array_response(n_ant, angle, spacing)
        for n in range(n_ant):
            expected = np.exp(1j * 2 * np.pi * spacing * n * np.sin(angle)) / np.sqrt(n_ant)
            assert abs(vector[n] - expected) < 1e-14

    def test_unit_norm(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n_ant = int(rng.integers(1, 64))
            angle = rng.uniform(-np.pi / 2, np.pi / 2)
            assert abs(np.linalg.norm(array_response(n_ant, angle)) - 1.0) < 1e-12


class TestRaisedCosine:
    def test_peak_and_nyquist_nulls(self):
        assert raised_cosine(0.0, 1.0) == pytest.approx(1.0)
        for d in range(1, 6):
            assert abs(raised_cosine(float(d), 1.0)) < 1e-12

    def test_singular_point_limit(self):
        rolloff = 0.35
        t_star = 1.0 / (2 * rolloff)
        expected = (np.pi / 4) * np.sinc(1.0 / (2 * rolloff))
        assert raised_cosine(t_star, rolloff) == pytest.approx(expected, rel=1e-9)
        near = raised_cosine(t_star * (1 + 1e-7), rolloff)
        assert near == pytest.approx(expected, rel=1e-4)

    def test_half_amplitude_at_unit_rolloff(self):
        # the rolloff-1 singular point sits at t = T/2 with value exactly 1/2
        assert raised_cosine(0.5, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_zero_rolloff_is_sinc(self):
        t = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(raised_cosine(t, 0.0), np.sinc(t))


class TestDrawPaths:
    def test_path_count_and_delay_range(self):
        cfg = SystemConfig()  # the large default setup: L=24, D=32
        paths = draw_paths(cfg, np.random.default_rng(5))
        assert len(paths) == 24
        assert np.all(paths.delays >= 0.0)
        assert np.all(paths.delays < 31.0 * paths.sampling_interval)
        assert np.all(np.abs(paths.aod) <= np.pi / 2)
        assert np.all(np.abs(paths.aoa) <= np.pi / 2)

    def test_seed_determinism_bitwise(self):
        cfg = desk_config()
        first = draw_paths(cfg, np.random.default_rng(42))
        second = draw_paths(cfg, np.random.default_rng(42))
        assert np.array_equal(first.gains, second.gains)
        assert np.array_equal(first.delays, second.delays)
        assert np.array_equal(first.aod, second.aod)
        assert np.array_equal(first.aoa, second.aoa)


class TestDelayTaps:
    def test_single_boresight_path(self):
        cfg = desk_config(num_paths=1, num_tx_rf=1, num_rx_rf=1, num_streams=1)
        taps = delay_taps(boresight_path(), cfg)
        nt, nr = cfg.num_tx_antennas, cfg.num_rx_antennas
        expected0 = np.sqrt(nt * nr) * np.outer(array_response(nr, 0.0),
                                                array_response(nt, 0.0).conj())
        np.testing.assert_allclose(taps[0], expected0, atol=1e-12)
        assert np.max(np.abs(taps[1:])) < 1e-12  # Nyquist nulls at integer offsets

    def test_energy_matches_bruteforce_double_sum(self):
        cfg = desk_config(num_paths=3, num_tx_rf=3, num_rx_rf=3)
        rng = np.random.default_rng(7)
        paths = draw_paths(cfg, rng)
        taps = delay_taps(paths, cfg)
        energy = np.sum(np.abs(taps) ** 2)

        # brute force: expand || sum_l c_l(d) a_r a_t^H ||_F^2 over path pairs
        nt, nr, n_paths = cfg.num_tx_antennas, cfg.num_rx_antennas, len(paths)
        scale_sq = paths.pathloss * nt * nr / n_paths
        expected = 0.0
        for d in range(cfg.max_delay_taps):
            for a in range(n_paths):
                for b in range(n_paths):
                    c_a = paths.gains[a] * raised_cosine(d - paths.delays[a], cfg.rolloff)
                    c_b = paths.gains[b] * raised_cosine(d - paths.delays[b], cfg.rolloff)
                    rx_inner = np.vdot(array_response(nr, paths.aoa[b]),
                                       array_response(nr, paths.aoa[a]))
                    tx_inner = np.vdot(array_response(nt, paths.aod[a]),
                                       array_response(nt, paths.aod[b]))
                    expected += (c_a * np.conj(c_b) * rx_inner * tx_inner).real
        expected *= scale_sq
        assert energy == pytest.approx(expected, rel=1e-10)

    def test_rank_bounded_by_path_count(self):
        cfg = desk_config(num_tx_antennas=8, num_rx_antennas=8, num_paths=2,
                          num_tx_rf=2, num_rx_rf=2)
        paths = draw_paths(cfg, np.random.default_rng(3))
        taps = delay_taps(paths, cfg)
        for tap in taps:
            assert np.linalg.matrix_rank(tap, tol=1e-10) <= 2


class TestToFrequency:
    def test_single_tap_is_flat(self):
        rng = np.random.default_rng(11)
        single = rng.standard_normal((1, 3, 2)) + 1j * rng.standard_normal((1, 3, 2))
        freq = to_frequency(single, 8)
        for k in range(8):
            np.testing.assert_allclose(freq[k], single[0], atol=1e-14)

    def test_two_tap_hand_dft(self):
        # scalar taps h = (1, j), K = 4: H[k] = 1 + j*exp(-j*pi*k/2), k = 1..4
        taps = np.array([[[1.0 + 0j]], [[0.0 + 1.0j]]])
        freq = to_frequency(taps, 4)[:, 0, 0]
        expected = np.array([2.0 + 0j, 1.0 - 1.0j, 0.0 + 0j, 1.0 + 1.0j])
        np.testing.assert_allclose(freq, expected, atol=1e-14)

    def test_parseval_random_configs(self):
        rng = np.random.default_rng(19)
        for seed in range(10):
            cfg = desk_config(num_subcarriers=int(rng.choice([16, 32, 64])),
                              pilot_spacing=8,
                              max_delay_taps=int(rng.integers(2, 12)))
            paths = draw_paths(cfg, np.random.default_rng(seed))
            realization = channel_realization(paths, cfg)
            freq_energy = np.sum(np.abs(realization.freq) ** 2)
            tap_energy = cfg.num_subcarriers * np.sum(np.abs(realization.taps) ** 2)
            assert freq_energy == pytest.approx(tap_energy, rel=1e-9)

    def test_rank_one_at_every_subcarrier_for_single_path(self):
        cfg = desk_config(num_paths=1, num_tx_rf=1, num_rx_rf=1, num_streams=1)
        paths = draw_paths(cfg, np.random.default_rng(2))
        realization = channel_realization(paths, cfg)
        singulars = np.linalg.svd(realization.freq, compute_uv=False)
        assert np.all(singulars[:, 1:] < 1e-9 * (1 + singulars[:, :1]))

    def test_too_many_taps_rejected(self):
        with pytest.raises(ValueError):
            to_frequency(np.zeros((9, 2, 2)), 8)


class TestCorruptCsi:
    def test_perfect_csi_is_identity(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((4, 3, 2)) + 1j * rng.standard_normal((4, 3, 2))
        out = corrupt_csi(h, 1.0, np.random.default_rng(1))
        assert np.array_equal(out, h)
        assert out is not h

    def test_zero_quality_is_independent(self):
        rng = np.random.default_rng(8)
        h = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        h = h / np.linalg.norm(h)
        noise_rng = np.random.default_rng(9)
        inner = []
        for _ in range(10_000):
            out = corrupt_csi(h, 0.0, noise_rng)
            inner.append(np.vdot(h, out) / np.linalg.norm(out))
        assert abs(np.mean(inner)) < 0.05

    def test_moment_oracle_at_rho_07(self):
        # E||H_est||_F^2 = rho^2 * 1 + (1 - rho^2) * (#entries) on unit-norm input
        rng = np.random.default_rng(21)
        shape = (2, 3)
        h = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        h = h / np.linalg.norm(h)
        noise_rng = np.random.default_rng(22)
        samples = [np.sum(np.abs(corrupt_csi(h, 0.7, noise_rng)) ** 2)
                   for _ in range(10_000)]
        expected = 0.49 + 0.51 * h.size
        assert np.mean(samples) == pytest.approx(expected, rel=0.02)

    def test_invalid_rho_rejected(self):
        with pytest.raises(ValueError):
            corrupt_csi(np.zeros((1, 1)), 1.5, np.random.default_rng(0))


class TestSystemConfig:
    def test_invariants_rejected(self):
        with pytest.raises(ConfigError):
            desk_config(num_streams=5)  # exceeds RF chains
        with pytest.raises(ConfigError):
            desk_config(pilot_spacing=5)  # does not divide K
        with pytest.raises(ConfigError):
            desk_config(num_paths=2)  # fewer paths than RF chains
        with pytest.raises(ConfigError):
            desk_config(num_tx_rf=32)  # more RF chains than antennas
        with pytest.raises(ConfigError):
            desk_config(rolloff=1.5)

    def test_default_power_tracks_grid(self):
        cfg = desk_config(noise_variance=2.0)
        assert cfg.total_power == pytest.approx(2.0 * cfg.num_subcarriers)

    def test_config_file_round_trip(self, tmp_path):
        cfg = desk_config(rolloff=0.35, csi_quality=0.7, phase_bits=2,
                          independent_rx_ranking=True)
        path = tmp_path / "system.cfg"
        save_system_config(cfg, path)
        assert load_system_config(path) == cfg

    def test_config_file_errors(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("num_tx_antennas = 8\nbogus_key = 1\n")
        with pytest.raises(ConfigError, match="bogus_key"):
            load_system_config(path)
        path.write_text("num_tx_antennas 8\n")
        with pytest.raises(ConfigError, match="key = value"):
            load_system_config(path)
        path.write_text("num_tx_antennas = 8\nnum_tx_antennas = 9\n")
        with pytest.raises(ConfigError, match="duplicate"):
            load_system_config(path)


class TestRealizationCache:
    def test_round_trip(self, tmp_path):
        cfg = desk_config()
        paths = draw_paths(cfg, np.random.default_rng(33))
        realization = channel_realization(paths, cfg)
        path = realization_cache_path(tmp_path, cfg, seed=33)
        save_realization(path, realization)
        loaded = load_realization(path)
        assert np.array_equal(loaded.taps, realization.taps)
        assert np.array_equal(loaded.freq, realization.freq)

    def test_key_depends_on_config(self, tmp_path):
        one = realization_cache_path(tmp_path, desk_config(), 1)
        other = realization_cache_path(tmp_path, desk_config(rolloff=0.3), 1)
        assert one != other
