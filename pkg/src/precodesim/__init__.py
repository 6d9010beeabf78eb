"""Link-level simulator for reduced-feedback hybrid precoding in wideband
mmWave MIMO-OFDM: geometric channel synthesis, path-based analog
beamforming, Lloyd codebook digital precoding, binary-search switching-point
interpolation with four baselines, and a seeded Monte-Carlo harness."""

from .assignment import (
    METHOD_CLUSTER_SIMPLE,
    METHOD_CLUSTER_SNR,
    METHOD_EXHAUSTIVE,
    METHOD_GAUSSIAN,
    METHOD_GEODESIC,
    METHOD_HIERARCHICAL,
    METHODS,
    PilotGrid,
    PrecoderAssignment,
    assign_pilots,
    build_assignment,
    cluster_simple,
    cluster_snr_max,
    hierarchical_interpolate,
    interpolate_gaussian,
    interpolate_geodesic,
    paper_feedback_bits,
    per_subcarrier_exhaustive,
    pilot_positions,
    write_assignment_csv,
)
from .beams import (
    AnalogBeamformers,
    PathPowerRanking,
    analog_beamformers,
    build_analog,
    effective_channel,
    path_powers,
    rank_paths,
    select_paths,
)
from .channel import (
    ChannelRealization,
    ConfigError,
    PathSet,
    SystemConfig,
    array_response,
    channel_realization,
    corrupt_csi,
    delay_taps,
    draw_channel,
    draw_paths,
    load_system_config,
    raised_cosine,
    to_frequency,
)
from .codebook import (
    Codebook,
    DigitalPrecoder,
    load_codebook,
    save_codebook,
    select_codewords,
    train_lloyd,
    training_set,
)
from .harness import (
    ExperimentSpec,
    RunRecord,
    child_rng,
    run_experiment,
    train_codebook,
    write_outputs,
)
from .link import (
    EqualizerSpec,
    LinkMetrics,
    SingularEffectiveChannel,
    combiner,
    compute_combiners,
    make_equalizer,
    normalize_power,
    simulate_ber,
    snr_db_to_power,
    spectral_efficiency,
)

__version__ = "0.1.0"
