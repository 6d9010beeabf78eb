"""Monte-Carlo experiment runner with deterministic seeding and CSV/JSON output.

Seeding scheme: every random draw comes from a generator spawned as
``SeedSequence(master_seed, spawn_key=(purpose, *indices))``.  Purposes are
fixed module constants, so adding methods or SNR points never perturbs the
channel draws, and realizations are independent of execution order.

Within one realization, every method sees the same channel draw and the
same corrupted CSI; BER noise is re-seeded per (realization, snr) and
reused across methods for a paired comparison.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import assignment as asg
from . import channel as chan
from . import codebook as cbk
from . import link
from .beams import analog_beamformers, effective_channel

PURPOSE_TRAINING = 0
PURPOSE_CHANNEL = 1
PURPOSE_CSI = 2
PURPOSE_NOISE = 3

CURVE_COLUMNS = ("method", "snr_db", "rho", "mean_se", "mean_ber",
                 "feedback_bits_paper", "feedback_bits_per_stream",
                 "eval_count", "realizations")

RAW_COLUMNS = ("realization", "method", "snr_db", "rho", "se", "ber",
               "feedback_bits_paper", "feedback_bits_per_stream",
               "eval_count", "assign_time_s")


def child_rng(master_seed: int, purpose: int, *indices) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(purpose, *indices))
    return np.random.default_rng(seq)


@dataclass
class ExperimentSpec:
    system: chan.SystemConfig
    snr_grid_db: tuple = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    methods: tuple = asg.METHODS
    num_realizations: int = 10
    num_symbols_per_snr: int = 16
    rho_grid: tuple = (1.0, 0.9, 0.7)
    master_seed: int = 0
    output_dir: str = "results"
    num_train_realizations: int = 20
    lloyd_max_iters: int = 50
    lloyd_tol: float = 1e-9
    equalizer: str = link.MMSE

    def validate(self):
        if not self.snr_grid_db:
            raise ValueError("snr grid must be non-empty")
        if not self.rho_grid:
            raise ValueError("rho grid must be non-empty")
        if self.num_realizations < 1:
            raise ValueError("num_realizations must be >= 1")
        if self.num_symbols_per_snr < 1:
            raise ValueError("num_symbols_per_snr must be >= 1")
        for method in self.methods:
            if method not in asg.METHODS:
                raise ValueError(f"unknown method {method!r}")
        for rho in self.rho_grid:
            if not 0.0 <= rho <= 1.0:
                raise ValueError("rho values must lie in [0, 1]")


@dataclass
class RawRow:
    realization: int
    method: str
    snr_db: float
    rho: float
    se: float
    ber: float
    feedback_bits_paper: int
    feedback_bits_per_stream: int
    eval_count: int
    assign_time_s: float


@dataclass
class CurveRow:
    method: str
    snr_db: float
    rho: float
    mean_se: float
    mean_ber: float
    feedback_bits_paper: float
    feedback_bits_per_stream: float
    eval_count: float
    realizations: int


@dataclass
class RunRecord:
    spec: ExperimentSpec
    spec_hash: str
    raw_rows: list = field(default_factory=list)

    def aggregate(self) -> list:
        """Per-(method, rho, snr) means of the raw rows, in spec order."""
        curves = []
        for method in self.spec.methods:
            for rho in self.spec.rho_grid:
                for snr in self.spec.snr_grid_db:
                    rows = [r for r in self.raw_rows
                            if r.method == method and r.rho == rho and r.snr_db == snr]
                    if not rows:
                        continue
                    curves.append(CurveRow(
                        method=method, snr_db=snr, rho=rho,
                        mean_se=float(np.mean([r.se for r in rows])),
                        mean_ber=float(np.mean([r.ber for r in rows])),
                        feedback_bits_paper=float(np.mean([r.feedback_bits_paper for r in rows])),
                        feedback_bits_per_stream=float(np.mean([r.feedback_bits_per_stream for r in rows])),
                        eval_count=float(np.mean([r.eval_count for r in rows])),
                        realizations=len(rows),
                    ))
        return curves

    def mean_assign_times(self) -> dict:
        times = {}
        for method in self.spec.methods:
            rows = [r.assign_time_s for r in self.raw_rows if r.method == method]
            if rows:
                times[method] = float(np.mean(rows))
        return times


def spec_hash(spec: ExperimentSpec) -> str:
    payload = asdict(spec)
    payload.pop("output_dir", None)  # moving the output must not change the hash
    canonical = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _ensure_writable(directory: Path):
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {directory} is not writable: {exc}") from exc


def train_codebook(spec: ExperimentSpec) -> cbk.Codebook:
    vectors = cbk.training_set(spec.system, spec.num_train_realizations,
                               child_rng(spec.master_seed, PURPOSE_TRAINING, 0))
    return cbk.train_lloyd(vectors, spec.system.codebook_bits,
                           child_rng(spec.master_seed, PURPOSE_TRAINING, 1),
                           max_iters=spec.lloyd_max_iters, tol=spec.lloyd_tol)


def run_experiment(spec: ExperimentSpec, codebook: cbk.Codebook | None = None) -> RunRecord:
    """Execute the full sweep; deterministic up to the wall-time fields."""
    spec.validate()
    spec.system.validate()
    _ensure_writable(Path(spec.output_dir))
    cfg = spec.system
    if codebook is None:
        codebook = train_codebook(spec)

    record = RunRecord(spec=spec, spec_hash=spec_hash(spec))
    for r in range(spec.num_realizations):
        paths, realization = chan.draw_channel(cfg, child_rng(spec.master_seed, PURPOSE_CHANNEL, r))
        beams = analog_beamformers(paths, cfg)
        h_eff_true = effective_channel(realization.freq, beams)
        for rho_idx, rho in enumerate(spec.rho_grid):
            h_eff_sel = chan.corrupt_csi(h_eff_true, rho,
                                         child_rng(spec.master_seed, PURPOSE_CSI, r, rho_idx))
            for method in spec.methods:
                started = time.perf_counter()
                assignment = asg.build_assignment(method, h_eff_sel, codebook,
                                                  cfg.pilot_spacing, cfg.num_streams)
                assignment = link.normalize_power(assignment, beams.precoder,
                                                  cfg.num_subcarriers, cfg.num_streams)
                assign_time = time.perf_counter() - started
                for snr_idx, snr_db in enumerate(spec.snr_grid_db):
                    power = link.snr_db_to_power(snr_db, cfg.num_subcarriers,
                                                 cfg.noise_variance)
                    equalizer = link.make_equalizer(
                        spec.equalizer, power, cfg.num_subcarriers, cfg.num_streams,
                        cfg.noise_variance, analog_combiner=beams.combiner,
                        ideal_noise=cfg.ideal_mmse_noise)
                    combiners, _ = link.compute_combiners(h_eff_true, assignment, equalizer)
                    metrics = link.spectral_efficiency(h_eff_true, assignment, combiners,
                                                       power, cfg.noise_variance)
                    ber = link.simulate_ber(realization, beams, assignment, combiners,
                                            snr_db, spec.num_symbols_per_snr,
                                            child_rng(spec.master_seed, PURPOSE_NOISE, r, snr_idx),
                                            noise_var=cfg.noise_variance)
                    record.raw_rows.append(RawRow(
                        realization=r, method=method, snr_db=snr_db, rho=rho,
                        se=metrics.spectral_efficiency, ber=ber,
                        feedback_bits_paper=assignment.feedback_bits_paper,
                        feedback_bits_per_stream=assignment.feedback_bits_per_stream,
                        eval_count=assignment.eval_count,
                        assign_time_s=assign_time,
                    ))
    return record


# --- output files ----------------------------------------------------------

def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_outputs(record: RunRecord, directory) -> dict:
    """Write summary.json, curves.csv, and raw.csv; byte-identical per record."""
    directory = Path(directory)
    _ensure_writable(directory)

    curves = record.aggregate()
    curve_lines = [",".join(CURVE_COLUMNS)]
    for row in curves:
        curve_lines.append(",".join(_format(getattr(row, col)) for col in CURVE_COLUMNS))
    curves_path = directory / "curves.csv"
    curves_path.write_text("\n".join(curve_lines) + "\n")

    raw_lines = [",".join(RAW_COLUMNS)]
    for row in record.raw_rows:
        raw_lines.append(",".join(_format(getattr(row, col)) for col in RAW_COLUMNS))
    raw_path = directory / "raw.csv"
    raw_path.write_text("\n".join(raw_lines) + "\n")

    summary = {
        "spec_hash": record.spec_hash,
        "spec": asdict(record.spec),
        "aggregates": [asdict(row) for row in curves],
        "mean_assign_time_s": record.mean_assign_times(),
    }
    summary_path = directory / "summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2,
                                       default=repr) + "\n")
    return {"curves": curves_path, "raw": raw_path, "summary": summary_path}


def parse_curves_csv(path) -> list:
    """Exact round-trip reader for curves.csv (repr floats parse losslessly)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != ",".join(CURVE_COLUMNS):
        raise ValueError(f"{path}: unexpected curves.csv header")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(CurveRow(
            method=parts[0], snr_db=float(parts[1]), rho=float(parts[2]),
            mean_se=float(parts[3]), mean_ber=float(parts[4]),
            feedback_bits_paper=float(parts[5]), feedback_bits_per_stream=float(parts[6]),
            eval_count=float(parts[7]), realizations=int(parts[8]),
        ))
    return rows


# --- config files carrying experiment keys ----------------------------------

EXPERIMENT_KEYS = {
    "num_realizations": int,
    "num_symbols_per_snr": int,
    "num_train_realizations": int,
    "master_seed": int,
}


def load_config_file(path):
    """Split a key-value config file into (SystemConfig, experiment kwargs)."""
    mapping = chan.read_key_values(path)
    experiment = {}
    for key, cast in EXPERIMENT_KEYS.items():
        if key in mapping:
            experiment[key] = cast(mapping.pop(key))
    system = chan.system_config_from_mapping(mapping)
    return system, experiment
