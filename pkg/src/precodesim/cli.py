"""Command-line front end.

Subcommands:
  run              Monte-Carlo sweep -> summary.json / curves.csv / raw.csv
  codebook train   train a Lloyd codebook and write it to a text file
  dump-assignment  per-subcarrier codeword indices of one method as CSV
"""

from __future__ import annotations

import argparse
import sys

from . import assignment as asg
from . import channel as chan
from . import codebook as cbk
from . import harness
from .beams import analog_beamformers, effective_channel


def parse_snr_range(text: str):
    try:
        lo, step, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise ValueError(f"--snr expects lo:step:hi, got {text!r}")
    if step <= 0:
        raise ValueError("--snr step must be positive")
    values = []
    current = lo
    while current <= hi + 1e-9:
        values.append(round(current, 12))
        current += step
    if not values:
        raise ValueError("--snr range is empty")
    return tuple(values)


def parse_float_list(text: str):
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got {text!r}")


def parse_methods(text: str):
    methods = tuple(part.strip() for part in text.split(",") if part.strip())
    for method in methods:
        if method not in asg.METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {', '.join(asg.METHODS)}")
    return methods


def _cmd_run(args) -> int:
    system, experiment = harness.load_config_file(args.config)
    spec = harness.ExperimentSpec(system=system, output_dir=args.out, **experiment)
    if args.seed is not None:
        spec.master_seed = args.seed
    if args.methods:
        spec.methods = parse_methods(args.methods)
    if args.snr:
        spec.snr_grid_db = parse_snr_range(args.snr)
    if args.rho:
        spec.rho_grid = parse_float_list(args.rho)
    if args.realizations is not None:
        spec.num_realizations = args.realizations
    if args.symbols is not None:
        spec.num_symbols_per_snr = args.symbols
    record = harness.run_experiment(spec)
    paths = harness.write_outputs(record, spec.output_dir)
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def _cmd_codebook_train(args) -> int:
    system, experiment = harness.load_config_file(args.config)
    seed = args.seed if args.seed is not None else experiment.get("master_seed", 0)
    count = args.realizations
    if count is None:
        count = experiment.get("num_train_realizations", 20)
    vectors = cbk.training_set(system, count, harness.child_rng(seed, harness.PURPOSE_TRAINING, 0))
    codebook = cbk.train_lloyd(vectors, system.codebook_bits,
                               harness.child_rng(seed, harness.PURPOSE_TRAINING, 1))
    cbk.save_codebook(codebook, args.out)
    print(f"wrote codebook ({len(codebook)} codewords, {codebook.bits} bits): {args.out}")
    return 0


def _cmd_dump_assignment(args) -> int:
    system, experiment = harness.load_config_file(args.config)
    seed = args.seed if args.seed is not None else experiment.get("master_seed", 0)
    spec = harness.ExperimentSpec(system=system, master_seed=seed, **{
        key: value for key, value in experiment.items() if key != "master_seed"})
    codebook = harness.train_codebook(spec)
    paths, realization = chan.draw_channel(system, harness.child_rng(seed, harness.PURPOSE_CHANNEL, 0))
    beams = analog_beamformers(paths, system)
    h_eff = effective_channel(realization.freq, beams)
    h_eff = chan.corrupt_csi(h_eff, system.csi_quality,
                             harness.child_rng(seed, harness.PURPOSE_CSI, 0, 0))
    assignment = asg.build_assignment(args.method, h_eff, codebook,
                                      system.pilot_spacing, system.num_streams)
    asg.write_assignment_csv(assignment, args.out)
    print(f"wrote assignment ({assignment.method}, "
          f"{assignment.eval_count} gain evaluations): {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precodesim",
        description="Reduced-feedback hybrid precoding link-level simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment")
    run.add_argument("--config", required=True, help="key=value config file")
    run.add_argument("--seed", type=int, default=None, help="master seed")
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--methods", default=None,
                     help=f"comma list from: {', '.join(asg.METHODS)}")
    run.add_argument("--snr", default=None, help="SNR grid as lo:step:hi (dB)")
    run.add_argument("--rho", default=None, help="comma list of CSI qualities")
    run.add_argument("--realizations", type=int, default=None)
    run.add_argument("--symbols", type=int, default=None,
                     help="OFDM symbols per SNR point in the BER simulation")
    run.set_defaults(func=_cmd_run)

    codebook = sub.add_parser("codebook", help="codebook utilities")
    codebook_sub = codebook.add_subparsers(dest="codebook_command", required=True)
    train = codebook_sub.add_parser("train", help="train and save a codebook")
    train.add_argument("--config", required=True)
    train.add_argument("--out", required=True, help="output codebook file")
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--realizations", type=int, default=None,
                       help="training channel draws")
    train.set_defaults(func=_cmd_codebook_train)

    dump = sub.add_parser("dump-assignment",
                          help="dump per-subcarrier codeword indices as CSV")
    dump.add_argument("--config", required=True)
    dump.add_argument("--method", required=True, choices=asg.METHODS)
    dump.add_argument("--out", required=True)
    dump.add_argument("--seed", type=int, default=None)
    dump.set_defaults(func=_cmd_dump_assignment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
