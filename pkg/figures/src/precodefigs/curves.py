"""Readers for the simulator's delimited outputs.

The figure tools are a strict viewer: they parse curves.csv (and the spec
hash from summary.json when present) and never recompute a metric, so the
simulator stays the single source of truth for every plotted number.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

REQUIRED_COLUMNS = ("method", "snr_db", "rho", "mean_se", "mean_ber",
                    "feedback_bits_paper", "feedback_bits_per_stream",
                    "eval_count", "realizations")


class ParseError(ValueError):
    """curves.csv/summary.json malformed or missing required columns."""


class NoDataError(ValueError):
    """The requested figure has no rows to draw."""


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
class CurveSet:
    rows: list
    spec_hash: str | None = None

    def methods(self):
        seen = []
        for row in self.rows:
            if row.method not in seen:
                seen.append(row.method)
        return seen

    def rhos(self):
        return sorted({row.rho for row in self.rows}, reverse=True)

    def group(self, method, rho):
        """Rows of one (method, rho) curve, SNR ascending."""
        rows = [r for r in self.rows if r.method == method and r.rho == rho]
        return sorted(rows, key=lambda r: r.snr_db)

    def subset(self, rho):
        return [r for r in self.rows if r.rho == rho]


def parse_curves_file(path) -> list:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"missing curves file: {path}")
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise ParseError(f"{path}: missing required column {column!r}")
        rows = []
        for record in reader:
            try:
                rows.append(CurveRow(
                    method=record["method"],
                    snr_db=float(record["snr_db"]),
                    rho=float(record["rho"]),
                    mean_se=float(record["mean_se"]),
                    mean_ber=float(record["mean_ber"]),
                    feedback_bits_paper=float(record["feedback_bits_paper"]),
                    feedback_bits_per_stream=float(record["feedback_bits_per_stream"]),
                    eval_count=float(record["eval_count"]),
                    realizations=int(record["realizations"]),
                ))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}: bad row {record!r}: {exc}") from exc
    return rows


def load_curves(directory) -> CurveSet:
    """Load curves.csv plus the spec hash from summary.json when present."""
    directory = Path(directory)
    rows = parse_curves_file(directory / "curves.csv")
    spec_hash = None
    summary_path = directory / "summary.json"
    if summary_path.exists():
        try:
            spec_hash = json.loads(summary_path.read_text()).get("spec_hash")
        except json.JSONDecodeError as exc:
            raise ParseError(f"{summary_path}: invalid JSON: {exc}") from exc
    return CurveSet(rows=rows, spec_hash=spec_hash)
