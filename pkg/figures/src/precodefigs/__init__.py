"""Figure generation for precodesim experiment outputs.

A strict viewer over curves.csv/summary.json: parses the delimited
aggregates and renders the spectral-efficiency, BER, CSI-robustness, and
cost figures without recomputing any metric.
"""

from .curves import CurveRow, CurveSet, NoDataError, ParseError, load_curves, parse_curves_file
from .plots import plot_ber, plot_cost, plot_csi, plot_se

__version__ = "0.1.0"
