"""Figure renderers for the simulator's aggregate curves.

Every function writes a PNG and returns the exact series it drew (the raw
CSV values, plus the display values where the BER plot clips zeros for the
log axis), so tests can verify figure fidelity without reading pixels.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .curves import CurveSet, NoDataError

BER_FLOOR_FALLBACK = 1e-12  # display floor when every BER value is zero

RHO_STYLES = ("-", "--", ":", "-.")


def _save(fig, out_path):
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_se(curves: CurveSet, out_path, rho: float = 1.0):
    """Spectral efficiency vs SNR, one line per method at the given rho."""
    rows = curves.subset(rho)
    if not rows:
        raise NoDataError(f"no data at rho={rho} to plot spectral efficiency")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    series = {}
    for method in curves.methods():
        group = curves.group(method, rho)
        if not group:
            continue
        snr = [r.snr_db for r in group]
        se = [r.mean_se for r in group]
        ax.plot(snr, se, marker="o", label=method)
        series[method] = {"snr_db": snr, "mean_se": se}
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Spectral efficiency (bits/s/Hz)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    _save(fig, out_path)
    return series


def plot_ber(curves: CurveSet, out_path, rho: float = 1.0):
    """BER vs SNR on a log axis, one line per method at the given rho.

    Zero BER points cannot sit on a log axis; they are clipped to the
    smallest positive plotted value (or a fixed display floor when the
    whole figure is zero) and marked.  The returned series carry both the
    raw CSV values and the clipped display values.
    """
    rows = curves.subset(rho)
    if not rows:
        raise NoDataError(f"no data at rho={rho} to plot BER")
    positive = [r.mean_ber for r in rows if r.mean_ber > 0.0]
    floor = min(positive) if positive else BER_FLOOR_FALLBACK
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    series = {}
    clipped_any = False
    for method in curves.methods():
        group = curves.group(method, rho)
        if not group:
            continue
        snr = [r.snr_db for r in group]
        ber = [r.mean_ber for r in group]
        display = [b if b > 0.0 else floor for b in ber]
        ax.semilogy(snr, display, marker="o", label=method)
        zero_points = [(s, floor) for s, b in zip(snr, ber) if b == 0.0]
        if zero_points:
            clipped_any = True
            ax.plot(*zip(*zero_points), linestyle="none", marker="v",
                    markersize=9, markerfacecolor="none", color="black")
        series[method] = {"snr_db": snr, "mean_ber": ber, "plotted": display}
    if clipped_any:
        ax.annotate(f"v: zero BER clipped to {floor:g}", xy=(0.02, 0.02),
                    xycoords="axes fraction", fontsize=8)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    _save(fig, out_path)
    return series


def plot_csi(curves: CurveSet, out_path):
    """Spectral efficiency under every CSI quality; rho sets the line style."""
    if not curves.rows:
        raise NoDataError("no data to plot CSI comparison")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    series = {}
    styles = {rho: RHO_STYLES[i % len(RHO_STYLES)]
              for i, rho in enumerate(curves.rhos())}
    for method in curves.methods():
        for rho in curves.rhos():
            group = curves.group(method, rho)
            if not group:
                continue
            snr = [r.snr_db for r in group]
            se = [r.mean_se for r in group]
            label = f"{method} (rho={rho:g})"
            ax.plot(snr, se, styles[rho], marker="o", label=label)
            series[(method, rho)] = {"snr_db": snr, "mean_se": se, "label": label}
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Spectral efficiency (bits/s/Hz)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    _save(fig, out_path)
    return series


def plot_cost(curves: CurveSet, out_path, rho: float = 1.0):
    """Feedback-bits and evaluation-count bars per method.

    Both counters are constant across the SNR sweep, so the value of the
    lowest-SNR row represents the method.
    """
    rows = curves.subset(rho)
    if not rows:
        raise NoDataError(f"no data at rho={rho} to plot costs")
    series = {}
    for method in curves.methods():
        group = curves.group(method, rho)
        if not group:
            continue
        series[method] = {"feedback_bits_paper": group[0].feedback_bits_paper,
                          "eval_count": group[0].eval_count}
    methods = list(series)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    positions = range(len(methods))
    axes[0].bar(positions, [series[m]["feedback_bits_paper"] for m in methods])
    axes[0].set_ylabel("Feedback bits (paper-style)")
    axes[1].bar(positions, [series[m]["eval_count"] for m in methods])
    axes[1].set_ylabel("Gain evaluations per realization")
    for ax in axes:
        ax.set_xticks(list(positions))
        ax.set_xticklabels(methods, rotation=30, ha="right", fontsize=8)
        ax.set_yscale("log")
        ax.grid(True, axis="y", alpha=0.4)
    _save(fig, out_path)
    return series
