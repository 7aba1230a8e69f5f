"""Plots rendered next to the delimited evaluation output.

Each function takes a report produced by :mod:`subtherm.evaluate` and
writes a single PNG.  The Agg backend is forced so rendering works in
headless environments (CI, containers).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import EvalReport


def plot_precision_vs_window(report: EvalReport, path: str) -> None:
    """Precision against refinement window, one curve per (gamma, tau)."""
    windows = sorted({c.window for c in report.cells})
    gammas = sorted({c.gamma for c in report.cells})
    taus = sorted({t for c in report.cells for t in c.tau_rates},
                  key=float, reverse=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for gamma in gammas:
        for tau in taus:
            rates = [report.cell(w, gamma).tau_rates[tau] for w in windows]
            label = f"tau={tau}" + (f", gamma={gamma:g}" if len(gammas) > 1
                                    else "")
            ax.plot(windows, rates, marker="o", label=label)
    ax.set_xlabel("refinement window (px)")
    ax.set_ylabel("precision")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_rmsd_vs_window(report: EvalReport, path: str) -> None:
    """Median per-shift RMSD against refinement window, per gamma."""
    windows = sorted({c.window for c in report.cells})
    gammas = sorted({c.gamma for c in report.cells})
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for gamma in gammas:
        med = [report.cell(w, gamma).rmsd_median for w in windows]
        ax.plot(windows, med, marker="s",
                label=f"gamma={gamma:g}" if len(gammas) > 1 else "median")
    ax.set_xlabel("refinement window (px)")
    ax.set_ylabel("median RMSD (px)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_brightness_sweep(report: dict, path: str) -> None:
    """Feature counts and re-detection rate across brightness offsets."""
    betas = [e["beta"] for e in report["entries"]]
    counts = [e["n_features"] for e in report["entries"]]
    rates = [e["redetection_rate"] for e in report["entries"]]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(betas, counts, marker="o", color="tab:blue", label="features")
    ax.axhline(report["n_baseline"], color="tab:blue", ls="--", alpha=0.5,
               label="baseline count")
    ax.set_xlabel("brightness offset beta")
    ax.set_ylabel("feature count", color="tab:blue")
    twin = ax.twinx()
    twin.plot(betas, rates, marker="s", color="tab:red",
              label="re-detection")
    twin.set_ylabel("re-detection rate", color="tab:red")
    twin.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    fig.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
