"""Figure rendering for the CLI report paths (Agg backend, files only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_lyap_figure(ts, columns, labels, path):
    """Plot selected entries of P(t) against time and save to path."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for col, label in zip(columns, labels):
        ax.plot(ts, col, lw=1.2, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("P(t) entries")
    if len(labels) <= 12:
        ax.legend(fontsize=8, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_figure(params, err_p, err_h2, slopes, xlabel, path):
    """Log-log error curves with their fitted slopes in the legend."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    params = np.asarray(params, dtype=float)
    ax.loglog(params, err_p, "o-", label=f"Lyapunov matrix error (slope {slopes[0]:.2f})")
    ax.loglog(params, err_h2, "s-", label=f"H2 error (slope {slopes[1]:.2f})")
    for slope, anchor in ((-2.0, err_p[0]), (-3.0, err_h2[0])):
        guide = anchor * (params / params[0]) ** slope
        ax.loglog(params, guide, "k--", lw=0.8, alpha=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("normalized error")
    ax.legend(fontsize=9)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
