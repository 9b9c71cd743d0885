"""Render report figures from the plot-data the CLI writes.

Every function takes plain arrays and an output path; the figure is saved and
closed, nothing is shown.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "figure.figsize": (7.0, 3.0),
}


def _save(fig, path):
    fig.tight_layout()
    # fixed metadata keeps PNG bytes reproducible
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def esscher_figure(h, psi_h, rates, h_star, path):
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        ax1.plot(h, psi_h, color="tab:blue")
        ax1.set_xlabel("h")
        ax1.set_ylabel(r"$\Psi_h(1)$")
        ax2.plot(rates, h_star, color="tab:red")
        ax2.set_xlabel("r")
        ax2.set_ylabel(r"$h^*$")
        _save(fig, path)


def density_figure(curves, path, ylabel):
    """``curves`` maps tau to ``(x, under_h_star, under_h_star_plus_one)``."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(curves), sharey=True, squeeze=False)
        for ax, (tau, (x, a, b)) in zip(axes[0], sorted(curves.items())):
            ax.plot(x, a, label=r"$h^*$")
            ax.plot(x, b, "--", label=r"$h^*+1$")
            ax.set_title(f"tau = {tau:.4g} years")
            ax.set_xlabel("log return")
        axes[0][0].set_ylabel(ylabel)
        axes[0][0].legend()
        _save(fig, path)


def payoff_figure(x, exact, reconstructions, k, path):
    """``reconstructions`` maps q to the reconstructed payoff on ``x``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ax.plot(np.exp(x), exact, "k", lw=1.5, label="payoff")
        for q, values in sorted(reconstructions.items()):
            ax.plot(np.exp(x), values, lw=0.8, label=f"q = {q:.4g}")
        ax.set_xlabel("X")
        ax.set_title(f"k = {k:g}")
        ax.legend()
        _save(fig, path)


def qcalib_figure(k, q_opt, er_min, path):
    with plt.rc_context(STYLE):
        fig, ax1 = plt.subplots(figsize=(4.5, 3.0))
        ax1.plot(k, er_min, "o-", color="tab:blue", ms=3)
        ax1.set_xlabel("k")
        ax1.set_ylabel("minimum ER", color="tab:blue")
        ax2 = ax1.twinx()
        ax2.plot(k, q_opt, "s-", color="tab:red", ms=3)
        ax2.set_ylabel("optimal q", color="tab:red")
        ax2.grid(False)
        _save(fig, path)


def surface_figure(k, tau, error, path):
    """``error`` has shape ``(len(k), len(tau))``."""
    kk, tt = np.meshgrid(k, tau, indexing="ij")
    with plt.rc_context(STYLE):
        fig = plt.figure()
        ax1 = fig.add_subplot(1, 2, 1, projection="3d")
        ax1.plot_surface(tt, kk, error, cmap="viridis")
        ax1.set_xlabel("tau")
        ax1.set_ylabel("k")
        ax2 = fig.add_subplot(1, 2, 2)
        mesh = ax2.pcolormesh(tau, k, error, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax2, label="GTS - BS")
        ax2.set_xlabel("tau")
        ax2.set_ylabel("k")
        _save(fig, path)


def trajectory_figure(log_ml, grad_norm, path):
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        it = np.arange(len(log_ml))
        ax1.plot(it, log_ml, "o-", ms=3)
        ax1.set_xlabel("iteration")
        ax1.set_ylabel("log ML")
        ax2.semilogy(it, np.maximum(grad_norm, 1e-16), "o-", ms=3)
        ax2.set_xlabel("iteration")
        ax2.set_ylabel("|gradient|")
        _save(fig, path)
