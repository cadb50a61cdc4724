"""Figure rendering for the CLI's figure subcommand.

Kept separate so the library and the data-only CLI paths never import
matplotlib.  Uses the Agg backend; output is a PNG next to the CSV.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _column(rows, idx):
    return np.array([np.nan if row[idx] is None else float(row[idx])
                     for row in rows])


def render_dynamics(config, rows, path):
    t = _column(rows, 0)
    pop = _column(rows, 3)
    sigma = _column(rows, 5)
    gamma = _column(rows, 6)
    shift = _column(rows, 7)

    fig, axes = plt.subplots(2, 2, figsize=(9, 6), constrained_layout=True)
    axes[0, 0].plot(t, pop, color="tab:blue")
    axes[0, 0].set_ylabel("excited population / trace distance")
    axes[0, 1].plot(t, sigma, color="tab:red")
    axes[0, 1].axhline(0.0, color="0.7", lw=0.8)
    axes[0, 1].set_ylabel("distinguishability flow")
    axes[1, 0].plot(t, gamma, color="tab:green")
    axes[1, 0].axhline(0.0, color="0.7", lw=0.8)
    axes[1, 0].set_ylabel("decoherence rate")
    axes[1, 1].plot(t, shift, color="tab:purple")
    axes[1, 1].set_ylabel("frequency shift")
    for ax in axes.flat:
        ax.set_xlabel("t")
    fig.suptitle(f"dynamics at coupling={config.coupling:g}, eta={config.eta:g}, "
                 f"omega_c={config.omega_c:g}, s={config.s:g}")
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(config, per_series, path, series_param=None):
    fig, (ax_n, ax_r) = plt.subplots(1, 2, figsize=(9, 4), constrained_layout=True)
    for value, rows in per_series.items():
        x = _column(rows, 0)
        n = _column(rows, 1)
        ratio = _column(rows, 2)
        label = None if series_param is None else f"{series_param}={value:g}"
        ax_n.plot(x, n, label=label)
        ax_r.plot(x, ratio, label=label)
    ax_n.set_xlabel(config.sweep.param)
    ax_n.set_ylabel("information backflow")
    ax_r.set_xlabel(config.sweep.param)
    ax_r.set_ylabel("speed-limit ratio")
    ax_r.set_ylim(-0.05, 1.1)
    if series_param is not None:
        ax_n.legend()
        ax_r.legend()
    fig.suptitle(f"sweep at eta={config.eta:g}, omega_c={config.omega_c:g}, "
                 f"s={config.s:g}, horizon {config.tau:g}")
    fig.savefig(path, dpi=150)
    plt.close(fig)
