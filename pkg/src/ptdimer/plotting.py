"""Figure rendering for experiment results (opt-in via ``simulate --plot``)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}

PANELS = (
    ("n_total", r"$\langle n \rangle$"),
    ("purity", r"$P$"),
    ("contrast", r"$\nu$"),
    ("imbalance", r"$I$"),
)

LINESTYLES = {"trajectories": "-", "exact": "--", "meanfield": ":"}


def size(width=6.0, rows=len(PANELS)):
    return (width, 1.6 * rows)


def plot_experiment(path, results, config) -> Path:
    """Stack ``<n>``, purity, contrast and imbalance against time, one line per solver."""
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(len(PANELS), 1, sharex=True, figsize=size())
        for ax, (key, label) in zip(axes, PANELS):
            for solver, series in results.items():
                y = {
                    "n_total": series.n_total,
                    "purity": series.purity(),
                    "contrast": series.contrast(),
                    "imbalance": series.imbalance(),
                }[key]
                ax.plot(series.t, y, LINESTYLES.get(solver, "-"), label=solver)
            ax.set_ylabel(label)
            if key != "n_total":
                ax.set_ylim(-0.02, 1.02)
        axes[-1].set_xlabel(r"$t$ [$1/J$]")
        axes[0].set_title(
            rf"$\gamma={config.gamma_loss:g}$, $g={config.g:g}$, $N_0={config.N0}$, "
            f"initial={config.initial}", fontsize=9,
        )
        if len(results) > 1:
            axes[0].legend(loc="best")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
