"""Figure rendering for sweep tables and kernel tabulations.

Imported only when a command is invoked with ``--plot``, so the rest of the
package never touches matplotlib.  The Agg backend keeps rendering headless
and deterministic.
"""

from __future__ import annotations

import math

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def sweep_figure(records, fit, mu, path):
    """ln(mu/T) against 1/lambda with the fitted and predicted slopes."""
    plt = _pyplot()
    x = np.array([1.0 / r.lam for r in records])
    y = np.array([r.ln_ratio for r in records])
    fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=150)
    ax.plot(x, y, "o", ms=5, label="solved")
    xs = np.linspace(x.min(), x.max(), 100)
    ax.plot(xs, fit.intercept + fit.slope * xs, "-",
            label=f"fit: slope {fit.slope:.4f}")
    if math.isfinite(fit.predicted):
        off = y[-1] - fit.predicted * x[-1]
        ax.plot(xs, off + fit.predicted * xs, "--",
                label=f"predicted: {fit.predicted:.4f}")
    ax.set_xlabel(r"$1/\lambda$")
    ax.set_ylabel(r"$\ln(\mu/T)$")
    ax.set_title(f"{fit.target} weak-coupling sweep")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def kernel_figure(header, rows, mu, path):
    """One panel per kernel column: value against p, one line per (q, T)."""
    plt = _pyplot()
    columns = header[3:]
    data = np.array([[v if math.isfinite(v) else np.nan for v in row] for row in rows])
    pairs = sorted({(row[1], row[2]) for row in rows})
    fig, axes = plt.subplots(
        1, len(columns), figsize=(3.2 * len(columns), 3.2), dpi=150, squeeze=False,
    )
    for j, name in enumerate(columns):
        ax = axes[0, j]
        for q, temp in pairs:
            mask = (data[:, 1] == q) & (data[:, 2] == temp)
            ax.plot(data[mask, 0], data[mask, 3 + j], lw=1.0,
                    label=f"q={q:.2g}, T={temp:.2g}")
        ax.set_yscale("log")
        ax.set_xlabel("p")
        ax.set_title(name)
    axes[0, 0].set_ylabel("kernel value")
    axes[0, -1].legend(frameon=False, fontsize=6)
    fig.suptitle(f"kernels at mu={mu:g}", y=1.02)
    fig.tight_layout()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
