"""Static figures of result tables (written to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_table(header, rows, x, ys, path, logx=False, logy=False, title=None):
    """Plot columns ``ys`` of a result table against column ``x``."""
    data = np.array(rows, dtype=float)
    col = {name: i for i, name in enumerate(header)}
    fig, ax = plt.subplots(figsize=(6, 4))
    for y in ys:
        ax.plot(data[:, col[x]], data[:, col[y]], marker="o", ms=3, label=y)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    if len(ys) > 1:
        ax.legend()
    else:
        ax.set_ylabel(ys[0])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
