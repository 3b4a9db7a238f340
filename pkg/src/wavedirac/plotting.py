"""PNG figures for the time series written by the runner.

Uses the non-interactive Agg backend; figures are written next to the CSV
they are drawn from.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}


def plot_columns(
    columns: Mapping[str, Sequence[float]],
    path: str | Path,
    title: str = "",
    logy: bool = False,
) -> Path:
    """Plot every column against the first one and save as PNG.

    Non-positive values are dropped from a log-scaled axis by matplotlib.
    """
    names = list(columns)
    if len(names) < 2:
        raise ValueError("need an abscissa and at least one series")
    x = columns[names[0]]
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name in names[1:]:
            ax.plot(x, columns[name], label=name, lw=1.4)
        ax.set_xlabel(names[0])
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        ax.legend()
        # fixed metadata keeps repeated runs byte-stable
        fig.savefig(path, format="png", metadata={"Software": None})
        plt.close(fig)
    return path
