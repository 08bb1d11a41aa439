"""SVG line plots rendered from the delimited series the reports write.

Every figure is generated from a CSV that already exists next to it, so
plots never contain data absent from the machine-readable outputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reporting import read_series_csv

_STYLE = {
    "figure.figsize": (5.0, 3.2),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "lines.linewidth": 1.2,
    "lines.markersize": 3.5,
}


def plot_series_csv(
    csv_path,
    out_svg=None,
    x_column: str | None = None,
    title: str = "",
    logy: bool = False,
    logx: bool = False,
) -> Path:
    """Render every numeric column of a series CSV against the x column."""
    csv_path = Path(csv_path)
    data = read_series_csv(csv_path)
    columns = list(data.keys())
    x_column = x_column or columns[0]
    ys = [c for c in columns if c != x_column]
    out_svg = Path(out_svg) if out_svg else csv_path.with_suffix(".svg")
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for name in ys:
            ax.plot(data[x_column], data[name], marker="o", label=name)
        ax.set_xlabel(x_column)
        if logy:
            ax.set_yscale("log")
        if logx:
            ax.set_xscale("log")
        if title:
            ax.set_title(title)
        if len(ys) > 1:
            ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(out_svg, format="svg")
        plt.close(fig)
    return out_svg
