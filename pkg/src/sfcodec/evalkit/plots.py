"""Static SVG renderings of RD curves (byte-stable for identical inputs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .curves import RDCurve

_STYLE = {
    "svg.hashsalt": "sfcodec",
    "figure.figsize": (6.0, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def save_rd_plot(
    curves: dict[str, RDCurve],
    path,
    title: str = "rate-distortion",
    ylabel: str = "proxy AP",
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for name in sorted(curves):
            curve = curves[name]
            ax.plot(curve.bpp, curve.metric, marker="o", label=name)
        ax.set_xlabel("bits per pixel")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
