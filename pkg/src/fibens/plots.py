"""Figure rendering for the report path.

One figure per experiment: noisy training points, the true function, and
the fitted curve of every method, saved as a PNG next to the CSV output.
matplotlib is imported lazily so CSV-only runs never pay for it.
"""

from __future__ import annotations

import math

from .experiments import CurveTable

_METHOD_COLORS = {
    "uniform": "tab:blue",
    "fibonacci": "tab:orange",
    "orthogonal_rb": "tab:green",
    "flow": "tab:red",
}

_FALLBACK_COLORS = ("tab:purple", "tab:brown", "tab:pink", "tab:olive", "tab:cyan")


def _figsize(width_in: float = 6.4) -> tuple[float, float]:
    golden_mean = (math.sqrt(5.0) - 1.0) / 2.0
    return (width_in, width_in * golden_mean)


def render_curves(table: CurveTable, title: str, path: str) -> None:
    """Render one experiment's curve table to a PNG file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=_figsize())
    ax.scatter(
        table.train_xs,
        table.train_ys,
        s=8,
        color="0.6",
        alpha=0.5,
        label="training data",
    )
    ax.plot(table.x, table.f_true, "k--", linewidth=1.2, label="true function")
    fallback = iter(_FALLBACK_COLORS)
    for name, fit in table.fits.items():
        color = _METHOD_COLORS.get(name) or next(fallback, None)
        ax.plot(table.x, fit, linewidth=1.4, label=name, color=color)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    ax.legend(fontsize=8, framealpha=0.9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
