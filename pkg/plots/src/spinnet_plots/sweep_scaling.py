"""Log-log scaling of a sweep's derived time against ensemble size.

Reads the sweep aggregate CSV, takes tau_deph (dephasing sweeps) or
tau_min_c2 (entangling sweeps) as the y column, refits the power law
from the plotted points, and annotates the slope. The fit here is
deliberately recomputed rather than read from the aggregate's
fit_exponent column, so the annotation always matches the dots shown.
"""

from __future__ import annotations

import sys

import numpy as np

from . import panel

PARSER = panel.build_parser(__doc__.splitlines()[0], xscale="log", yscale="log")


def fit_loglog(n: np.ndarray, y: np.ndarray):
    """Least-squares slope and intercept of log y against log n."""
    slope, intercept = np.polyfit(np.log(n), np.log(y), 1)
    return float(slope), float(intercept)


def render(table, args):
    fig, ax = panel.new_axes(args)
    n = table.require("N")[0]
    y = table.first("tau_deph", "tau_min_c2")
    label = "tau_deph" if "tau_deph" in table else "tau_min_c2"
    n, y = panel.finite(n, y)
    keep = (n > 0) & (y > 0)
    n, y = n[keep], y[keep]
    ax.plot(n, y, "o", label=label)
    if n.size >= 2:
        slope, intercept = fit_loglog(n, y)
        grid = np.geomspace(n.min(), n.max(), 64)
        ax.plot(grid, np.exp(intercept) * grid**slope, "-", linewidth=1.0,
                label=rf"fit $\propto N^{{{slope:.3f}}}$")
        ax.annotate(
            f"slope = {slope:.3f}",
            xy=(0.04, 0.08),
            xycoords="axes fraction",
            fontsize=10,
        )
    ax.set_xlabel("N")
    ax.set_ylabel(label)
    return fig, ax


def main(argv=None) -> int:
    return panel.run(PARSER, render, argv)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
