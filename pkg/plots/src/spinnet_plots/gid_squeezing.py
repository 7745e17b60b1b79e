"""Squeezing parameters over the composite dephasing-run time axis.

The axis is local preparation time up to the rotation, nonlocal time
after it; --tau-rot draws a marker at the boundary. The run's beta is
read from the CSV and stamped on the panel. Log x drops the tau = 0
point, which is the price of seeing both segments at once.
"""

from __future__ import annotations

import sys

from . import panel

PARSER = panel.build_parser(__doc__.splitlines()[0], xscale="log", yscale="log")
PARSER.add_argument(
    "--tau-rot", type=float, default=None, help="mark the rotation time"
)


def stamp_beta(ax, table):
    if "beta" in table and len(table):
        beta = table.columns["beta"][0]
        ax.annotate(
            rf"$\beta = {beta:.4g}$",
            xy=(0.02, 0.96),
            xycoords="axes fraction",
            va="top",
            fontsize=9,
        )


def mark_rotation(ax, tau_rot):
    if tau_rot is not None:
        ax.axvline(tau_rot, color="0.5", linewidth=0.8, linestyle="--")


def render(table, args):
    fig, ax = panel.new_axes(args)
    tau = table.require("tau")[0]
    for name, label in (
        ("xi2_loc", r"$\xi^2_{\mathrm{loc}}$"),
        ("xi2_col", r"$\xi^2_{\mathrm{col}}$"),
    ):
        x, y = panel.finite(tau, table.require(name)[0])
        if x.size:
            ax.plot(x, y, label=label)
    ax.axhline(1.0, color="0.3", linewidth=0.8, linestyle=":")
    mark_rotation(ax, args.tau_rot)
    stamp_beta(ax, table)
    ax.set_xlabel(r"$\tau$ (composite)")
    ax.set_ylabel(r"$\xi^2$")
    return fig, ax


def main(argv=None) -> int:
    return panel.run(PARSER, render, argv)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
