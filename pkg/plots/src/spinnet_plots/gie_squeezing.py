"""Local and collective squeezing parameters against tau.

The dotted line marks xi^2 = 1; only the collective curve is expected
to dip below it for the entangling protocol.
"""

from __future__ import annotations

import sys

from . import panel

PARSER = panel.build_parser(__doc__.splitlines()[0], xscale="log", yscale="log")


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
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\xi^2$")
    return fig, ax


def main(argv=None) -> int:
    return panel.run(PARSER, render, argv)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
