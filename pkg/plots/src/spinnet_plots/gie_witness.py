"""Witness curves C1, C2 against tau for an entangling-protocol run.

Tightened variants are drawn dashed when the CSV carries them. Values
below the unit line (shaded) flag entanglement.
"""

from __future__ import annotations

import sys

from . import panel

PARSER = panel.build_parser(__doc__.splitlines()[0], xscale="log", yscale="linear")


def render(table, args):
    fig, ax = panel.new_axes(args)
    panel.witness_background(ax, args.yscale)
    tau = table.require("tau")[0]
    for name, label, style in (
        ("c1", "$C_1$", "-"),
        ("c2", "$C_2$", "-"),
        ("c1_tilde", r"$\tilde{C}_1$", "--"),
        ("c2_tilde", r"$\tilde{C}_2$", "--"),
    ):
        if name.endswith("_tilde") and name not in table:
            continue
        x, y = panel.finite(tau, table.require(name)[0])
        if x.size:
            ax.plot(x, y, style, label=label)
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("witness")
    panel.witness_ylim(ax, args.yscale)
    return fig, ax


def main(argv=None) -> int:
    return panel.run(PARSER, render, argv)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
