"""Witness curves C1, C2 over the composite dephasing-run time axis.

Same conventions as the entangling witness panel, plus the --tau-rot
boundary marker and the beta stamp shared with the squeezing panel.
"""

from __future__ import annotations

import sys

from . import panel
from .gid_squeezing import mark_rotation, stamp_beta

PARSER = panel.build_parser(__doc__.splitlines()[0], xscale="log", yscale="linear")
PARSER.add_argument(
    "--tau-rot", type=float, default=None, help="mark the rotation time"
)


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
    mark_rotation(ax, args.tau_rot)
    stamp_beta(ax, table)
    ax.set_xlabel(r"$\tau$ (composite)")
    ax.set_ylabel("witness")
    panel.witness_ylim(ax, args.yscale)
    return fig, ax


def main(argv=None) -> int:
    return panel.run(PARSER, render, argv)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
