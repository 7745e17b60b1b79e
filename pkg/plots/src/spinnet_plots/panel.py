"""Shared scaffolding for the panel scripts: args, styling, error policy."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import MissingColumnError, read_table

__all__ = [
    "build_parser",
    "finite",
    "new_axes",
    "run",
    "save",
    "witness_background",
    "witness_ylim",
]

FIGSIZE = (5.4, 3.6)
DPI = 150
SHADE = "0.88"


def build_parser(description: str, xscale: str, yscale: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--input", required=True, help="CSV file to read")
    p.add_argument("--output", required=True, help="image file to write")
    p.add_argument("--xscale", choices=("linear", "log"), default=xscale)
    p.add_argument("--yscale", choices=("linear", "log"), default=yscale)
    p.add_argument("--title", default=None)
    return p


def new_axes(args):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.set_xscale(args.xscale)
    ax.set_yscale(args.yscale)
    if args.title:
        ax.set_title(args.title)
    return fig, ax


def finite(x: np.ndarray, y: np.ndarray):
    """Drop points where either coordinate is not a finite number."""
    mask = np.isfinite(x) & np.isfinite(y)
    return x[mask], y[mask]


def witness_background(ax, yscale: str):
    """Unit line plus the shaded region where a witness flags entanglement."""
    bottom = 1e-6 if yscale == "log" else 0.0
    ax.axhspan(bottom, 1.0, facecolor=SHADE, zorder=0)
    ax.axhline(1.0, color="0.3", linewidth=0.8, zorder=1)


def witness_ylim(ax, yscale: str):
    """Witness values blow up once anti-squeezing dominates (1e100 and
    beyond); a fixed linear window around the unit line keeps the part
    that means something readable. Curves leave through the top."""
    if yscale == "linear":
        ax.set_ylim(0.0, 2.05)


def save(fig, ax, path: str):
    ax.grid(True, alpha=0.25)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def run(parser, render, argv) -> int:
    """Parse args, read the table, render, write. Shared by every main()."""
    args = parser.parse_args(argv)
    try:
        table = read_table(args.input)
        fig, ax = render(table, args)
    except (MissingColumnError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    save(fig, ax, args.output)
    return 0
