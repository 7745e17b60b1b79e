"""CSV input for the panel scripts.

A table is a header list plus one numpy array per column. Values the
writer emits for over- and under-range results ("inf", "nan") parse to
the matching IEEE values; the panels mask them out point by point.
"""

from __future__ import annotations

import csv

import numpy as np

__all__ = ["MissingColumnError", "Table", "read_table"]


class MissingColumnError(Exception):
    """A column the panel needs is absent; .columns names the candidates."""

    def __init__(self, columns, path):
        self.columns = tuple(columns)
        self.path = path
        wanted = " or ".join(f"'{c}'" for c in self.columns)
        super().__init__(f"missing required column {wanted} in {path}")


class Table:
    def __init__(self, path: str, header: list, columns: dict):
        self.path = path
        self.header = header
        self.columns = columns

    def __len__(self):
        return 0 if not self.header else self.columns[self.header[0]].size

    def __contains__(self, name):
        return name in self.columns

    def require(self, *names) -> tuple:
        """Arrays for the named columns; any absent one is an error."""
        for name in names:
            if name not in self.columns:
                raise MissingColumnError([name], self.path)
        return tuple(self.columns[name] for name in names)

    def first(self, *names) -> np.ndarray:
        """The first of several alternative columns that exists."""
        for name in names:
            if name in self.columns:
                return self.columns[name]
        raise MissingColumnError(names, self.path)


def read_table(path: str) -> Table:
    """Parse a CSV file into float columns keyed by header name.

    A file with a header and no data rows is a valid, empty table.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: no header row")
        header = [name.strip() for name in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return Table(path, header, {name: data[:, i] for i, name in enumerate(header)})
