"""Moment tables: the lingua franca between evolution engines and metrology.

A table holds every first moment <J^a_i> and every symmetrized second
moment for one time point. Same-site cross-axis entries store the
anticommutator over two, <{A,B}>/2; all other entries are plain products
(operators on distinct sites commute, and diagonal entries need no
symmetrization).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["MomentTable", "AXES", "MissingMomentError"]

AXES = ("x", "y", "z")


class MissingMomentError(KeyError):
    """A moment required by a consumer is absent from the table."""


def _canon(pair_a, pair_b):
    return (pair_a, pair_b) if pair_a <= pair_b else (pair_b, pair_a)


@dataclass
class MomentTable:
    """All first and symmetrized second moments at one time point."""

    t: float
    N: int
    M: int
    first: dict = field(default_factory=dict)
    second: dict = field(default_factory=dict)

    def set_first(self, site: int, axis: str, value: float):
        self.first[(site, axis)] = float(value)

    def get_first(self, site: int, axis: str) -> float:
        try:
            return self.first[(site, axis)]
        except KeyError:
            raise MissingMomentError(f"first moment <J^{axis}_{site}> missing") from None

    def set_second(self, a: tuple, b: tuple, value: float):
        self.second[_canon(a, b)] = float(value)

    def get_second(self, a: tuple, b: tuple) -> float:
        try:
            return self.second[_canon(a, b)]
        except KeyError:
            raise MissingMomentError(
                f"second moment <J^{a[1]}_{a[0]} J^{b[1]}_{b[0]}> missing"
            ) from None

    @classmethod
    def from_site_patterns(cls, t, N, M, first_by_axis, same_site, cross_site):
        """Build a permutation-symmetric table from per-axis patterns.

        ``first_by_axis``: axis -> <J^a> (same for every site).
        ``same_site``: (a, b) -> symmetrized same-site moment, keys with
        a <= b alphabetically.
        ``cross_site``: (a, b) -> <J^a_i J^b_j> for i != j, same key rule.
        """
        table = cls(t=t, N=N, M=M)
        for i in range(1, M + 1):
            for a in AXES:
                table.set_first(i, a, first_by_axis[a])
        for i in range(1, M + 1):
            for a_idx, a in enumerate(AXES):
                for b in AXES[a_idx:]:
                    table.set_second((i, a), (i, b), same_site[(a, b)])
        for i in range(1, M + 1):
            for j in range(i + 1, M + 1):
                for a in AXES:
                    for b in AXES:
                        key = (a, b) if a <= b else (b, a)
                        table.set_second((i, a), (j, b), cross_site[key])
        return table

    def to_covariance(self) -> np.ndarray:
        """Symmetrized 3M x 3M covariance, site-major, axes (x, y, z)."""
        n = 3 * self.M
        gamma = np.empty((n, n))
        for i in range(1, self.M + 1):
            for a_idx, a in enumerate(AXES):
                for j in range(1, self.M + 1):
                    for b_idx, b in enumerate(AXES):
                        row = 3 * (i - 1) + a_idx
                        col = 3 * (j - 1) + b_idx
                        if row > col:
                            continue
                        val = self.get_second((i, a), (j, b)) - self.get_first(
                            i, a
                        ) * self.get_first(j, b)
                        gamma[row, col] = val
                        gamma[col, row] = val
        return gamma
