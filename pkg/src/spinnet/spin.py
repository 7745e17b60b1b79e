"""Collective pseudo-spin algebra shared by every engine.

Conventions, fixed once and used everywhere:

* An ensemble of N two-mode bosons is a spin of length S = N/2 living in
  the (N+1)-dimensional symmetric (Dicke) space.
* The Jz eigenbasis is ordered by DESCENDING eigenvalue: index 0 holds
  mu = +N/2, index N holds mu = -N/2. ``jz_values`` returns that ordering.
* ``rotate(state, axis, angle)`` applies exp(-i * angle * J^axis).

All operations are pure; states and operator sets are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "EnsembleDim",
    "SpinOps",
    "LocalState",
    "build_spin_ops",
    "css_x",
    "rotate",
    "jz_values",
    "expect_local",
]


@dataclass(frozen=True)
class EnsembleDim:
    """Size record for one ensemble: N atoms, dim = N+1, S = N/2."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"need at least one atom per ensemble, got N={self.N}")

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def S(self) -> float:
        return self.N / 2.0


@dataclass(frozen=True)
class SpinOps:
    """Dense spin matrices in the descending-mu Jz eigenbasis."""

    N: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    def axis(self, name: str) -> np.ndarray:
        try:
            return {"x": self.jx, "y": self.jy, "z": self.jz}[name]
        except KeyError:
            raise ValueError(f"axis must be one of x, y, z, got {name!r}") from None


@dataclass(frozen=True)
class LocalState:
    """State of a single ensemble: complex amplitudes in the Jz basis."""

    N: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.N + 1,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({self.N + 1},)"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.N + 1


def jz_values(N: int) -> np.ndarray:
    """Jz eigenvalues in basis order: N/2, N/2-1, ..., -N/2."""
    return (N / 2.0) - np.arange(N + 1)


@lru_cache(maxsize=None)
def _spin_matrices(N: int):
    mu = jz_values(N)
    S = N / 2.0
    # J+ |mu> = sqrt(S(S+1) - mu(mu+1)) |mu+1>; |mu+1> sits one index lower
    up = np.sqrt(S * (S + 1) - mu[1:] * (mu[1:] + 1))
    jp = np.zeros((N + 1, N + 1), dtype=np.complex128)
    jp[np.arange(N), np.arange(1, N + 1)] = up
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    jz = np.diag(mu).astype(np.complex128)
    for m in (jx, jy, jz):
        m.flags.writeable = False
    return jx, jy, jz


def build_spin_ops(dim: EnsembleDim) -> SpinOps:
    """Construct Jx, Jy, Jz for an ensemble of ``dim.N`` atoms.

    The matrices satisfy [Jx, Jy] = i Jz (and cyclic) and
    Jx^2 + Jy^2 + Jz^2 = S(S+1) * 1 with S = N/2.
    """
    jx, jy, jz = _spin_matrices(dim.N)
    return SpinOps(N=dim.N, jx=jx, jy=jy, jz=jz)


@lru_cache(maxsize=None)
def _css_x_amplitudes(N: int) -> np.ndarray:
    # amplitude on mu = k - N/2 is sqrt(C(N,k)) / 2^(N/2); exact big-int
    # ratios keep the norm at machine precision for any N
    from math import comb

    denom = 1 << N
    amps = np.array([np.sqrt(comb(N, k) / denom) for k in range(N + 1)])
    amps = amps.astype(np.complex128)
    amps.flags.writeable = False
    return amps


def css_x(dim: EnsembleDim) -> LocalState:
    """Coherent spin state polarized along +x (all atoms in (|a>+|b>)/sqrt2).

    In the Jz basis the amplitudes are sqrt(binomial(N,k))/2^(N/2) with
    k = mu + N/2, all phases zero. <Jx> = N/2, Var(Jy) = Var(Jz) = N/4.
    """
    return LocalState(N=dim.N, amplitudes=_css_x_amplitudes(dim.N))


@lru_cache(maxsize=None)
def _axis_eigensystem(N: int, axis: str):
    """Eigendecomposition of J^axis, cached per (N, axis)."""
    ops = _spin_matrices(N)
    mat = {"x": ops[0], "y": ops[1], "z": ops[2]}[axis]
    w, v = np.linalg.eigh(mat)
    w.flags.writeable = False
    v.flags.writeable = False
    return w, v


def rotate(state: LocalState, axis: str, angle: float) -> LocalState:
    """Apply exp(-i * angle * J^axis) to a local state.

    Rotations are computed from the exact eigenstructure of the spin
    matrix (diagonalized once per (N, axis) and cached), not from a series
    expansion, so unitarity holds to machine precision.
    """
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if axis == "z":
        # Jz is diagonal in this basis: pure phase application
        phases = np.exp(-1j * angle * jz_values(state.N))
        return LocalState(N=state.N, amplitudes=phases * state.amplitudes)
    w, v = _axis_eigensystem(state.N, axis)
    amps = v @ (np.exp(-1j * angle * w) * (v.conj().T @ state.amplitudes))
    return LocalState(N=state.N, amplitudes=amps)


def expect_local(state: LocalState, op: np.ndarray) -> complex:
    """<state| op |state> for a single-ensemble operator."""
    return complex(np.vdot(state.amplitudes, op @ state.amplitudes))
