"""Brute-force exact simulation in the full (N+1)^M tensor basis.

This is the normative engine: it implements the diagonal network
Hamiltonian directly on the full state vector, with no approximation
beyond double precision. The closed-form and semi-analytic engines are
validated against it, and where a transcribed formula and this oracle
disagree, the oracle wins (see FORMULA_ERRATA.md).

Index convention: amplitudes are stored row-major over the subsystem
index with site 1 slowest, i.e. amplitude[(mu_1, mu_2, ..., mu_M)] after
reshaping to shape (N+1,) * M, each axis ordered by descending mu.
Public site indices are 1-based to match that site-major language.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from spinnet.spin import LocalState, jz_values
from spinnet.tolerances import DEFAULT as TOL

__all__ = [
    "Couplings",
    "GlobalState",
    "SizeCapError",
    "product_state",
    "evolve_diagonal",
    "apply_local",
    "expect",
    "reduce",
    "oracle_table",
    "AMPLITUDE_CAP",
]

AMPLITUDE_CAP = 10**6


class SizeCapError(ValueError):
    """Raised when (N+1)^M exceeds the configured amplitude cap."""


@dataclass(frozen=True)
class Couplings:
    """Hamiltonian coefficients, in rad/s unless ``dimensionless`` is set.

    When ``dimensionless`` is true, times are interpreted as the rescaled
    tau of the protocols and the chi values are pure numbers (the GIE
    figures use chi_nloc = 1, chi_cont + chi_loc = 0, t = tau).
    """

    chi_cont: float = 0.0
    chi_loc: float = 0.0
    chi_nloc: float = 0.0
    dimensionless: bool = False

    def __post_init__(self):
        for name in ("chi_cont", "chi_loc", "chi_nloc"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def local(self) -> float:
        """Net local one-axis-twisting rate chi_cont + chi_loc."""
        return self.chi_cont + self.chi_loc


@dataclass(frozen=True)
class GlobalState:
    """Full network state: (N+1)^M complex amplitudes."""

    N: int
    M: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        size = (self.N + 1) ** self.M
        if size > AMPLITUDE_CAP:
            raise SizeCapError(
                f"(N+1)^M = {size} exceeds the oracle cap of {AMPLITUDE_CAP} amplitudes"
            )
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (size,):
            raise ValueError(f"amplitude vector has shape {amps.shape}, expected ({size},)")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.N + 1

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to (N+1,) * M, site 1 on axis 0."""
        return self.amplitudes.reshape((self.dim,) * self.M)


def product_state(locals_: list[LocalState]) -> GlobalState:
    """Tensor product of per-site local states (site 1 first)."""
    if not locals_:
        raise ValueError("need at least one local state")
    N = locals_[0].N
    if any(st.N != N for st in locals_):
        raise ValueError("all sites must have the same N")
    amps = locals_[0].amplitudes
    for st in locals_[1:]:
        amps = np.kron(amps, st.amplitudes)
    return GlobalState(N=N, M=len(locals_), amplitudes=amps)


def _mu_grids(N: int, M: int):
    """sum_i mu_i and sum_i mu_i^2 over the full tensor grid."""
    mu = jz_values(N)
    total = np.zeros((N + 1,) * M)
    total_sq = np.zeros((N + 1,) * M)
    for site in range(M):
        shape = [1] * M
        shape[site] = N + 1
        total = total + mu.reshape(shape)
        total_sq = total_sq + (mu**2).reshape(shape)
    return total, total_sq


def evolve_diagonal(state: GlobalState, c: Couplings, t: float) -> GlobalState:
    """Evolve under H = (chi_cont+chi_loc) sum_i (Jz_i)^2
    + chi_nloc sum_{i<j} Jz_i Jz_j for time t.

    H is diagonal in the product Jz basis, so each amplitude just picks up
    exp(-i t E(mu_1..mu_M)). Norm is preserved exactly.
    """
    total, total_sq = _mu_grids(state.N, state.M)
    pair_sum = (total**2 - total_sq) / 2.0  # sum_{i<j} mu_i mu_j
    energy = c.local * total_sq + c.chi_nloc * pair_sum
    phases = np.exp(-1j * t * energy).ravel()
    return GlobalState(N=state.N, M=state.M, amplitudes=phases * state.amplitudes)


def apply_local(state: GlobalState, site: int, gate: np.ndarray) -> GlobalState:
    """Apply an (N+1)x(N+1) unitary to one tensor factor (1-based site)."""
    d = state.dim
    if not 1 <= site <= state.M:
        raise ValueError(f"site {site} out of range 1..{state.M}")
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (d, d):
        raise ValueError(f"gate has shape {gate.shape}, expected ({d}, {d})")
    if np.max(np.abs(gate.conj().T @ gate - np.eye(d))) > TOL.unitarity:
        raise ValueError("gate is not unitary to tolerance")
    psi = state.tensor()
    psi = np.moveaxis(np.tensordot(gate, psi, axes=([1], [site - 1])), 0, site - 1)
    return GlobalState(N=state.N, M=state.M, amplitudes=np.ascontiguousarray(psi).ravel())


def _apply_operator(psi: np.ndarray, site_axis: tuple[int, str], ops) -> np.ndarray:
    site, axis = site_axis
    mat = ops.axis(axis)
    return np.moveaxis(np.tensordot(mat, psi, axes=([1], [site - 1])), 0, site - 1)


def expect(state: GlobalState, ops_list: list[tuple[int, str]]) -> complex:
    """<state| prod_k J^{a_k}_{i_k} |state> (operators applied right to left).

    ``ops_list`` holds (site, axis) pairs, 1-based sites, axis in x/y/z.
    """
    from spinnet.spin import EnsembleDim, build_spin_ops

    ops = build_spin_ops(EnsembleDim(state.N))
    psi = state.tensor()
    ket = psi
    for site, axis in reversed(ops_list):
        if not 1 <= site <= state.M:
            raise ValueError(f"site {site} out of range 1..{state.M}")
        ket = _apply_operator(ket, (site, axis), ops)
    return complex(np.vdot(psi, ket))


def reduce(state: GlobalState, keep: int) -> np.ndarray:
    """Reduced density matrix of one site (1-based), tracing out the rest."""
    if not 1 <= keep <= state.M:
        raise ValueError(f"site {keep} out of range 1..{state.M}")
    d = state.dim
    psi = np.moveaxis(state.tensor(), keep - 1, 0).reshape(d, -1)
    rho = psi @ psi.conj().T
    # exact Hermitian symmetrization kills rounding dust
    return (rho + rho.conj().T) / 2.0


def oracle_table(state: GlobalState, t: float = 0.0):
    """Full moment table straight from the dense state, any state."""
    from spinnet.moments import AXES, MomentTable

    N, M = state.N, state.M
    table = MomentTable(t=t, N=N, M=M)
    for i in range(1, M + 1):
        for a in AXES:
            table.set_first(i, a, expect(state, [(i, a)]).real)
    for i in range(1, M + 1):
        for a_idx, a in enumerate(AXES):
            for b in AXES[a_idx:]:
                ab = expect(state, [(i, a), (i, b)])
                ba = expect(state, [(i, b), (i, a)])
                table.set_second((i, a), (i, b), 0.5 * (ab + ba).real)
        for j in range(i + 1, M + 1):
            for a in AXES:
                for b in AXES:
                    table.set_second((i, a), (j, b), expect(state, [(i, a), (j, b)]).real)
    return table
