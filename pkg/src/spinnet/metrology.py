"""Squeezing parameters, covariance/Fisher matrices, entanglement witnesses.

Everything consumes either a MomentTable (for moment-based quantities) or a
density matrix (for the symmetric-logarithmic-derivative Fisher matrix).
Conventions: covariance is the symmetrized second moment minus the product
of means; squeezing parameters are Wineland-style, atom number over squared
polarization times the minimal quadrature variance in the (y, z) plane; the
collective Fisher information for a pure global state is four times the
largest eigenvalue of the summed (collective) 3x3 covariance block.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .moments import MomentTable
from .spin import EnsembleDim, build_spin_ops
from .tolerances import DEFAULT as TOL

__all__ = [
    "CovarianceMatrix",
    "FisherResult",
    "Squeezing",
    "SqueezingResult",
    "WitnessRecord",
    "ZeroPolarizationError",
    "collective_squeezing",
    "covariance",
    "fisher_collective_pure",
    "fisher_local",
    "fisher_matrix",
    "local_squeezing",
    "min_quadrature",
    "squeezing",
    "witness_record",
    "witnesses",
]


class ZeroPolarizationError(ZeroDivisionError):
    """Squeezing is undefined: the state carries no x polarization."""


class Squeezing(NamedTuple):
    xi2: float
    theta: float


@dataclass(frozen=True)
class SqueezingResult:
    xi2_loc: float
    theta_loc: float
    xi2_col: float
    theta_col: float


@dataclass(frozen=True)
class FisherResult:
    f_col: float
    f_loc: Optional[float] = None
    basis: str = "collective (x, y, z)"


@dataclass(frozen=True)
class WitnessRecord:
    tau: float
    xi2_loc: float
    xi2_col: float
    gamma_loc: float
    f_col: float
    c1: float
    c2: float
    f_loc: Optional[float] = None
    c1_tilde: Optional[float] = None
    c2_tilde: Optional[float] = None


def min_quadrature(var_y: float, var_z: float, cov: float):
    """Minimize Var(cos(t) Y - sin(t) Z) over t.

    The variance is m + R cos(2t + d) with R cos(d) = (var_y - var_z)/2
    and R sin(d) = cov, so the minimum m - R sits at t = (pi - d)/2,
    reduced into [-pi/2, pi/2). Returns (var_min, theta, degenerate);
    an isotropic block has no preferred angle and reports theta = 0.
    """
    mean = 0.5 * (var_y + var_z)
    half_diff = 0.5 * (var_y - var_z)
    r = math.hypot(half_diff, cov)
    if r <= 1e-12 * max(mean, 1e-300):
        return mean, 0.0, True
    delta = math.atan2(cov, half_diff)
    theta = 0.5 * (math.pi - delta)
    theta -= math.pi * math.floor(theta / math.pi + 0.5)
    if theta >= 0.5 * math.pi:
        theta -= math.pi
    return mean - r, theta, False


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetrized covariance, site-major rows/columns with axes (x, y, z)."""

    entries: np.ndarray
    M: int

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        if g.shape != (3 * self.M, 3 * self.M):
            raise ValueError(f"expected shape {(3 * self.M,) * 2}, got {g.shape}")
        if not np.array_equal(g, g.T):
            raise ValueError("covariance must be exactly symmetric")
        evals = np.linalg.eigvalsh(g)
        if evals[0] < -TOL.psd * max(1.0, evals[-1]):
            raise ValueError(f"covariance not PSD (min eigenvalue {evals[0]:.3e})")
        object.__setattr__(self, "entries", g)

    def site_block(self, site: int) -> np.ndarray:
        k = 3 * (site - 1)
        return self.entries[k : k + 3, k : k + 3]

    def collective_block(self) -> np.ndarray:
        g = self.entries.reshape(self.M, 3, self.M, 3)
        return g.sum(axis=(0, 2))

    def yz_block(self, site: int) -> np.ndarray:
        return self.site_block(site)[1:, 1:]

    def collective_yz(self) -> np.ndarray:
        return self.collective_block()[1:, 1:]


def covariance(m: MomentTable) -> CovarianceMatrix:
    return CovarianceMatrix(m.to_covariance(), m.M)


def _yz_stats(m: MomentTable, site: int):
    my = m.get_first(site, "y")
    mz = m.get_first(site, "z")
    var_y = m.get_second((site, "y"), (site, "y")) - my * my
    var_z = m.get_second((site, "z"), (site, "z")) - mz * mz
    cov = m.get_second((site, "y"), (site, "z")) - my * mz
    return var_y, var_z, cov


def local_squeezing(m: MomentTable, site: int = 1) -> Squeezing:
    """Wineland parameter of one ensemble: N min-Var(y, z) / <Jx>^2."""
    jx = m.get_first(site, "x")
    if jx == 0.0:
        raise ZeroPolarizationError(f"<Jx_{site}> = 0: state fully dephased")
    var_min, theta, _ = min_quadrature(*_yz_stats(m, site))
    jx2 = float(jx) * float(jx)
    if jx2 == 0.0:  # nonzero polarization whose square underflows: xi2 over-range
        return Squeezing(math.inf, theta)
    return Squeezing(m.N * float(var_min) / jx2, theta)


def collective_squeezing(m: MomentTable) -> Squeezing:
    """Wineland parameter of the summed spin, common quadrature angle.

    Restricted to the uniform weighting of sites and a single angle for
    all of them; a per-site-angle search can do strictly better on
    entangled states but is out of scope here.
    """
    jx_tot = sum(m.get_first(i, "x") for i in range(1, m.M + 1))
    if jx_tot == 0.0:
        raise ZeroPolarizationError("<sum Jx> = 0: state fully dephased")
    yz = covariance(m).collective_yz()
    var_min, theta, _ = min_quadrature(yz[0, 0], yz[1, 1], yz[0, 1])
    jx2 = float(jx_tot) * float(jx_tot)
    if jx2 == 0.0:
        return Squeezing(math.inf, theta)
    return Squeezing(m.N * m.M * float(var_min) / jx2, theta)


def squeezing(m: MomentTable, site: int = 1) -> SqueezingResult:
    loc = local_squeezing(m, site)
    col = collective_squeezing(m)
    return SqueezingResult(loc.xi2, loc.theta, col.xi2, col.theta)


def fisher_collective_pure(g: CovarianceMatrix) -> float:
    """F of the collective spin components for a pure global state.

    Pure-state identity F = 4 Var: applied to the summed 3x3 block, whose
    top eigenvalue picks the best collective generator.
    """
    return 4.0 * float(np.linalg.eigvalsh(g.collective_block())[-1])


def fisher_matrix(
    rho: np.ndarray, ops: Sequence[np.ndarray], eps_p: Optional[float] = None
) -> np.ndarray:
    """Quantum Fisher matrix of a state for a family of Hermitian generators.

    F_mn = 2 sum_{k,l} (p_k - p_l)^2 / (p_k + p_l) A^m_kl A^n_lk in the
    eigenbasis of rho; pairs with p_k + p_l below eps_p are skipped (they
    carry no information and would amplify eigenvalue noise).
    """
    eps = TOL.eps_p if eps_p is None else float(eps_p)
    rho = np.asarray(rho)
    scale = max(1.0, float(np.linalg.norm(rho)))
    if np.linalg.norm(rho - rho.conj().T) > TOL.hermiticity * scale:
        raise ValueError("rho is not Hermitian")
    p, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if p[0] < -TOL.rho_psd:
        raise ValueError(f"rho not PSD (min eigenvalue {p[0]:.3e})")
    if abs(p.sum() - 1.0) > 1e-8:
        raise ValueError("rho trace differs from one")
    p = np.clip(p, 0.0, None)

    s = p[:, None] + p[None, :]
    d = p[:, None] - p[None, :]
    keep = s > eps
    weight = np.where(keep, 2.0 * d * d / np.where(keep, s, 1.0), 0.0)

    mats = []
    for op in ops:
        op = np.asarray(op)
        if np.linalg.norm(op - op.conj().T) > TOL.hermiticity * max(
            1.0, float(np.linalg.norm(op))
        ):
            raise ValueError("generators must be Hermitian")
        mats.append(v.conj().T @ op @ v)

    n = len(mats)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            val = float(np.sum(weight * mats[i] * mats[j].conj()).real)
            out[i, j] = out[j, i] = val
    return out


def fisher_local(rho: np.ndarray) -> float:
    """Best single-ensemble Fisher information over the (x, y, z) family."""
    ops = build_spin_ops(EnsembleDim(rho.shape[0] - 1))
    f = fisher_matrix(rho, [ops.jx, ops.jy, ops.jz])
    return float(np.linalg.eigvalsh(f)[-1])


def witnesses(
    gamma_loc: float,
    f_col: float,
    xi2_col: float,
    N: int,
    M: int,
    f_loc: Optional[float] = None,
    tau: float = float("nan"),
    xi2_loc: float = float("nan"),
) -> WitnessRecord:
    """Entanglement witnesses: values below 1 certify nonseparability.

    c1 = 4 M gamma_loc / f_col compares the best local variance with the
    collective Fisher information; c2 = 4 xi2_col gamma_loc / N compares
    it with collective squeezing. The tilde variants replace 4 gamma_loc
    by the local Fisher information of the reduced state and are never
    weaker.
    """
    if f_col <= 0.0:
        raise ValueError("f_col must be positive")
    if N < 1 or M < 2:
        raise ValueError("need N >= 1 and M >= 2")
    c1 = 4.0 * M * gamma_loc / f_col
    c2 = 4.0 * xi2_col * gamma_loc / N
    c1_tilde = c2_tilde = None
    if f_loc is not None:
        c1_tilde = M * f_loc / f_col
        c2_tilde = xi2_col * f_loc / N
    if c1 > c2 + 1e-9:
        warnings.warn(f"c1 = {c1:.6g} exceeds c2 = {c2:.6g}", RuntimeWarning)
    return WitnessRecord(
        tau=tau,
        xi2_loc=xi2_loc,
        xi2_col=xi2_col,
        gamma_loc=gamma_loc,
        f_col=f_col,
        c1=c1,
        c2=c2,
        f_loc=f_loc,
        c1_tilde=c1_tilde,
        c2_tilde=c2_tilde,
    )


def witness_record(m: MomentTable, f_loc: Optional[float] = None) -> WitnessRecord:
    """Full witness row for one time point of a permutation-symmetric run."""
    g = covariance(m)
    lams = [float(np.linalg.eigvalsh(g.site_block(i))[-1]) for i in range(1, m.M + 1)]
    gamma_loc = lams[0]
    if max(lams) - min(lams) > 1e-6 * max(1.0, abs(gamma_loc)):
        raise ValueError("site blocks differ: table is not permutation symmetric")
    return witnesses(
        gamma_loc,
        fisher_collective_pure(g),
        collective_squeezing(m).xi2,
        m.N,
        m.M,
        f_loc=f_loc,
        tau=m.t,
        xi2_loc=local_squeezing(m, 1).xi2,
    )
