"""Semi-analytic engine for locally prepared states under cross-site dephasing.

Protocol per site: one-axis twisting of the x-polarized coherent state for a
dimensionless time tau_rot, a rotation by theta about x, then network
evolution under chi_nloc * sum_{i<j} Jz_i Jz_j alone. In the Heisenberg
picture each ladder operator only picks up commuting phase factors,

    J+_i(tau) = J+_i  prod_{j != i} exp(i tau Jz_j),

so every network moment factorizes into single-ensemble sums of the form
<psi| O exp(i phi Jz) |psi>. The engine works with the tilted operators
Jt^x = J^x, Jt^y = cos(theta) J^y - sin(theta) J^z, Jt^z = cos(theta) J^z +
sin(theta) J^y: the eigenbasis of Jt^z is built once per (psi, theta) and
reused for the whole tau grid, after which each time point costs O(N) per
moment, independent of the number of sites M.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from .metrology import min_quadrature
from .moments import MomentTable
from .spin import EnsembleDim, LocalState, build_spin_ops, css_x, jz_values, rotate

__all__ = [
    "DensityMatrix",
    "GidEngine",
    "GidSchedule",
    "OptimalAngle",
    "VQuantities",
    "gid_moments",
    "optimal_angle",
    "prepare_local",
    "reduced_state_gid",
    "shared_engine",
    "v_quantities",
]

DensityMatrix = np.ndarray

_AX = ("x", "y", "z")
_DELTAS = {"x": (1, -1), "y": (1, -1), "z": (0,)}


@dataclass(frozen=True)
class GidSchedule:
    """Preparation time, rotation angle, and the post-rotation time grid.

    Exactly one of ``theta`` (absolute rotation about x) or ``beta``
    (offset from theta0 + pi/2, where theta0 aligns the squeezed
    quadrature) is supplied; the other is derived from the prepared state.
    """

    tau_rot: float
    theta: Optional[float] = None
    beta: Optional[float] = None
    tau_grid: Optional[tuple] = None

    def __post_init__(self):
        if not (math.isfinite(self.tau_rot) and self.tau_rot >= 0.0):
            raise ValueError("tau_rot must be finite and non-negative")
        if (self.theta is None) == (self.beta is None):
            raise ValueError("supply exactly one of theta, beta")
        angle = self.theta if self.beta is None else self.beta
        if not math.isfinite(angle):
            raise ValueError("rotation angle must be finite")
        if self.tau_grid is not None:
            grid = tuple(float(t) for t in self.tau_grid)
            if not all(math.isfinite(t) for t in grid):
                raise ValueError("tau_grid entries must be finite")
            object.__setattr__(self, "tau_grid", grid)


@dataclass(frozen=True)
class VQuantities:
    """Characteristic-function data of one prepared ensemble.

    v_z = <exp(i tau Jt^z)>; the r/i dicts hold real and imaginary parts
    of <Jt^a exp(i tau Jt^z)> (az) and <exp(i tau Jt^z) Jt^a> (za).
    """

    v_z: complex
    r_az: dict
    i_az: dict
    r_za: dict
    i_za: dict


class OptimalAngle(NamedTuple):
    theta0: float
    degenerate: bool


def prepare_local(dim: EnsembleDim, tau_rot: float) -> LocalState:
    """One-axis-twisted coherent state exp(-i tau_rot (Jz)^2) |CSS_x>."""
    if not math.isfinite(tau_rot):
        raise ValueError("tau_rot must be finite")
    state = css_x(dim)
    mu = jz_values(dim.N)
    return LocalState(dim.N, np.exp(-1j * tau_rot * mu * mu) * state.amplitudes)


def optimal_angle(state: LocalState) -> OptimalAngle:
    """Angle minimizing Var(cos(t) Jy - sin(t) Jz), in [-pi/2, pi/2).

    An isotropic (y, z) covariance block has no preferred angle: flag it
    and return 0.
    """
    ops = build_spin_ops(EnsembleDim(state.N))
    a = state.amplitudes
    ya = ops.jy @ a
    za = ops.jz @ a
    my = np.vdot(a, ya).real
    mz = np.vdot(a, za).real
    var_y = np.vdot(ya, ya).real - my * my
    var_z = np.vdot(za, za).real - mz * mz
    cov = np.vdot(ya, za).real - my * mz
    _, theta0, degenerate = min_quadrature(var_y, var_z, cov)
    return OptimalAngle(theta0, degenerate)


def _cis(x: float) -> complex:
    return complex(math.cos(x), math.sin(x))


def _band(mat: np.ndarray, delta: int) -> np.ndarray:
    """Single-diagonal coefficients g with g[k] = mat[k - delta, k]."""
    dim = mat.shape[0]
    g = np.zeros(dim, dtype=complex)
    d = np.diag(mat, delta)
    if delta >= 0:
        g[delta:] = d
    else:
        g[: dim + delta] = d
    return g


def _shift(x: np.ndarray, delta: int) -> np.ndarray:
    """out[k] = x[k - delta], zero outside."""
    y = np.zeros_like(x)
    if delta == 0:
        y[:] = x
    elif delta > 0:
        y[delta:] = x[:-delta]
    else:
        y[:delta] = x[-delta:]
    return y


def _band_apply(g: np.ndarray, delta: int, x: np.ndarray) -> np.ndarray:
    """y[k - delta] = g[k] x[k]: apply one ladder band to a vector."""
    y = np.zeros_like(x)
    prod = g * x
    if delta == 0:
        y[:] = prod
    elif delta > 0:
        y[:-delta] = prod[delta:]
    else:
        y[-delta:] = prod[:delta]
    return y


class _TiltedFrame:
    """All tau-independent data for one (psi, theta) pair.

    Holds psi in the eigenbasis of Jt^z together with the ladder bands of
    Jt^x and Jt^y there, plus the Fourier weights that turn every moment
    into a phase sum over the N+1 eigenvalues.
    """

    def __init__(self, N: int, amplitudes: np.ndarray, theta: float):
        ops = build_spin_ops(EnsembleDim(N))
        ct, st = math.cos(theta), math.sin(theta)
        tilted_z = ct * ops.jz + st * ops.jy
        tilted_y = ct * ops.jy - st * ops.jz
        w, vecs = np.linalg.eigh(tilted_z)
        order = np.argsort(-w)
        w = w[order]
        vecs = vecs[:, order]
        exact = jz_values(N)
        if np.max(np.abs(w - exact)) > 1e-8 * max(1.0, N):
            raise FloatingPointError("tilted-z spectrum drifted off half-integers")
        self.w = exact
        self.psi = vecs.conj().T @ amplitudes
        self.p = np.abs(self.psi) ** 2

        tx = vecs.conj().T @ ops.jx @ vecs
        ty = vecs.conj().T @ tilted_y @ vecs
        for m in (tx, ty):
            resid = m - np.diag(np.diag(m, 1), 1) - np.diag(np.diag(m, -1), -1)
            if np.linalg.norm(resid) > 1e-9 * max(1.0, np.linalg.norm(m)):
                raise FloatingPointError("tilted ladder operators not tridiagonal")
        self.bands = {
            "x": {1: _band(tx, 1), -1: _band(tx, -1)},
            "y": {1: _band(ty, 1), -1: _band(ty, -1)},
            "z": {0: exact.astype(complex)},
        }

        # Fourier weights: A^(a)_d(phi) = sum_k u[(a,d)][k] e^{i phi w_k},
        # with the phase-on-the-left variant B = e^{i phi d} A.
        self.u = {}
        for a, bands in self.bands.items():
            for d, g in bands.items():
                self.u[(a, d)] = np.conj(_shift(self.psi, d)) * g * self.psi
        self.q1 = {a: {d: self.u[(a, d)].sum() for d in self.bands[a]} for a in _AX}

        q2 = {}
        for a in _AX:
            for b in _AX:
                acc = {}
                for d2, g2 in self.bands[b].items():
                    v2 = _band_apply(g2, d2, self.psi)
                    for d1, g1 in self.bands[a].items():
                        val = np.vdot(self.psi, _band_apply(g1, d1, v2))
                        acc[d1 + d2] = acc.get(d1 + d2, 0j) + val
                q2[(a, b)] = acc
        self.q2sym = {}
        for i, a in enumerate(_AX):
            for b in _AX[i:]:
                keys = set(q2[(a, b)]) | set(q2[(b, a)])
                self.q2sym[(a, b)] = {
                    d: 0.5 * (q2[(a, b)].get(d, 0j) + q2[(b, a)].get(d, 0j))
                    for d in keys
                }

    def v_of(self, phi: float) -> complex:
        return complex(np.sum(self.p * np.exp(1j * phi * self.w)))

    def v_quantities(self, tau: float) -> VQuantities:
        ep = np.exp(1j * tau * self.w)
        v_z = complex(np.sum(self.p * ep))
        r_az, i_az, r_za, i_za = {}, {}, {}, {}
        for a in _AX:
            vaz = 0j
            vza = 0j
            for d in self.bands[a]:
                term = complex(np.sum(self.u[(a, d)] * ep))
                vaz += term
                vza += term * _cis(tau * d)
            r_az[a], i_az[a] = vaz.real, vaz.imag
            r_za[a], i_za[a] = vza.real, vza.imag
        return VQuantities(v_z=v_z, r_az=r_az, i_az=i_az, r_za=r_za, i_za=i_za)

    def moment_table(self, tau: float, M: int) -> MomentTable:
        ep = np.exp(1j * tau * self.w)
        v1 = complex(np.sum(self.p * ep))
        v2 = complex(np.sum(self.p * ep * ep))
        v = {0: 1.0 + 0j, 1: v1, -1: v1.conjugate(), 2: v2, -2: v2.conjugate()}
        pow_m1 = {d: v[d] ** (M - 1) for d in v}
        pow_m2 = {d: (v[d] ** (M - 2) if M > 2 else 1.0 + 0j) for d in v}

        first = {}
        for a in _AX:
            first[a] = sum(self.q1[a][d] * pow_m1[d] for d in self.q1[a]).real
        same = {}
        for key, comps in self.q2sym.items():
            same[key] = sum(val * pow_m1[d] for d, val in comps.items()).real

        phase_at = {1: ep, -1: ep.conj()}

        def a_sum(axis, d, arg_mult):
            # A^(axis)_d evaluated at phi = arg_mult * tau
            if arg_mult == 0:
                return self.q1[axis][d]
            return complex(np.sum(self.u[(axis, d)] * phase_at[arg_mult]))

        cross = {}
        for i, a in enumerate(_AX):
            for b in _AX[i:]:
                tot = 0j
                for di in _DELTAS[a]:
                    for dj in _DELTAS[b]:
                        av = a_sum(a, di, dj)
                        bv = a_sum(b, dj, di) * _cis(tau * di * dj)
                        tot += av * bv * pow_m2[di + dj]
                cross[(a, b)] = tot.real

        return MomentTable.from_site_patterns(
            t=tau,
            N=self.w.size - 1,
            M=M,
            first_by_axis=first,
            same_site=same,
            cross_site=cross,
        )

    def purity(self, tau: float, M: int) -> float:
        """Tr(rho_A^2) for the one-site reduced state at time tau."""
        dim = self.w.size
        ac = np.correlate(self.p, self.p, "full")[dim - 1 :]
        phase = np.exp(1j * tau * self.w)
        cur = self.p.astype(complex)
        out = ac[0]
        for lag in range(1, dim):
            cur = cur * phase
            out += 2.0 * ac[lag] * abs(np.sum(cur)) ** (2 * (M - 1))
        return float(out)


class GidEngine:
    """Shared precomputation for one (dim, M, schedule) across a tau grid."""

    def __init__(self, dim: EnsembleDim, M: int, schedule: GidSchedule):
        if M < 2:
            raise ValueError("need at least two sites")
        self.dim = dim
        self.M = int(M)
        self.schedule = schedule
        psi = prepare_local(dim, schedule.tau_rot)
        ang = optimal_angle(psi)
        self.theta0 = ang.theta0
        self.degenerate_angle = ang.degenerate
        if schedule.theta is not None:
            self.theta = float(schedule.theta)
            self.beta = self.theta - self.theta0 - 0.5 * math.pi
        else:
            self.beta = float(schedule.beta)
            self.theta = self.beta + self.theta0 + 0.5 * math.pi
        self._psi_rot = rotate(psi, "x", self.theta).amplitudes
        self._frame = _TiltedFrame(dim.N, psi.amplitudes, self.theta)

    def moments(self, tau: float) -> MomentTable:
        return self._frame.moment_table(float(tau), self.M)

    def v_quantities(self, tau: float) -> VQuantities:
        return self._frame.v_quantities(float(tau))

    def purity(self, tau: float) -> float:
        return self._frame.purity(float(tau), self.M)

    def reduced_state(self, tau: float) -> DensityMatrix:
        """rho_A[k, l] = a_k a_l* V(tau (k - l)) for the two-site network."""
        if self.M != 2:
            raise ValueError("reduced-state construction is two-site only")
        a = self._psi_rot
        dim = self.dim.dim
        p = np.abs(a) ** 2
        mu = jz_values(self.dim.N)
        phase = np.exp(1j * float(tau) * mu)
        cur = p.astype(complex)
        vband = np.empty(dim, dtype=complex)
        vband[0] = 1.0
        for d in range(1, dim):
            cur = cur * phase
            vband[d] = np.sum(cur)
        return np.outer(a, a.conj()) * scipy.linalg.toeplitz(vband, vband.conj())


_ENGINE_CACHE = OrderedDict()
_ENGINE_CACHE_MAX = 8


def shared_engine(dim: EnsembleDim, M: int, schedule: GidSchedule) -> GidEngine:
    key = (dim.N, M, schedule.tau_rot, schedule.theta, schedule.beta)
    eng = _ENGINE_CACHE.get(key)
    if eng is None:
        eng = GidEngine(dim, M, schedule)
        _ENGINE_CACHE[key] = eng
        while len(_ENGINE_CACHE) > _ENGINE_CACHE_MAX:
            _ENGINE_CACHE.popitem(last=False)
    else:
        _ENGINE_CACHE.move_to_end(key)
    return eng


_FRAME_CACHE = OrderedDict()
_FRAME_CACHE_MAX = 4


def v_quantities(psi: LocalState, theta: float, tau: float) -> VQuantities:
    key = (psi.N, float(theta), psi.amplitudes.tobytes())
    frame = _FRAME_CACHE.get(key)
    if frame is None:
        frame = _TiltedFrame(psi.N, psi.amplitudes, float(theta))
        _FRAME_CACHE[key] = frame
        while len(_FRAME_CACHE) > _FRAME_CACHE_MAX:
            _FRAME_CACHE.popitem(last=False)
    else:
        _FRAME_CACHE.move_to_end(key)
    return frame.v_quantities(float(tau))


def gid_moments(dim: EnsembleDim, M: int, schedule: GidSchedule, tau: float) -> MomentTable:
    return shared_engine(dim, M, schedule).moments(tau)


def reduced_state_gid(dim: EnsembleDim, schedule: GidSchedule, tau: float) -> DensityMatrix:
    return shared_engine(dim, 2, schedule).reduced_state(tau)
