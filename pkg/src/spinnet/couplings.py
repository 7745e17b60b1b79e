"""Microscopic coupling constants for dipolar double-well ensembles.

Pipeline: solve the 1D axial eigenproblem of a double well, build the
left/right localized modes with analytic Gaussian transverse profiles,
evaluate contact and dipole-dipole integrals over the resulting densities,
and combine them into the twisting rates chi_cont, chi_loc, chi_nloc (plus
the linear chi_Nz terms).  Closed-form gravitational couplings for the
clock-qudit and mass-superposition scenarios live here too.

All quantities SI.  Dipoles are polarized along z; the double-well axis
is x.  Dipolar integrals are computed in momentum space, where the
interaction kernel is k_z^2/k^2 - 1/3 (zero at k = 0, its angular
average); a direct real-space quadrature is provided as an independent,
slower cross-check.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eig_banded

from .constants import C_LIGHT, G_NEWTON, HBAR
from .tolerances import DEFAULT as TOL

__all__ = [
    "GridRefinementError",
    "GaussianBarrier",
    "DoubleWellSpec",
    "AxialMode",
    "ModePair",
    "CouplingResult",
    "gaussian_mode",
    "solve_double_well",
    "contact_integral",
    "dipolar_integral",
    "dipolar_integral_real_space",
    "couplings_dw",
    "contact_strength",
    "cgb_coupling",
    "bmv_couplings",
]

# density values below this fraction of the peak count as zero when
# estimating supports and spectral cutoffs
_SUPPORT_CUT = 1e-13
_SPECTRUM_CUT = 1e-14


class GridRefinementError(RuntimeError):
    """Axial eigenvalues still drift under 2x grid refinement."""


@dataclass(frozen=True)
class GaussianBarrier:
    """Barrier V(x) = height * exp(-x^2 / (2 width^2)) between the wells."""

    height: float  # J
    width: float  # m

    def __post_init__(self):
        if self.height < 0.0 or self.width <= 0.0:
            raise ValueError("barrier needs height >= 0 and width > 0")

    def __call__(self, x):
        return self.height * np.exp(-0.5 * (np.asarray(x) / self.width) ** 2)


@dataclass(frozen=True)
class DoubleWellSpec:
    """Trap geometry: harmonic trap plus a barrier along the x axis."""

    mass: float  # kg
    omega_x: float  # rad/s
    omega_y: float
    omega_z: float
    barrier: Callable[[np.ndarray], np.ndarray]
    grid: Tuple[float, float, int] = None  # (x_min, x_max, n_points)

    def __post_init__(self):
        if self.mass <= 0.0 or min(self.omega_x, self.omega_y, self.omega_z) <= 0.0:
            raise ValueError("mass and trap frequencies must be positive")
        if self.grid is None:
            # span generously past the classical turning points of the
            # harmonic envelope
            sx = math.sqrt(HBAR / (self.mass * self.omega_x))
            object.__setattr__(self, "grid", (-10.0 * sx, 10.0 * sx, 1025))
        x_min, x_max, n = self.grid
        if not (x_min < x_max):
            raise ValueError("grid must satisfy x_min < x_max")
        if n < 256:
            raise ValueError("grid needs at least 256 points")

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.mass * self.omega_x**2 * x**2 + np.asarray(self.barrier(x), dtype=float)


@dataclass(frozen=True)
class AxialMode:
    """One localized well mode: gridded axial profile, Gaussian transverse.

    psi is real with int psi^2 dx = 1; the full 3D density is
    psi(x)^2 * exp(-y^2/sigma_y^2 - z^2/sigma_z^2) / (pi sigma_y sigma_z).
    """

    x: np.ndarray
    psi: np.ndarray
    sigma_y: float
    sigma_z: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        if x.ndim != 1 or x.shape != psi.shape or x.size < 8:
            raise ValueError("x and psi must be matching 1D arrays")
        steps = np.diff(x)
        if not np.all(steps > 0) or abs(steps.max() / steps.min() - 1.0) > 1e-8:
            raise ValueError("grid must be uniform and increasing")
        if min(self.sigma_y, self.sigma_z) <= 0.0:
            raise ValueError("transverse widths must be positive")
        norm = np.sum(psi**2) * steps[0]
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"mode not normalized: int psi^2 dx = {norm!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "psi", psi)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def density(self) -> np.ndarray:
        return self.psi**2

    def support_radius(self) -> float:
        """Largest |x| at which the axial density is non-negligible."""
        n = self.density()
        idx = np.nonzero(n > _SUPPORT_CUT * n.max())[0]
        return float(np.abs(self.x[idx]).max())


def gaussian_mode(sigma_x, sigma_y, sigma_z, center=0.0, n_points=1537, half_span=9.0):
    """Discretized Gaussian mode, density variance sigma_x^2 / 2 per axis."""
    x = np.linspace(center - half_span * sigma_x, center + half_span * sigma_x, n_points)
    psi = np.exp(-((x - center) ** 2) / (2.0 * sigma_x**2)) / (math.pi * sigma_x**2) ** 0.25
    psi /= math.sqrt(np.sum(psi**2) * (x[1] - x[0]))
    return AxialMode(x=x, psi=psi, sigma_y=float(sigma_y), sigma_z=float(sigma_z))


@dataclass(frozen=True)
class ModePair:
    """Left/right well modes from the two lowest axial eigenstates."""

    x: np.ndarray
    psi_l: np.ndarray
    psi_r: np.ndarray
    sigma_y: float
    sigma_z: float
    e_gs: float  # J
    e_ex: float  # J

    def __post_init__(self):
        dx = self.x[1] - self.x[0]
        for psi in (self.psi_l, self.psi_r):
            if abs(np.sum(psi**2) * dx - 1.0) > 1e-8:
                raise ValueError("well modes must be normalized")
        overlap = abs(np.sum(self.psi_l * self.psi_r) * dx)
        if overlap > TOL.mode_overlap:
            raise ValueError(f"left/right modes overlap: <L|R> = {overlap:.2e}")

    @property
    def splitting(self) -> float:
        """Tunneling splitting E_ex - E_gs (J)."""
        return self.e_ex - self.e_gs

    @property
    def left(self) -> AxialMode:
        return AxialMode(self.x, self.psi_l, self.sigma_y, self.sigma_z)

    @property
    def right(self) -> AxialMode:
        return AxialMode(self.x, self.psi_r, self.sigma_y, self.sigma_z)


def _two_lowest(spec: DoubleWellSpec, n: int):
    """Two lowest eigenpairs of the axial Hamiltonian, 5-point stencil."""
    x_min, x_max, _ = spec.grid
    x = np.linspace(x_min, x_max, n)
    dx = x[1] - x[0]
    t = HBAR**2 / (2.0 * spec.mass * dx**2)
    bands = np.zeros((3, n))
    bands[0] = spec.potential(x) + t * (30.0 / 12.0)
    bands[1, : n - 1] = -t * (16.0 / 12.0)
    bands[2, : n - 2] = t * (1.0 / 12.0)
    vals, vecs = eig_banded(bands, lower=True, select="i", select_range=(0, 1))
    vecs = vecs / math.sqrt(dx)
    return x, dx, vals, vecs


def solve_double_well(spec: DoubleWellSpec) -> ModePair:
    """Left/right modes and energies of the two lowest axial states.

    Raises GridRefinementError when doubling the grid still moves the
    eigenvalues, and ValueError when the grid fails to contain the
    classically allowed region of the excited state.
    """
    x_min, x_max, n = spec.grid
    x, dx, vals, vecs = _two_lowest(spec, n)
    e_gs, e_ex = float(vals[0]), float(vals[1])

    edge_v = spec.potential(np.array([x_min, x_max]))
    if not np.all(edge_v > e_ex):
        raise ValueError("grid too narrow: endpoints are classically allowed")

    _, _, vals2, _ = _two_lowest(spec, 2 * n - 1)
    scale = max(abs(vals2[0]), abs(vals2[1]), HBAR * spec.omega_x)
    drift = float(np.max(np.abs(vals - vals2))) / scale
    if drift > TOL.grid_refinement:
        raise GridRefinementError(
            f"eigenvalue drift {drift:.2e} under 2x refinement; increase n_points"
        )

    gs, ex = vecs[:, 0].copy(), vecs[:, 1].copy()
    if gs.sum() < 0:
        gs = -gs
    # orient the excited state so (gs + ex)/sqrt(2) sits in the left well
    psi_l = (gs + ex) / math.sqrt(2.0)
    if np.sum(x * psi_l**2) > 0:
        ex = -ex
        psi_l = (gs + ex) / math.sqrt(2.0)
    psi_r = (gs - ex) / math.sqrt(2.0)

    return ModePair(
        x=x,
        psi_l=psi_l,
        psi_r=psi_r,
        sigma_y=math.sqrt(HBAR / (spec.mass * spec.omega_y)),
        sigma_z=math.sqrt(HBAR / (spec.mass * spec.omega_z)),
        e_gs=e_gs,
        e_ex=e_ex,
    )


def contact_integral(modes) -> float:
    """I = int |psi|^4 d^3r (m^-3); transverse Gaussians done analytically."""
    mode = modes.left if isinstance(modes, ModePair) else modes
    axial = float(np.sum(mode.psi**4) * mode.dx)
    return axial / (2.0 * math.pi * mode.sigma_y * mode.sigma_z)


def _axial_spectrum(mode: AxialMode, k_max: float) -> CubicSpline:
    """Continuous FT of the axial density on [-k_max, k_max], splined."""
    n_dens = mode.density()
    dx = mode.dx
    # fine enough FFT grid that the spline error is negligible
    n_fft = 1 << max(14, int(math.ceil(math.log2(2.0 * math.pi * 6000.0 / (k_max * dx)))))
    spec = np.fft.rfft(n_dens, n_fft) * dx
    k_pos = 2.0 * math.pi * np.fft.rfftfreq(n_fft, d=dx)
    m = int(np.searchsorted(k_pos, k_max * 1.02)) + 2
    m = min(m, k_pos.size - 1)
    spec = spec[:m] * np.exp(-1j * k_pos[:m] * mode.x[0])
    k_full = np.concatenate([-k_pos[m - 1 : 0 : -1], k_pos[:m]])
    s_full = np.concatenate([np.conj(spec[m - 1 : 0 : -1]), spec[:m]])
    return CubicSpline(k_full, s_full)


def _cutoff(mode_a: AxialMode, mode_b: AxialMode) -> float:
    """Radial momentum cutoff where every density spectrum has decayed."""
    k_cap = 0.98 * math.pi / max(mode_a.dx, mode_b.dx)
    k_probe = np.linspace(0.0, k_cap, 1025)
    env = np.ones_like(k_probe)
    for mode in (mode_a, mode_b):
        ft = np.exp(-1j * np.outer(k_probe, mode.x)) @ mode.density() * mode.dx
        env *= np.abs(ft)
    tail_max = np.maximum.accumulate(env[::-1])[::-1]
    idx = np.nonzero(tail_max < _SPECTRUM_CUT)[0]
    k_x = k_probe[idx[0]] if idx.size else k_cap
    # transverse decay is an exact Gaussian
    k_t = 0.0
    for pair in ((mode_a.sigma_y, mode_b.sigma_y), (mode_a.sigma_z, mode_b.sigma_z)):
        k_t = max(k_t, math.sqrt(4.0 * math.log(1.0 / _SPECTRUM_CUT) / (pair[0] ** 2 + pair[1] ** 2)))
    return min(max(k_x, k_t) * 1.02, k_cap)


def dipolar_integral(mode_a, mode_b, displacement=(0.0, 0.0, 0.0), node_scale=1.0) -> float:
    """D_ab = int n_a(r) U_dd(r - r') n_b(r' - Delta) dr dr'  (m^-3).

    U_dd = (1 - 3 cos^2 Theta) / (4 pi |r-r'|^3) with Theta measured from
    the z axis.  Evaluated in momentum space on a spherical Gauss-Legendre
    grid; the Legendre rule in cos(theta) integrates the kernel's angular
    profile exactly, so isotropic densities give a machine-level zero.
    """
    delta = np.zeros(3) if displacement is None else np.asarray(displacement, dtype=float) * 1.0
    if delta.shape != (3,):
        raise ValueError("displacement must be a 3-vector")

    k_max = _cutoff(mode_a, mode_b)
    spl_a = _axial_spectrum(mode_a, k_max)
    spl_b = _axial_spectrum(mode_b, k_max)

    # phase bandwidths set the node counts: displacement plus density extent
    b_x = abs(delta[0]) + mode_a.support_radius() + mode_b.support_radius()
    b_y = abs(delta[1]) + 5.7 * (mode_a.sigma_y + mode_b.sigma_y)
    b_z = abs(delta[2]) + 5.7 * (mode_a.sigma_z + mode_b.sigma_z)
    b_norm = math.sqrt(b_x**2 + b_y**2 + b_z**2)
    n_rad = int((72 + 0.45 * k_max * b_norm) * node_scale)
    n_pol = int((48 + 0.45 * k_max * b_norm) * node_scale)
    n_azi = 2 * int((32 + 0.33 * k_max * math.hypot(b_x, b_y)) * node_scale)

    nodes, weights = np.polynomial.legendre.leggauss(n_rad)
    kappa = 0.5 * k_max * (nodes + 1.0)
    w_kappa = 0.5 * k_max * weights * kappa**2
    u, w_u = np.polynomial.legendre.leggauss(n_pol)
    su = np.sqrt(1.0 - u**2)
    phi = 2.0 * math.pi * np.arange(n_azi) / n_azi
    w_phi = 2.0 * math.pi / n_azi

    q_y = 0.25 * (mode_a.sigma_y**2 + mode_b.sigma_y**2)
    q_z = 0.25 * (mode_a.sigma_z**2 + mode_b.sigma_z**2)
    kern_u = (u**2 - 1.0 / 3.0) * w_u

    total = 0.0
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    chunk = max(1, int(6e5 / (n_pol * n_azi)))
    for lo in range(0, n_rad, chunk):
        kc = kappa[lo : lo + chunk, None, None]
        kx = kc * su[None, :, None] * cos_phi[None, None, :]
        ky = kc * su[None, :, None] * sin_phi[None, None, :]
        kz = kc * u[None, :, None]
        f = np.conj(spl_a(kx)) * spl_b(kx)
        f *= np.exp(-q_y * ky**2 - q_z * kz**2 - 1j * (kx * delta[0] + ky * delta[1] + kz * delta[2]))
        f = f.real * kern_u[None, :, None]
        total += float(np.sum(w_kappa[lo : lo + chunk] @ f.sum(axis=2)))
    return total * w_phi / (2.0 * math.pi) ** 3


def dipolar_integral_real_space(mode_a, mode_b, displacement=(0.0, 0.0, 0.0), node_scale=1.0) -> float:
    """Same integral as dipolar_integral, by direct real-space quadrature.

    The density cross-correlation C(s) factorizes (gridded x, Gaussian
    transverse); D = int C(s) U_dd(s) d^3 s is then a 3D spherical
    quadrature.  The angular average of the kernel kills the 1/s^3
    singularity at the origin.  Slow; used to validate the momentum path.
    """
    delta = np.asarray(displacement, dtype=float) * 1.0
    if delta.shape != (3,):
        raise ValueError("displacement must be a 3-vector")

    # axial correlation on mode_a's spacing
    dx = mode_a.dx
    xb = np.arange(mode_b.x[0], mode_b.x[-1] + 0.5 * dx, dx)
    nb = CubicSpline(mode_b.x, mode_b.density())(xb)
    na = mode_a.density()
    corr = np.correlate(na, nb, mode="full") * dx
    m_idx = np.arange(-(nb.size - 1), na.size)
    s_grid = (mode_a.x[0] - xb[0] - delta[0]) + m_idx * dx
    c_x = CubicSpline(s_grid, corr)
    s_lo, s_hi = s_grid[0], s_grid[-1]

    v_y = 0.5 * (mode_a.sigma_y**2 + mode_b.sigma_y**2)
    v_z = 0.5 * (mode_a.sigma_z**2 + mode_b.sigma_z**2)

    r_max = math.sqrt(
        max(abs(s_lo), abs(s_hi)) ** 2
        + (abs(delta[1]) + 8.0 * math.sqrt(v_y)) ** 2
        + (abs(delta[2]) + 8.0 * math.sqrt(v_z)) ** 2
    )
    n_rad = int(260 * node_scale)
    n_pol = int(110 * node_scale)
    n_azi = int(128 * node_scale)

    nodes, weights = np.polynomial.legendre.leggauss(n_rad)
    r = 0.5 * r_max * (nodes + 1.0)
    w_r = 0.5 * r_max * weights / r  # r^2 / (r^3) leaves 1/r
    u, w_u = np.polynomial.legendre.leggauss(n_pol)
    su = np.sqrt(1.0 - u**2)
    phi = 2.0 * math.pi * np.arange(n_azi) / n_azi
    w_phi = 2.0 * math.pi / n_azi
    kern_u = (1.0 - 3.0 * u**2) * w_u

    total = 0.0
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    chunk = max(1, int(6e5 / (n_pol * n_azi)))
    for lo in range(0, n_rad, chunk):
        rc = r[lo : lo + chunk, None, None]
        sx = rc * su[None, :, None] * cos_phi[None, None, :]
        sy = rc * su[None, :, None] * sin_phi[None, None, :]
        sz = rc * u[None, :, None]
        f = np.where((sx > s_lo) & (sx < s_hi), c_x(np.clip(sx, s_lo, s_hi)), 0.0)
        f = f * np.exp(-((sy + delta[1]) ** 2) / (2.0 * v_y) - ((sz + delta[2]) ** 2) / (2.0 * v_z))
        f = f * kern_u[None, :, None]
        total += float(np.sum(w_r[lo : lo + chunk] @ f.sum(axis=2)))
    norm = 2.0 * math.pi * math.sqrt(v_y * v_z)
    return total * w_phi / (4.0 * math.pi * norm)


@dataclass(frozen=True)
class CouplingResult:
    """Twisting rates (rad/s) and the integrals they came from (m^-3)."""

    chi_cont: float
    chi_loc: float
    chi_nloc: float
    chi_nz_ab: float
    chi_nz_ba: float
    i_contact: float
    d_self: float
    d_lr: float
    d_lalb: float
    d_rarb: float
    d_ralb: float
    d_larb: float


def couplings_dw(pair_a: ModePair, separation, g: float, c_dd: float,
                 pair_b: Optional[ModePair] = None) -> CouplingResult:
    """All coupling rates for two double wells separated by `separation`.

    `separation` is the 3-vector from site A to site B (a bare float means
    a shift along x).  `g` is the contact strength (J m^3) and `c_dd` the
    dipolar strength mu_0 mu^2 (J m^3).
    """
    pb = pair_a if pair_b is None else pair_b
    if np.ndim(separation) == 0:
        delta = np.array([float(separation), 0.0, 0.0])
    else:
        delta = np.asarray(separation, dtype=float)

    if c_dd == 0.0:
        # no dipoles: skip the quadrature, every D-weighted rate is zero
        d_self = d_lr = d_lalb = d_rarb = d_ralb = d_larb = 0.0
    else:
        la, ra = pair_a.left, pair_a.right
        lb, rb = pb.left, pb.right
        d_self = dipolar_integral(la, la)
        d_lr = dipolar_integral(la, ra)
        d_lalb = dipolar_integral(la, lb, delta)
        d_rarb = dipolar_integral(ra, rb, delta)
        d_ralb = dipolar_integral(ra, lb, delta)
        d_larb = dipolar_integral(la, rb, delta)

        flipped = dipolar_integral(lb, ra, -delta)
        scale = max(abs(d_ralb), abs(d_self), 1e-300)
        if abs(flipped - d_ralb) > 1e-8 * scale:
            raise FloatingPointError("dipolar integral broke D_ab(d) = D_ba(-d)")

    i_val = contact_integral(pair_a)
    return CouplingResult(
        chi_cont=g * i_val / HBAR,
        chi_loc=c_dd * (d_self - d_lr) / HBAR,
        chi_nloc=c_dd * (d_lalb + d_rarb - d_ralb - d_larb) / HBAR,
        chi_nz_ab=0.5 * c_dd * (d_lalb - d_rarb + d_ralb - d_larb) / HBAR,
        chi_nz_ba=0.5 * c_dd * (d_lalb - d_rarb - d_ralb + d_larb) / HBAR,
        i_contact=i_val,
        d_self=d_self,
        d_lr=d_lr,
        d_lalb=d_lalb,
        d_rarb=d_rarb,
        d_ralb=d_ralb,
        d_larb=d_larb,
    )


def contact_strength(scattering_length: float, mass: float) -> float:
    """g = 4 pi hbar^2 a / m (J m^3)."""
    return 4.0 * math.pi * HBAR**2 * scattering_length / mass


def cgb_coupling(delta_e: float, d: float) -> float:
    """Clock-qudit gravitational rate G dE^2 / (d c^4 hbar), rad/s."""
    if d <= 0.0:
        raise ValueError("separation must be positive")
    return G_NEWTON * delta_e**2 / (d * C_LIGHT**4 * HBAR)


def bmv_couplings(m_atom: float, d: float, d_prime: float, self_energy: float = 0.0):
    """Interferometric mass-superposition rates (rad/s).

    d is the closest approach of the two interferometers, d_prime the
    interarm spacing.  Returns (chi_loc, chi_nloc, chi_nz); the cloud
    self-energy term of chi_loc, if wanted, is passed in joules.
    """
    if d <= 0.0 or d_prime <= 0.0:
        raise ValueError("both distances must be positive")
    gm2 = G_NEWTON * m_atom**2
    chi_loc = (gm2 / d_prime - self_energy) / HBAR
    chi_nloc = -gm2 * 2.0 * d_prime**2 / (d * (d + d_prime) * (d + 2.0 * d_prime)) / HBAR
    chi_nz = -gm2 * d_prime / (d * (d + 2.0 * d_prime)) / HBAR
    return chi_loc, chi_nloc, chi_nz
