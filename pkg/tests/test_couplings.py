import math

import numpy as np
import pytest

from spinnet.constants import C_LIGHT, G_NEWTON, HBAR, M_K39
from spinnet.couplings import (
    AxialMode,
    CouplingResult,
    DoubleWellSpec,
    GaussianBarrier,
    GridRefinementError,
    ModePair,
    bmv_couplings,
    cgb_coupling,
    contact_integral,
    contact_strength,
    couplings_dw,
    dipolar_integral,
    dipolar_integral_real_space,
    gaussian_mode,
    solve_double_well,
)

from oracles import mc_dipolar_gaussian

MASS = M_K39
W_X = 2 * math.pi * 100.0
S_X = math.sqrt(HBAR / (MASS * W_X))


def well_spec(height_hw, width_sx=0.8, span_sx=10.0, n=1025, wy=1.5, wz=2.0):
    return DoubleWellSpec(
        mass=MASS,
        omega_x=W_X,
        omega_y=wy * W_X,
        omega_z=wz * W_X,
        barrier=GaussianBarrier(height_hw * HBAR * W_X, width_sx * S_X),
        grid=(-span_sx * S_X, span_sx * S_X, n),
    )


@pytest.fixture(scope="module")
def harmonic_pair():
    return solve_double_well(well_spec(0.0))


@pytest.fixture(scope="module")
def dw_pair():
    return solve_double_well(well_spec(8.0))


class TestDoubleWell:
    def test_harmonic_limit(self, harmonic_pair):
        assert abs(harmonic_pair.splitting / (HBAR * W_X) - 1.0) < 1e-6
        assert abs(harmonic_pair.e_gs / (HBAR * W_X) - 0.5) < 1e-6

    def test_mirror_symmetry(self, dw_pair):
        dev = np.max(np.abs(dw_pair.psi_l - dw_pair.psi_r[::-1]))
        assert dev / np.max(np.abs(dw_pair.psi_l)) < 1e-8

    def test_modes_localized(self, dw_pair):
        dx = dw_pair.x[1] - dw_pair.x[0]
        assert np.sum(dw_pair.x * dw_pair.psi_l**2) * dx < -S_X
        assert np.sum(dw_pair.x * dw_pair.psi_r**2) * dx > S_X

    def test_modes_orthonormal(self, dw_pair):
        dx = dw_pair.x[1] - dw_pair.x[0]
        assert abs(np.sum(dw_pair.psi_l**2) * dx - 1.0) < 1e-10
        assert abs(np.sum(dw_pair.psi_l * dw_pair.psi_r) * dx) < 1e-10

    def test_splitting_shrinks_with_barrier(self):
        heights = [0.0, 4.0, 8.0, 16.0]
        gaps = [solve_double_well(well_spec(h, n=769)).splitting for h in heights]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-4 * gaps[0]

    def test_coarse_grid_raises(self):
        with pytest.raises(GridRefinementError):
            solve_double_well(well_spec(8.0, n=256, span_sx=12.0))

    def test_narrow_grid_raises(self):
        with pytest.raises(ValueError, match="classically allowed"):
            solve_double_well(well_spec(0.0, span_sx=1.5))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            well_spec(8.0, n=128)
        with pytest.raises(ValueError):
            DoubleWellSpec(-1.0, W_X, W_X, W_X, GaussianBarrier(0.0, 1.0))
        with pytest.raises(ValueError):
            GaussianBarrier(-1.0, 1.0)
        # default grid is auto-built and valid
        spec = DoubleWellSpec(MASS, W_X, W_X, W_X, GaussianBarrier(0.0, S_X))
        assert spec.grid[2] >= 256


class TestContactIntegral:
    def test_pure_gaussian(self):
        mode = gaussian_mode(0.7e-6, 0.5e-6, 0.9e-6)
        want = 1.0 / ((2 * math.pi) ** 1.5 * 0.7e-6 * 0.5e-6 * 0.9e-6)
        assert abs(contact_integral(mode) / want - 1.0) < 1e-10

    def test_doubling_widths_scales_by_eighth(self):
        a = contact_integral(gaussian_mode(0.7e-6, 0.5e-6, 0.9e-6))
        b = contact_integral(gaussian_mode(1.4e-6, 1.0e-6, 1.8e-6))
        assert abs(b / a - 0.125) < 1e-10

    def test_harmonic_limit_analytic(self, harmonic_pair):
        # with no barrier psi_L is (gs + ex)/sqrt(2), whose quartic integral
        # carries an exact 19/16 on top of the bare Gaussian value
        want = (19.0 / 16.0) / (
            (2 * math.pi) ** 1.5 * S_X * harmonic_pair.sigma_y * harmonic_pair.sigma_z
        )
        assert abs(contact_integral(harmonic_pair) / want - 1.0) < 1e-6


class TestDipolarIntegral:
    def test_spherical_gaussian_vanishes(self):
        iso = gaussian_mode(0.3, 0.3, 0.3)
        leading = abs(dipolar_integral(gaussian_mode(0.1, 0.1, 0.1),
                                       gaussian_mode(0.1, 0.1, 0.1), (0.0, 0.0, 1.0)))
        assert abs(dipolar_integral(iso, iso)) < 1e-6 * leading

    def test_point_dipole_limit(self):
        # the kernel is harmonic away from the origin, so for isotropic
        # Gaussian clouds the integral equals the point value up to
        # exponentially small finite-size terms
        g = gaussian_mode(0.1, 0.1, 0.1)
        d_z = dipolar_integral(g, g, (0.0, 0.0, 1.0))
        d_x = dipolar_integral(g, g, (1.0, 0.0, 0.0))
        assert abs(d_z + 2.0 / (4 * math.pi)) < 1e-9
        assert abs(d_x - 1.0 / (4 * math.pi)) < 1e-9
        assert abs(d_z / d_x + 2.0) < 1e-3

    def test_dual_method_anisotropic_pair(self):
        a = gaussian_mode(0.5, 0.25, 0.4)
        b = gaussian_mode(0.3, 0.45, 0.2)
        disp = (0.9, 0.3, 0.5)
        d_m = dipolar_integral(a, b, disp)
        d_r = dipolar_integral_real_space(a, b, disp)
        assert abs(d_m - d_r) < 1e-4 * abs(d_m)

    def test_against_monte_carlo(self):
        sig_a, sig_b = (0.2, 0.3, 0.25), (0.35, 0.2, 0.3)
        disp = (1.6, 0.4, 0.7)
        a = gaussian_mode(sig_a[0], sig_a[1], sig_a[2])
        b = gaussian_mode(sig_b[0], sig_b[1], sig_b[2])
        d_m = dipolar_integral(a, b, disp)
        mc, err = mc_dipolar_gaussian(sig_a, sig_b, disp)
        assert abs(d_m - mc) < max(4.0 * err, 1e-3 * abs(d_m))

    def test_transpose_symmetry(self):
        a = gaussian_mode(0.5, 0.25, 0.4, center=0.2)
        b = gaussian_mode(0.3, 0.45, 0.2, center=-0.1, n_points=1283, half_span=8.0)
        disp = np.array([0.8, -0.3, 0.5])
        d_ab = dipolar_integral(a, b, disp)
        d_ba = dipolar_integral(b, a, -disp)
        assert abs(d_ab - d_ba) < 1e-8 * abs(d_ab)
        # and through the independent real-space pipeline
        d_ba_rs = dipolar_integral_real_space(b, a, -disp)
        assert abs(d_ab - d_ba_rs) < 1e-5 * abs(d_ab)

    def test_translation_invariance(self):
        base = dipolar_integral(gaussian_mode(0.4, 0.3, 0.25),
                                gaussian_mode(0.3, 0.35, 0.3), (1.1, 0.0, 0.4))
        shifted = dipolar_integral(gaussian_mode(0.4, 0.3, 0.25, center=0.6),
                                   gaussian_mode(0.3, 0.35, 0.3, center=0.6), (1.1, 0.0, 0.4))
        assert abs(base - shifted) < 1e-9 * abs(base)

    def test_scale_covariance(self):
        lam = 2.5
        base = dipolar_integral(gaussian_mode(0.4, 0.3, 0.25),
                                gaussian_mode(0.3, 0.35, 0.3), (1.1, 0.2, 0.4))
        blown = dipolar_integral(gaussian_mode(lam * 0.4, lam * 0.3, lam * 0.25),
                                 gaussian_mode(lam * 0.3, lam * 0.35, lam * 0.3),
                                 (lam * 1.1, lam * 0.2, lam * 0.4))
        assert abs(blown * lam**3 - base) < 1e-9 * abs(base)

    def test_rejects_bad_displacement(self):
        g = gaussian_mode(0.3, 0.3, 0.3)
        with pytest.raises(ValueError):
            dipolar_integral(g, g, (1.0, 2.0))


def synthetic_pair(sigma, x0, n_points=1537):
    """Mirror pair of isotropic Gaussian humps at -x0 and +x0."""
    span = x0 + 9.0 * sigma
    x = np.linspace(-span, span, n_points)
    dx = x[1] - x[0]

    def hump(c):
        psi = np.exp(-((x - c) ** 2) / (2 * sigma**2))
        return psi / math.sqrt(np.sum(psi**2) * dx)

    return ModePair(x=x, psi_l=hump(-x0), psi_r=hump(x0),
                    sigma_y=sigma, sigma_z=sigma, e_gs=0.0, e_ex=0.0)


# isotropic humps of width 0.1 at -+0.5, sites 2.0 apart along x: every
# cross-hump gap is at least 10 widths, so the Monte-Carlo reference has
# small variance and point-dipole values are exact
SIG, X0, SEP = 0.1, 0.5, 2.0
G_C, C_DD = 3.0e-52, 7.0e-53  # J m^3, arbitrary magnitudes


@pytest.fixture(scope="module")
def dw_result():
    return couplings_dw(synthetic_pair(SIG, X0), SEP, G_C, C_DD)


class TestCouplingsDW:
    SIG, X0, SEP = SIG, X0, SEP
    G_C, C_DD = G_C, C_DD

    def test_contact_rate_analytic(self, dw_result):
        i_want = 1.0 / ((2 * math.pi) ** 1.5 * self.SIG**3)
        assert abs(dw_result.i_contact / i_want - 1.0) < 1e-8
        assert abs(dw_result.chi_cont - self.G_C * i_want / HBAR) < 1e-8 * abs(dw_result.chi_cont)

    def test_local_rate_analytic(self, dw_result):
        # isotropic humps: D_self = 0, and D_LR is the point-dipole value
        # for an x displacement of 2 x0
        d_lr = 1.0 / (4 * math.pi * (2 * self.X0) ** 3)
        want = self.C_DD * (0.0 - d_lr) / HBAR
        assert abs(dw_result.d_self) < 1e-9 * d_lr
        assert abs(dw_result.chi_loc - want) < 1e-8 * abs(want)

    def test_cross_rates_analytic(self, dw_result):
        def pd(gap):
            return 1.0 / (4 * math.pi * gap**3)

        d_ll = pd(self.SEP)
        d_rl = pd(self.SEP - 2 * self.X0)
        d_lr = pd(self.SEP + 2 * self.X0)
        want_nloc = self.C_DD * (2 * d_ll - d_rl - d_lr) / HBAR
        want_nz = 0.5 * self.C_DD * (d_rl - d_lr) / HBAR
        assert abs(dw_result.chi_nloc - want_nloc) < 1e-8 * abs(want_nloc)
        assert abs(dw_result.chi_nz_ab - want_nz) < 1e-8 * abs(want_nz)
        assert abs(dw_result.chi_nz_ba + want_nz) < 1e-8 * abs(want_nz)

    def test_cross_rates_against_monte_carlo(self, dw_result):
        sig3 = (self.SIG,) * 3
        vals, errs = {}, {}
        for key, gap in (("ll", self.SEP), ("rl", self.SEP - 2 * self.X0),
                         ("lr", self.SEP + 2 * self.X0)):
            vals[key], errs[key] = mc_dipolar_gaussian(sig3, sig3, (gap, 0.0, 0.0))
        mc_nloc = self.C_DD * (2 * vals["ll"] - vals["rl"] - vals["lr"]) / HBAR
        mc_err = self.C_DD * math.sqrt(4 * errs["ll"] ** 2 + errs["rl"] ** 2
                                       + errs["lr"] ** 2) / HBAR
        assert abs(dw_result.chi_nloc - mc_nloc) < max(4.0 * mc_err, 1e-3 * abs(mc_nloc))
        mc_nz = 0.5 * self.C_DD * (vals["rl"] - vals["lr"]) / HBAR
        mc_nz_err = 0.5 * self.C_DD * math.hypot(errs["rl"], errs["lr"]) / HBAR
        assert abs(dw_result.chi_nz_ab - mc_nz) < max(4.0 * mc_nz_err, 1e-3 * abs(mc_nz))

    def test_mirror_geometry_relations(self, dw_result):
        assert abs(dw_result.d_lalb - dw_result.d_rarb) < 1e-8 * abs(dw_result.d_lalb)
        assert abs(dw_result.chi_nz_ab + dw_result.chi_nz_ba) < 1e-8 * abs(dw_result.chi_nz_ab)

    def test_dipoles_off(self):
        pair = synthetic_pair(self.SIG, self.X0, n_points=769)
        res = couplings_dw(pair, self.SEP, self.G_C, 0.0)
        assert res.chi_loc == 0.0 and res.chi_nloc == 0.0
        assert res.chi_cont > 0.0

    def test_grid_refinement_stability(self, dw_result):
        coarse = couplings_dw(synthetic_pair(self.SIG, self.X0, n_points=769),
                              self.SEP, self.G_C, self.C_DD)
        for name in ("chi_cont", "chi_loc", "chi_nloc", "chi_nz_ab"):
            a, b = getattr(coarse, name), getattr(dw_result, name)
            assert abs(a - b) < 1e-4 * abs(b)

    def test_solved_double_well_signs(self, dw_pair):
        # z-polarized dipoles side by side repel (D > 0), stacked attract
        side = dipolar_integral(dw_pair.left, dw_pair.left, (12 * S_X, 0.0, 0.0), node_scale=0.7)
        stack = dipolar_integral(dw_pair.left, dw_pair.left, (0.0, 0.0, 12 * S_X), node_scale=0.7)
        assert side > 0.0 > stack
        assert abs(stack / side + 2.0) < 1e-2


class TestGravityCouplings:
    def test_cgb_regression(self):
        assert abs(cgb_coupling(1.0, 1.0) - 7.8351398231e-11) < 1e-14

    def test_cgb_laws(self):
        base = cgb_coupling(3.2e-25, 0.5)
        assert abs(cgb_coupling(3.2e-25, 1.0) - base / 2) < 1e-18 * base
        assert abs(cgb_coupling(6.4e-25, 0.5) - 4 * base) < 1e-12 * base
        with pytest.raises(ValueError):
            cgb_coupling(1.0, 0.0)
        with pytest.raises(ValueError):
            cgb_coupling(1.0, -1.0)

    def test_bmv_against_level_spectrum(self):
        # oracle: rebuild the rates from the four Newtonian pair energies
        m, d, dp = 2.2e-17, 1.3e-4, 4.7e-4
        def e_pair(r):
            return -G_NEWTON * m**2 / r
        nloc_oracle = (e_pair(d) + e_pair(d + 2 * dp) - 2 * e_pair(d + dp)) / HBAR
        nz_oracle = (e_pair(d) - e_pair(d + 2 * dp)) / (2 * HBAR)
        chi_loc, chi_nloc, chi_nz = bmv_couplings(m, d, dp)
        assert abs(chi_nloc - nloc_oracle) < 1e-12 * abs(nloc_oracle)
        assert abs(chi_nz - nz_oracle) < 1e-12 * abs(nz_oracle)
        assert abs(chi_loc - G_NEWTON * m**2 / dp / HBAR) < 1e-12 * abs(chi_loc)

    def test_bmv_far_arm_ratio(self):
        m, d = 1e-17, 1.0
        _, chi_nloc, _ = bmv_couplings(m, d, 100.0 * d)
        ratio = chi_nloc / (-G_NEWTON * m**2 / d / HBAR)
        assert abs(ratio - 20000.0 / 20301.0) < 1e-12
        assert abs(ratio - 0.98517) < 1e-5

    def test_bmv_limits(self):
        m, d = 1e-17, 1.0
        ref = -G_NEWTON * m**2 / d / HBAR
        ratios = [bmv_couplings(m, d, f * d)[1] / ref for f in (1e2, 1e4, 1e6)]
        assert ratios[0] < ratios[1] < ratios[2] < 1.0
        assert abs(ratios[2] - 1.0) < 2e-6
        assert abs(bmv_couplings(m, d, 1e-6 * d)[1]) < 1e-11 * abs(ref)

    def test_bmv_self_energy_offset(self):
        m, d, dp = 1e-17, 1.0, 3.0
        base = bmv_couplings(m, d, dp)[0]
        shifted = bmv_couplings(m, d, dp, self_energy=0.4 * base * HBAR)[0]
        assert abs(shifted - 0.6 * base) < 1e-12 * abs(base)

    def test_bmv_rejects(self):
        with pytest.raises(ValueError):
            bmv_couplings(1e-17, 0.0, 1.0)
        with pytest.raises(ValueError):
            bmv_couplings(1e-17, 1.0, -2.0)

    def test_contact_strength(self):
        a0 = 5.29177210903e-11
        g = contact_strength(a0, M_K39)
        assert abs(g - 4 * math.pi * HBAR**2 * a0 / M_K39) < 1e-20 * g
