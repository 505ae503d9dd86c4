import numpy as np
import pytest
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from motility_sil import phi_beta, phi_beta_prime, relax_reduced, solve_psi0
from motility_sil.kernel import get_phi_table
from motility_sil.potentials import standing_wave
from motility_sil.sil1d import sil_roots


def kernel_residual(sol, profile):
    """Centered-difference residual of the kernel BVP on interior nodes."""
    h = profile.dz
    psi = sol.psi0
    d2 = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h**2
    d1 = (psi[2:] - psi[:-2]) / (2 * h)
    return -d2 - sol.V * d1 + psi[1:-1] + sol.beta * profile.dtheta0[1:-1]


class TestSolvePsi0:
    def test_zero_forcing(self, quartic_profile):
        sol = solve_psi0(1.3, 0.0, quartic_profile)
        assert np.all(sol.psi0 == 0.0)
        assert sol.phi == 0.0

    def test_greens_function_oracle(self, quartic_profile):
        """V=0 turns the BVP into convolution with the kernel exp(-|z-s|)/2."""
        sol = solve_psi0(0.0, 1.0, quartic_profile)
        prof = quartic_profile
        spline = CubicSpline(prof.grid_z, prof.dtheta0)
        L = prof.half_width
        idx = np.arange(0, prof.n_points, prof.n_points // 50)
        errs = []
        for i in idx:
            zi = prof.grid_z[i]
            left, _ = quad(lambda s: np.exp(s - zi) * spline(s), -L, zi,
                           epsabs=1e-12, epsrel=1e-12, limit=200)
            right, _ = quad(lambda s: np.exp(zi - s) * spline(s), zi, L,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
            errs.append(sol.psi0[i] - (-0.5) * (left + right))
        assert np.max(np.abs(errs)) <= 1e-6

    def test_negative_solution(self, quartic_profile):
        sol = solve_psi0(0.0, 1.0, quartic_profile)
        assert np.all(sol.psi0[1:-1] < 0.0)

    @pytest.mark.parametrize("V,beta", [(0.0, 1.0), (2.0, 150.0), (-3.7, 50.0)])
    def test_discrete_residual(self, V, beta, quartic_profile):
        sol = solve_psi0(V, beta, quartic_profile)
        assert np.max(np.abs(kernel_residual(sol, quartic_profile))) <= 1e-6 * beta

    def test_endpoint_decay(self, quartic_profile):
        sol = solve_psi0(1.0, 150.0, quartic_profile)
        assert abs(sol.psi0[0]) <= 1e-5 * 150.0
        assert abs(sol.psi0[-1]) <= 1e-5 * 150.0

    def test_beta_linearity_elementwise(self, quartic_profile):
        a = solve_psi0(0.7, 1.0, quartic_profile)
        b = solve_psi0(0.7, 2.0, quartic_profile)
        scale = np.max(np.abs(a.psi0))
        assert np.max(np.abs(b.psi0 - 2.0 * a.psi0)) <= 1e-10 * scale

    def test_velocity_cap(self, quartic_profile):
        with pytest.raises(ValueError, match="cap"):
            solve_psi0(60.0, 1.0, quartic_profile)

    def test_reflection_identity(self, quartic_profile):
        """Even theta0': Psi0(z; -V) = Psi0(-z; V)."""
        a = solve_psi0(1.7, 1.0, quartic_profile).psi0
        b = solve_psi0(-1.7, 1.0, quartic_profile).psi0
        assert np.max(np.abs(b - a[::-1])) <= 1e-8


class TestPhiBeta:
    def test_zero_beta(self, quartic_profile):
        for v in (-2.0, 0.0, 1.0):
            assert phi_beta(v, 0.0, quartic_profile) == 0.0

    @pytest.mark.parametrize("V", [0.5, 1.0, 2.0])
    def test_evenness_symmetric_potential(self, V, quartic_profile):
        for beta in (1.0, 150.0):
            gap = abs(phi_beta(V, beta, quartic_profile)
                      - phi_beta(-V, beta, quartic_profile))
            assert gap < 1e-8 * beta

    def test_beta_linearity(self, quartic_profile):
        a = phi_beta(1.3, 75.0, quartic_profile)
        b = phi_beta(1.3, 150.0, quartic_profile)
        assert abs(b - 2.0 * a) <= 1e-10 * abs(b)

    def test_grid_refinement_stability(self, quartic, quartic_profile):
        fine = standing_wave(quartic, 20.0, 40001)
        for V in (-3.0, -1.5, 0.0, 1.5, 3.0):
            for beta in (1.0, 150.0):
                gap = abs(phi_beta(V, beta, quartic_profile)
                          - phi_beta(V, beta, fine))
                assert gap < 1e-7, (V, beta, gap)

    def test_cache_hit_is_identical(self, quartic_profile):
        a = phi_beta(0.123456, 150.0, quartic_profile)
        b = phi_beta(0.123456, 150.0, quartic_profile)
        assert a == b


class TestPhiBetaPrime:
    def test_zero_beta(self, quartic_profile):
        assert phi_beta_prime(1.0, 0.0, quartic_profile) == 0.0

    def test_even_response_has_flat_origin(self, quartic_profile):
        assert abs(phi_beta_prime(0.0, 150.0, quartic_profile)) < 1e-8

    def test_asymmetric_positive_at_origin(self, sextic_profile):
        assert phi_beta_prime(0.0, 2000.0, sextic_profile) > 0.0

    @pytest.mark.parametrize("V", [-2.0, 0.4, 1.1])
    def test_against_local_least_squares(self, V, quartic_profile):
        """Slope of a 5-point least-squares fit of Phi near V."""
        beta = 150.0
        h = 1e-3
        vs = V + h * np.arange(-2, 3)
        phis = np.array([phi_beta(v, beta, quartic_profile) for v in vs])
        slope = np.polyfit(vs - V, phis, 1)[0]
        d = phi_beta_prime(V, beta, quartic_profile)
        assert abs(d - slope) <= 1e-5 * max(abs(d), abs(slope))


class TestPhiTable:
    def test_matches_exact_solves(self, quartic_profile):
        table = get_phi_table(quartic_profile, v_max=10.0)
        for v in (-4.567, 0.0, 2.341):
            assert table.phi(v, 150.0) == pytest.approx(
                phi_beta(v, 150.0, quartic_profile), abs=1e-7)

    def test_auto_extension(self, quartic_profile):
        from motility_sil.kernel import PhiTable
        table = PhiTable(quartic_profile, v_max=5.0)
        val = table.phi(8.0)   # beyond the initial range
        assert table.v_max >= 8.0
        assert val == pytest.approx(phi_beta(8.0, 1.0, quartic_profile), abs=1e-9)


class TestRelaxReduced:
    def test_zero_beta_fixed_point(self, quartic_profile_relax):
        prof = quartic_profile_relax
        F = 0.1
        U, ts, Vs = relax_reduced(F, 0.0, prof, t_end=0.5)
        assert np.all(U == 0.0)
        assert np.allclose(Vs, -F / prof.c0, atol=1e-14)

    def test_steady_state_self_consistency(self, quartic_profile_relax):
        """Seeded at a stable root's kernel state, relax stays there and the
        steady velocity satisfies the interface law on the same grid."""
        prof = quartic_profile_relax
        beta, F = 150.0, -2.0
        rs = sil_roots(F, beta, prof, v_scan=20.0)
        v_target = rs.stable_roots()[0].V
        seed = solve_psi0(v_target, beta, prof).psi0
        U, ts, Vs = relax_reduced(F, beta, prof, U_init=seed, t_end=40.0)
        v_final = Vs[-1]
        resid = abs(prof.c0 * v_final - phi_beta(v_final, beta, prof) + F)
        assert resid < 1e-5
        assert abs(v_final - v_target) < 1e-5

    def test_unstable_root_selects_stable_branch(self, quartic_profile_relax):
        prof = quartic_profile_relax
        beta, F = 150.0, -2.0
        rs = sil_roots(F, beta, prof, v_scan=20.0)
        unstable = [r for r in rs.roots if not r.stable]
        assert len(unstable) == 1
        stable_vs = [r.V for r in rs.stable_roots()]
        seed = solve_psi0(unstable[0].V, beta, prof).psi0 + 1e-3
        U, ts, Vs = relax_reduced(F, beta, prof, U_init=seed, t_end=60.0)
        dist = min(abs(Vs[-1] - v) for v in stable_vs)
        assert dist < 1e-3
        assert abs(Vs[-1] - unstable[0].V) > 0.1

    def test_dt_bound_enforced(self, quartic_profile_relax):
        with pytest.raises(ValueError, match="dt"):
            relax_reduced(0.0, 1.0, quartic_profile_relax, dt=1.0, t_end=2.0)

    def test_blowup_guard(self, quartic_profile_relax):
        prof = quartic_profile_relax
        bad = np.full(prof.n_points, 2e6)
        with pytest.raises(RuntimeError, match="blow-up"):
            relax_reduced(0.0, 1.0, prof, U_init=bad, t_end=1.0)
