import numpy as np
import pytest

from motility_sil import (assemble_AV, is_stable, phi_beta_prime, solve_psi0,
                          spectrum, standing_wave)


@pytest.fixture(scope="module")
def coarse(quartic_profile_coarse):
    return quartic_profile_coarse


class TestAssembleAV:
    def test_beta_zero_is_tridiagonal(self, coarse):
        kern = solve_psi0(0.7, 0.0, coarse)
        A = assemble_AV(0.7, 0.0, coarse, kern)
        off = A.copy()
        m = len(A)
        idx = np.arange(m)
        off[idx, idx] = 0.0
        off[idx[:-1], idx[:-1] + 1] = 0.0
        off[idx[1:], idx[1:] - 1] = 0.0
        assert np.max(np.abs(off)) == 0.0

    def test_rank_one_row_sums(self, coarse):
        """Rows of the nonlocal part sum to dPsi0/dz (the quadrature of
        (theta0')^2 is c0 up to the endpoint half-weights)."""
        beta = 150.0
        kern = solve_psi0(0.4, beta, coarse)
        A = assemble_AV(0.4, beta, coarse, kern)
        kern0 = solve_psi0(0.4, 0.0, coarse)
        base = assemble_AV(0.4, 0.0, coarse, kern0)
        rank_one = A - base
        h = coarse.dz
        dpsi = (kern.psi0[2:] - kern.psi0[:-2]) / (2.0 * h)
        sums = rank_one.sum(axis=1)
        np.testing.assert_allclose(sums, dpsi, rtol=1e-6, atol=1e-12 * beta)

    def test_rank_one_doubles_with_beta(self, coarse):
        base = assemble_AV(0.4, 0.0, coarse, solve_psi0(0.4, 0.0, coarse))
        A1 = assemble_AV(0.4, 75.0, coarse, solve_psi0(0.4, 75.0, coarse))
        A2 = assemble_AV(0.4, 150.0, coarse, solve_psi0(0.4, 150.0, coarse))
        np.testing.assert_allclose(A2 - base, 2.0 * (A1 - base),
                                   rtol=0, atol=1e-10)

    def test_grid_mismatch_rejected(self, coarse, quartic_profile):
        kern = solve_psi0(0.0, 1.0, quartic_profile)
        with pytest.raises(ValueError, match="different grid"):
            assemble_AV(0.0, 1.0, coarse, kern)


class TestSpectrum:
    def test_beta_zero_v_zero(self, coarse):
        """Decay-dominated operator: rightmost eigenvalue at -1 up to the
        O(dz^2) + domain-truncation offset."""
        kern = solve_psi0(0.0, 0.0, coarse)
        rep = spectrum(assemble_AV(0.0, 0.0, coarse, kern))
        assert abs(rep.max_real - (-1.0)) < 1e-2
        assert np.all(rep.eigenvalues.real <= -1.0 + 1e-2)

    def test_beta_zero_advection_shift(self, coarse):
        """On the truncated interval with pinned endpoints the advection term
        is removable by conjugation: the spectrum is real and shifted to
        -1 - V^2/4 (not -1; the imaginary-shift picture holds only on the
        whole line)."""
        V = 1.0
        kern = solve_psi0(V, 0.0, coarse)
        rep = spectrum(assemble_AV(V, 0.0, coarse, kern))
        assert abs(rep.max_real - (-1.0 - V * V / 4.0)) < 1e-2
        assert np.all(rep.eigenvalues.real <= -1.0 + 1e-2)
        assert np.max(np.abs(rep.eigenvalues.imag)) < 1e-6

    def test_eigenvalue_count_and_order(self, coarse):
        kern = solve_psi0(0.0, 1.0, coarse)
        rep = spectrum(assemble_AV(0.0, 1.0, coarse, kern))
        assert len(rep.eigenvalues) == coarse.n_points - 2
        assert np.all(np.diff(rep.eigenvalues.real) <= 1e-12)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError, match="square"):
            spectrum(np.zeros((3, 4)))

    @pytest.mark.slow
    def test_grid_refinement(self, quartic):
        """max Re stable to 1e-3 under doubling from n=1601."""
        p1 = standing_wave(quartic, 20.0, 1601, strict=False)
        p2 = standing_wave(quartic, 20.0, 3201, strict=False)
        vals = []
        for prof in (p1, p2):
            kern = solve_psi0(0.5, 150.0, prof)
            vals.append(spectrum(assemble_AV(0.5, 150.0, prof, kern)).max_real)
        assert abs(vals[0] - vals[1]) < 1e-3


class TestIsStable:
    def test_fold_criterion_unstable(self, coarse):
        """Velocities with c0 <= Phi'_beta(V) are never stable."""
        beta = 150.0
        for V in (0.5, 0.9, 1.2):
            assert phi_beta_prime(V, beta, coarse) >= coarse.c0
            stable, rep = is_stable(V, beta, coarse)
            assert not stable
            assert rep.max_real >= -1e-6

    def test_monotone_region_stable(self, coarse):
        beta = 150.0
        for V in (-2.0, 0.0, 0.2):
            assert phi_beta_prime(V, beta, coarse) < coarse.c0
            stable, rep = is_stable(V, beta, coarse)
            assert stable, (V, rep.max_real)

    def test_supercritical_asymmetric_origin_unstable(self, sextic_profile_coarse):
        prof = sextic_profile_coarse
        beta_c = prof.c0 / phi_beta_prime(0.0, 1.0, prof)
        stable, rep = is_stable(0.0, 1.5 * beta_c, prof)
        assert not stable
        stable2, _ = is_stable(0.0, 0.5 * beta_c, prof)
        assert stable2

    def test_half_width_robustness(self, quartic):
        """Stability verdicts survive widening the truncated domain."""
        wide = standing_wave(quartic, 30.0, 2101, strict=False)
        for V, expect in ((0.2, True), (0.9, False)):
            stable, _ = is_stable(V, 150.0, wide)
            assert stable == expect
