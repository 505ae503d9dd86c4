import numpy as np
import pytest

from motility_sil import (asymmetry_indicator, make_potential, mirror_potential,
                          standing_wave)
from motility_sil.potentials import PotentialError

from conftest import C0_QUARTIC_EXACT


class TestMakePotential:
    def test_quartic_values(self, quartic):
        assert quartic.W(0.5) == pytest.approx(0.015625, abs=1e-15)
        assert quartic.W(0.0) == 0.0
        assert quartic.W(1.0) == 0.0

    def test_sextic_value_at_half(self, sextic):
        # 1/4 * 0.25 * 0.25 * 1.25
        assert sextic.W(0.5) == pytest.approx(0.01953125, abs=1e-15)

    def test_unknown_kind(self):
        with pytest.raises(PotentialError, match="unknown potential kind"):
            make_potential("cubic")

    def test_well_violation_reported(self):
        # W(1) != 0
        with pytest.raises(PotentialError, match="wells"):
            make_potential("polynomial", (0.0, 0.0, 1.0))

    def test_negative_interior_reported(self):
        # wells fine, but 1/4 r^2 (1-r)^2 (1 - 5 r (1-r)) dips negative inside
        base = np.polynomial.Polynomial((0.0, 0.0, 0.25, -0.5, 0.25))
        dip = np.polynomial.Polynomial((1.0, -5.0, 5.0))
        with pytest.raises(PotentialError, match="positive"):
            make_potential("polynomial", tuple((base * dip).coef))

    def test_degenerate_well_reported(self):
        # W = rho^4 (1-rho)^4 has W''(0) = 0
        p = np.polynomial.Polynomial((0.0, 0.0, 0.0, 0.0, 1.0))
        q = p * np.polynomial.Polynomial((1.0, -1.0)) ** 4
        with pytest.raises(PotentialError, match="nondegenerate"):
            make_potential("polynomial", tuple(q.coef))

    @pytest.mark.parametrize("kind", ["symmetric-quartic", "asymmetric-sextic"])
    def test_derivatives_match_finite_differences(self, kind):
        p = make_potential(kind)
        rho = np.linspace(0.0, 1.0, 1001)
        h = 1e-6
        dW = (p.W(rho + h) - p.W(rho - h)) / (2 * h)
        assert np.all(np.abs(dW - p.Wp(rho)) <= 1e-6 * (1.0 + np.abs(p.Wp(rho))))
        ddW = (p.Wp(rho + h) - p.Wp(rho - h)) / (2 * h)
        assert np.all(np.abs(ddW - p.Wpp(rho)) <= 1e-6 * (1.0 + np.abs(p.Wpp(rho))))


class TestStandingWave:
    def test_centering(self, quartic_profile):
        mid = (quartic_profile.n_points - 1) // 2
        assert quartic_profile.theta0[mid] == pytest.approx(0.5, abs=1e-12)
        assert quartic_profile.grid_z[mid] == 0.0

    def test_matches_closed_form(self, quartic_profile):
        z = quartic_profile.grid_z
        exact = 0.5 * (1.0 + np.tanh(z / (2.0 * np.sqrt(2.0))))
        assert np.max(np.abs(quartic_profile.theta0 - exact)) <= 1e-8

    def test_c0_closed_form(self, quartic_profile):
        assert quartic_profile.c0 == pytest.approx(C0_QUARTIC_EXACT, abs=1e-8)

    def test_c0_grid_invariance(self, quartic):
        base = standing_wave(quartic, 20.0, 20001).c0
        doubled = standing_wave(quartic, 20.0, 40001).c0
        wider = standing_wave(quartic, 40.0, 40001).c0
        assert abs(doubled - base) < 1e-8
        assert abs(wider - base) < 1e-8

    @pytest.mark.parametrize("fixture", ["quartic_profile", "sextic_profile"])
    def test_residual_bound(self, fixture, request):
        prof = request.getfixturevalue(fixture)
        th, h = prof.theta0, prof.dz
        resid = (th[2:] - 2 * th[1:-1] + th[:-2]) / h**2 \
            - prof.potential.Wp(th[1:-1])
        assert np.max(np.abs(resid)) <= 1e-6

    def test_monotone_and_tails(self, sextic_profile):
        th = sextic_profile.theta0
        assert np.all(np.diff(th) >= -1e-14)
        assert th[0] < 1e-6
        assert th[-1] > 1.0 - 1e-6

    def test_dtheta0_is_first_integral(self, sextic_profile):
        expected = np.sqrt(2.0 * sextic_profile.potential.W(sextic_profile.theta0))
        np.testing.assert_allclose(sextic_profile.dtheta0, expected, atol=1e-14)

    def test_preconditions(self, quartic):
        with pytest.raises(ValueError, match="half_width"):
            standing_wave(quartic, 10.0, 4001)
        with pytest.raises(ValueError, match="odd"):
            standing_wave(quartic, 20.0, 4000)

    def test_coarse_grid_needs_strict_false(self, quartic):
        with pytest.raises(RuntimeError, match="residual"):
            standing_wave(quartic, 20.0, 1401, strict=True)
        prof = standing_wave(quartic, 20.0, 1401, strict=False)
        assert not prof.strict

    def test_theta0_at_clamps_and_interpolates(self, quartic_profile):
        y = np.array([-50.0, -20.0, 0.0, 3.3, 20.0, 50.0])
        vals = quartic_profile.theta0_at(y)
        assert vals[0] == 0.0 and vals[-1] == 1.0
        exact = 0.5 * (1.0 + np.tanh(3.3 / (2.0 * np.sqrt(2.0))))
        assert vals[3] == pytest.approx(exact, abs=1e-9)


class TestAsymmetryIndicator:
    def test_quartic_is_symmetric(self, quartic):
        assert abs(asymmetry_indicator(quartic)) < 1e-9

    def test_sextic_positive(self, sextic):
        assert asymmetry_indicator(sextic) > 0.0

    def test_mirror_negates(self, sextic):
        a = asymmetry_indicator(sextic)
        b = asymmetry_indicator(mirror_potential(sextic))
        assert b == pytest.approx(-a, abs=1e-9)

    def test_mirror_is_valid_potential(self, sextic):
        m = mirror_potential(sextic)
        assert m.W(0.0) == pytest.approx(0.0, abs=1e-12)
        assert m.W(1.0) == pytest.approx(0.0, abs=1e-12)
        assert m.W(0.25) == pytest.approx(sextic.W(0.75), rel=1e-12)
