"""Shared fixtures: profiles are expensive enough to build once per session."""

import numpy as np
import pytest
from scipy.optimize import brentq

from motility_sil import make_potential, phi_beta, phi_beta_prime, standing_wave

C0_QUARTIC_EXACT = np.sqrt(2.0) / 12.0


def find_folds(profile, beta, v_lo=-8.0, v_hi=8.0, n=801):
    """Fold velocities and forcings from the condition c0 = Phi'_beta(V)."""
    vs = np.linspace(v_lo, v_hi, n)
    m = np.array([profile.c0 - phi_beta_prime(v, beta, profile) for v in vs])
    folds = []
    for i in range(n - 1):
        if (m[i] < 0) != (m[i + 1] < 0):
            vf = brentq(lambda v: profile.c0 - phi_beta_prime(v, beta, profile),
                        vs[i], vs[i + 1], xtol=1e-10)
            Ff = phi_beta(vf, beta, profile) - profile.c0 * vf
            folds.append((vf, Ff))
    return folds


@pytest.fixture(scope="session")
def quartic():
    return make_potential("symmetric-quartic")


@pytest.fixture(scope="session")
def sextic():
    return make_potential("asymmetric-sextic")


@pytest.fixture(scope="session")
def quartic_profile(quartic):
    """Default fine grid used by the kernel and the interface laws."""
    return standing_wave(quartic, 20.0, 20001)


@pytest.fixture(scope="session")
def sextic_profile(sextic):
    return standing_wave(sextic, 20.0, 20001)


@pytest.fixture(scope="session")
def quartic_profile_coarse(quartic):
    """Companion grid for eigensolves and reduced-dynamics relaxation."""
    return standing_wave(quartic, 20.0, 1401, strict=False)


@pytest.fixture(scope="session")
def sextic_profile_coarse(sextic):
    return standing_wave(sextic, 20.0, 1401, strict=False)


@pytest.fixture(scope="session")
def quartic_profile_relax(quartic):
    return standing_wave(quartic, 20.0, 1601, strict=False)
