"""Spectral stability of interface velocities.

The linearized operator about a kernel steady state couples local
advection-diffusion-decay with a nonlocal rank-one term:

    A_V u = u'' + V u' - u + (1/c0) (int (theta0')^2 u dz) d(Psi0)/dz.

A velocity is stable when the whole spectrum lies strictly in the left half
plane.  Dense grids keep the rightmost eigenvalue reliable; on the truncated
domain with homogeneous endpoint values the advective essential spectrum is
pushed to Re <= -1 - V^2/4, so the decision is carried by the rank-one
eigenvalue, which crosses zero exactly at the folds c0 = Phi'_beta(V).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvals

from .kernel import KernelSolution, solve_psi0
from .potentials import StandingWaveProfile

__all__ = ["SpectrumReport", "assemble_AV", "spectrum", "is_stable", "STABILITY_MARGIN"]

STABILITY_MARGIN = 1e-6


@dataclass(frozen=True)
class SpectrumReport:
    V: float
    beta: float
    eigenvalues: np.ndarray          # sorted by real part, descending
    max_real: float
    stable: bool
    grid_signature: str


def assemble_AV(V: float, beta: float, profile: StandingWaveProfile,
                kernel: KernelSolution) -> np.ndarray:
    """Dense discretization of A_V on the interior nodes.

    The rank-one coupling uses d(Psi0)/dz by central differences and interior
    trapezoid weights, so each of its rows sums to (1/c0) dPsi0_i * (quadrature
    of (theta0')^2) ~= dPsi0_i.
    """
    if kernel.grid_z.shape != profile.grid_z.shape or \
            abs(kernel.grid_z[0] - profile.grid_z[0]) > 1e-12:
        raise ValueError("kernel was solved on a different grid than the profile")
    if abs(kernel.V - V) > 1e-12 or abs(kernel.beta - beta) > 1e-12:
        raise ValueError("kernel was solved at different (V, beta)")

    z = profile.grid_z
    h = profile.dz
    n = len(z)
    m = n - 2

    dpsi = (kernel.psi0[2:] - kernel.psi0[:-2]) / (2.0 * h)

    A = np.zeros((m, m))
    idx = np.arange(m)
    A[idx, idx] = -2.0 / h**2 - 1.0
    A[idx[:-1], idx[:-1] + 1] = 1.0 / h**2 + V / (2.0 * h)
    A[idx[1:], idx[1:] - 1] = 1.0 / h**2 - V / (2.0 * h)

    weights = np.full(m, h)
    A += (1.0 / profile.c0) * np.outer(dpsi, weights * profile.dtheta0[1:-1] ** 2)
    return A


def spectrum(A: np.ndarray, V: float = float("nan"), beta: float = float("nan"),
             grid_signature: str = "", margin: float = STABILITY_MARGIN) -> SpectrumReport:
    """Full dense eigenvalue computation, sorted by real part descending."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("spectrum expects a square matrix")
    try:
        ev = eigvals(A)
    except np.linalg.LinAlgError as exc:   # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(-ev.real)
    ev = ev[order]
    max_real = float(ev[0].real)
    return SpectrumReport(V=float(V), beta=float(beta), eigenvalues=ev,
                          max_real=max_real, stable=max_real < -margin,
                          grid_signature=grid_signature)


def is_stable(V: float, beta: float, profile: StandingWaveProfile,
              margin: float = STABILITY_MARGIN) -> tuple[bool, SpectrumReport]:
    """Membership of V in the stable velocity set, by the full spectrum."""
    kern = solve_psi0(V, beta, profile)
    A = assemble_AV(V, beta, profile, kern)
    rep = spectrum(A, V=V, beta=beta, grid_signature=profile.signature,
                   margin=margin)
    return rep.stable, rep
