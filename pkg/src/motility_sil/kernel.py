"""Interface response kernel: Psi0(z; V, beta) and Phi_beta(V).

Psi0 solves the linear two-point boundary value problem

    -Psi0'' - V Psi0' + Psi0 + beta theta0'(z) = 0,   Psi0(+-L) = 0,

discretized with centered second/first differences and solved as a
tridiagonal system.  Phi_beta(V) is the trapezoid quadrature of
Psi0 (theta0')^2.  The problem is linear in beta, so all solves are done at
unit beta and scaled; this makes Phi_{2beta} = 2 Phi_beta exact and lets a
single cache serve every beta.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .potentials import StandingWaveProfile

__all__ = [
    "KernelSolution",
    "solve_psi0",
    "phi_beta",
    "phi_beta_prime",
    "PhiTable",
    "relax_reduced",
    "clear_phi_cache",
    "V_CAP",
]

V_CAP = 50.0


@dataclass(frozen=True)
class KernelSolution:
    """Solved kernel at one (V, beta) on the profile grid."""

    V: float
    beta: float
    grid_z: np.ndarray
    psi0: np.ndarray
    phi: float


# phi cache: profile signature -> {V: phi at unit beta}.  Concurrent readers
# are safe; insertion is guarded by a single lock.
_PHI_CACHE: dict[str, dict[float, float]] = {}
_CACHE_LOCK = threading.Lock()


def clear_phi_cache() -> None:
    with _CACHE_LOCK:
        _PHI_CACHE.clear()


def _solve_unit(V: float, profile: StandingWaveProfile) -> np.ndarray:
    """Psi0 at beta = 1 (interior solve, endpoints pinned to zero)."""
    z = profile.grid_z
    h = profile.dz
    n = len(z)
    ab = np.zeros((3, n - 2))
    ab[0, 1:] = -1.0 / h**2 - V / (2.0 * h)   # superdiagonal
    ab[1, :] = 2.0 / h**2 + 1.0
    ab[2, :-1] = -1.0 / h**2 + V / (2.0 * h)  # subdiagonal
    x = solve_banded((1, 1), ab, -profile.dtheta0[1:-1])
    psi = np.zeros(n)
    psi[1:-1] = x
    return psi


def solve_psi0(V: float, beta: float, profile: StandingWaveProfile) -> KernelSolution:
    """Solve the kernel BVP and evaluate Phi_beta(V) on the profile grid."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if abs(V) > V_CAP:
        raise ValueError(f"|V|={abs(V):.3g} exceeds the advection cap {V_CAP}")
    psi_unit = _solve_unit(float(V), profile)
    psi = beta * psi_unit
    phi = float(np.trapezoid(psi * profile.dtheta0**2, profile.grid_z))
    return KernelSolution(V=float(V), beta=float(beta), grid_z=profile.grid_z,
                          psi0=psi, phi=phi)


def phi_beta(V: float, beta: float, profile: StandingWaveProfile) -> float:
    """Phi_beta(V), cached per (profile grid, V) at unit beta and scaled."""
    if beta == 0.0:
        return 0.0
    key = profile.signature
    V = float(V)
    per_profile = _PHI_CACHE.get(key)
    if per_profile is not None:
        hit = per_profile.get(V)
        if hit is not None:
            return beta * hit
    sol = solve_psi0(V, 1.0, profile)
    with _CACHE_LOCK:
        _PHI_CACHE.setdefault(key, {})[V] = sol.phi
    return beta * sol.phi


def phi_beta_prime(V: float, beta: float, profile: StandingWaveProfile) -> float:
    """d Phi_beta / dV by central differences, Richardson-extrapolated once.

    Step h = 1e-4 (1 + |V|); relative accuracy ~1e-6 on the smooth response.
    """
    if beta == 0.0:
        return 0.0
    h = 1e-4 * (1.0 + abs(V))

    def cd(step):
        return (phi_beta(V + step, beta, profile)
                - phi_beta(V - step, beta, profile)) / (2.0 * step)

    d1 = cd(h)
    d2 = cd(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


class PhiTable:
    """Cubic-spline table of Phi at unit beta over a symmetric V range.

    Root scans and per-node interface solves evaluate Phi thousands of times;
    the table keeps those calls cheap while exact solves remain available for
    final polishing.  The range auto-extends on demand.
    """

    def __init__(self, profile: StandingWaveProfile, v_max: float = 10.0,
                 dv: float = 0.02):
        self.profile = profile
        self.dv = float(dv)
        self._build(float(v_max))

    def _build(self, v_max: float) -> None:
        n = int(round(2.0 * v_max / self.dv)) + 1
        self.v_max = v_max
        self.v_grid = np.linspace(-v_max, v_max, n)
        vals = np.array([phi_beta(v, 1.0, self.profile) for v in self.v_grid])
        self._spline = CubicSpline(self.v_grid, vals)
        self._dspline = self._spline.derivative()

    def ensure_range(self, v_abs: float) -> None:
        if v_abs > self.v_max:
            self._build(max(v_abs * 1.25, self.v_max * 1.5))

    def phi(self, V, beta: float = 1.0):
        self.ensure_range(float(np.max(np.abs(V))))
        return beta * self._spline(V)

    def phi_prime(self, V, beta: float = 1.0):
        self.ensure_range(float(np.max(np.abs(V))))
        return beta * self._dspline(V)


_TABLE_CACHE: dict[tuple, PhiTable] = {}


def get_phi_table(profile: StandingWaveProfile, v_max: float = 10.0,
                  dv: float = 0.02) -> PhiTable:
    """Shared PhiTable for a profile (built once per grid/range).

    The build happens outside the cache lock (it takes the lock itself for
    each phi insert); a concurrent duplicate build is harmless.
    """
    key = (profile.signature, round(dv, 12))
    tab = _TABLE_CACHE.get(key)
    if tab is None or tab.v_max < v_max:
        tab = PhiTable(profile, v_max=v_max, dv=dv)
        with _CACHE_LOCK:
            existing = _TABLE_CACHE.get(key)
            if existing is None or existing.v_max < v_max:
                _TABLE_CACHE[key] = tab
            else:
                tab = existing
    return tab


def relax_reduced(F, beta: float, profile: StandingWaveProfile,
                  U_init: np.ndarray | None = None,
                  t_end: float = 50.0, dt: float | None = None,
                  settle_tol: float = 1e-9, record_every: int = 50):
    """Relax the reduced interface dynamics to steady state.

    Evolves  dU/dt = U'' + V(t) U' - U - beta theta0'  with
    V(t) = (int (theta0')^2 U dy - F) / c0, diffusion and decay implicit
    (one tridiagonal solve per step), advection explicit.  ``F`` may be a
    scalar or a callable of t.  Stops early once the update rate drops below
    ``settle_tol``.  Returns (U_final, t_samples, V_samples).
    """
    z = profile.grid_z
    h = profile.dz
    n = len(z)
    if dt is None:
        dt = 0.25 * h * h
    if dt > 0.25 * h * h * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:.3g} exceeds the advection bound 0.25 dz^2")
    F_of_t = F if callable(F) else (lambda t, _F=float(F): _F)

    U = np.zeros(n) if U_init is None else np.array(U_init, dtype=float, copy=True)
    if U.shape != z.shape:
        raise ValueError("U_init must live on the profile grid")

    ab = np.zeros((3, n - 2))
    ab[0, 1:] = -dt / h**2
    ab[1, :] = 1.0 + 2.0 * dt / h**2 + dt
    ab[2, :-1] = -dt / h**2

    w2 = profile.dtheta0**2
    forcing = beta * profile.dtheta0[1:-1]
    nsteps = int(round(t_end / dt))
    ts, Vs = [], []
    t = 0.0
    for k in range(nsteps):
        V = (np.trapezoid(w2 * U, z) - F_of_t(t)) / profile.c0
        if k % record_every == 0:
            ts.append(t)
            Vs.append(V)
        dU = (U[2:] - U[:-2]) / (2.0 * h)
        rhs = U[1:-1] + dt * (V * dU - forcing)
        Unew = np.zeros(n)
        Unew[1:-1] = solve_banded((1, 1), ab, rhs)
        delta = np.max(np.abs(Unew - U)) / dt
        U = Unew
        t += dt
        if np.max(np.abs(U)) > 1e6:
            raise RuntimeError(f"relax_reduced blow-up guard tripped at t={t:.4g}")
        if delta < settle_tol:
            break
    V = (np.trapezoid(w2 * U, z) - F_of_t(t)) / profile.c0
    ts.append(t)
    Vs.append(V)
    return U, np.asarray(ts), np.asarray(Vs)
