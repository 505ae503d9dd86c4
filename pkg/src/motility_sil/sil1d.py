"""Scalar sharp-interface laws: roots, traveling waves, hysteresis sweeps.

The quasi-static velocity solves  c0 V = Phi_beta(V) - F.  Nonzero traveling
waves of the free (two-interface) problem solve 2 c0 V = Phi_beta(V) -
Phi_beta(-V).  Root finding brackets sign changes on a scan grid backed by
the Phi spline table and polishes each bracket against the exact solver so
the residual bound |c0 V - Phi_beta(V) + F| <= 1e-8 (1 + beta) holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import stability as _stability_mod
from .kernel import get_phi_table, phi_beta, phi_beta_prime, relax_reduced, solve_psi0
from .potentials import StandingWaveProfile, standing_wave

__all__ = [
    "Root",
    "RootSet",
    "Schedule",
    "HysteresisTrace",
    "sil_roots",
    "traveling_wave_roots",
    "beta_critical",
    "run_hysteresis",
    "reference_schedule",
]

ROOT_MERGE_TOL = 1e-6


@dataclass(frozen=True)
class Root:
    V: float
    stable: bool
    phi_prime: float


@dataclass(frozen=True)
class RootSet:
    """All roots of c0 V = Phi_beta(V) - F found on the scan range."""

    F: float
    beta: float
    roots: tuple[Root, ...]

    def stable_roots(self) -> list[Root]:
        return [r for r in self.roots if r.stable]

    def nearest(self, V: float, stable_only: bool = True) -> Root | None:
        cands = self.stable_roots() if stable_only else list(self.roots)
        if not cands:
            return None
        return min(cands, key=lambda r: abs(r.V - V))


class RootScanError(RuntimeError):
    """Scan range exhausted without bracketing any root."""


def _polish_root(g_exact, g_spline, lo: float, hi: float) -> float:
    """Bracketed root of the spline surrogate, corrected against the exact g.

    The spline keeps the bracket search cheap; two exact evaluations then move
    the root onto the exact response (Newton step with the spline slope).
    """
    v = brentq(g_spline, lo, hi, xtol=1e-12, rtol=8.9e-16)
    for _ in range(3):
        gv = g_exact(v)
        if abs(gv) < 1e-13:
            break
        slope = (g_spline(v + 1e-6) - g_spline(v - 1e-6)) / 2e-6
        if slope == 0.0:
            break
        step = gv / slope
        v -= step
        if abs(step) < 1e-13:
            break
    return v


def _merge(vs: list[float]) -> list[float]:
    out: list[float] = []
    for v in sorted(vs):
        if not out or abs(v - out[-1]) > ROOT_MERGE_TOL:
            out.append(v)
    return out


def sil_roots(F: float, beta: float, profile: StandingWaveProfile,
              v_scan: float = 10.0, dv: float = 0.02,
              stability_method: str = "monotone") -> RootSet:
    """Roots of g(V) = c0 V - Phi_beta(V) + F on [-v_scan, v_scan].

    ``stability_method`` is ``"monotone"`` (the c0 > Phi'_beta(V) criterion;
    default) or ``"spectrum"`` (full eigensolve of the linearized operator on
    this profile's grid -- use a coarse profile).
    """
    c0 = profile.c0
    table = get_phi_table(profile, v_max=v_scan, dv=dv)

    def g_exact(v):
        return c0 * v - phi_beta(v, beta, profile) + F

    def g_spline(v):
        return c0 * v - table.phi(v, beta) + F

    grid = np.arange(-v_scan, v_scan + dv / 2.0, dv)
    vals = g_spline(grid)
    found: list[float] = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            found.append(grid[i])
        elif (a < 0.0) != (b < 0.0):
            found.append(_polish_root(g_exact, g_spline, grid[i], grid[i + 1]))
    if vals[-1] == 0.0:
        found.append(grid[-1])
    if not found:
        raise RootScanError(
            f"no root of the interface law in [-{v_scan}, {v_scan}] "
            f"at F={F:.6g}, beta={beta:.6g}"
        )

    roots = []
    for v in _merge(found):
        dphi = phi_beta_prime(v, beta, profile)
        if stability_method == "monotone":
            stable = c0 > dphi
        elif stability_method == "spectrum":
            stable = _stability_mod.is_stable(v, beta, profile)[0]
        else:
            raise ValueError(f"unknown stability_method {stability_method!r}")
        roots.append(Root(V=float(v), stable=bool(stable), phi_prime=float(dphi)))
    return RootSet(F=float(F), beta=float(beta), roots=tuple(roots))


def traveling_wave_roots(beta: float, profile: StandingWaveProfile,
                         v_scan: float = 10.0, dv: float = 0.02) -> list[float]:
    """Roots of h(V) = 2 c0 V - Phi_beta(V) + Phi_beta(-V); V = 0 always."""
    c0 = profile.c0
    table = get_phi_table(profile, v_max=v_scan, dv=dv)

    def h_exact(v):
        return 2.0 * c0 * v - phi_beta(v, beta, profile) + phi_beta(-v, beta, profile)

    def h_spline(v):
        return 2.0 * c0 * v - table.phi(v, beta) + table.phi(-v, beta)

    grid = np.arange(0.0, v_scan + dv / 2.0, dv)   # h is odd; scan V >= 0
    vals = np.array([h_spline(v) for v in grid])
    pos: list[float] = []
    for i in range(len(grid) - 1):
        if (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            v = _polish_root(h_exact, h_spline, grid[i], grid[i + 1])
            if v > ROOT_MERGE_TOL:
                pos.append(v)
    pos = _merge(pos)
    return [-v for v in reversed(pos)] + [0.0] + pos


def beta_critical(profile: StandingWaveProfile, beta_range=(1.0, 1e5),
                  tol: float = 1e-3) -> float:
    """Onset beta for nonzero traveling waves, by bisection.

    The bracketing predicate combines the pitchfork criterion
    c0 = Phi'_beta(0) (exact near onset, where scan-grid brackets are too
    coarse) with a direct nonzero-root search.  Errors out for potentials
    with an even response, where no bifurcation exists.
    """
    c0 = profile.c0
    dphi_unit = phi_beta_prime(0.0, 1.0, profile)

    table = get_phi_table(profile, v_max=10.0)
    odd = np.max(np.abs(table.phi(table.v_grid) - table.phi(-table.v_grid)))
    # the derivative estimate carries ~1e-10 finite-difference noise even for
    # a perfectly even response; the odd-part check is the sharp one
    if odd < 1e-11 and abs(dphi_unit) < 1e-8:
        raise ValueError("no bifurcation: response is even")

    def has_nonzero(beta: float) -> bool:
        if beta * dphi_unit > c0:
            return True
        return any(abs(v) > ROOT_MERGE_TOL
                   for v in traveling_wave_roots(beta, profile))

    lo, hi = float(beta_range[0]), float(beta_range[1])
    if has_nonzero(lo) or not has_nonzero(hi):
        raise ValueError(
            f"beta_range {beta_range} does not bracket the bifurcation"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_nonzero(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# quasi-static hysteresis sweep


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear F(t) through (t, F) breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ts = [t for t, _ in self.breakpoints]
        if len(ts) < 2 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("breakpoints must be strictly increasing in t")

    @property
    def t_start(self) -> float:
        return self.breakpoints[0][0]

    @property
    def t_end(self) -> float:
        return self.breakpoints[-1][0]

    def F(self, t):
        ts = [b[0] for b in self.breakpoints]
        Fs = [b[1] for b in self.breakpoints]
        return np.interp(t, ts, Fs)

    def sample(self, per_leg: int = 2000) -> np.ndarray:
        """Uniform samples within each leg (fold neighborhoods resolved)."""
        pieces = []
        for (t0, _), (t1, _) in zip(self.breakpoints, self.breakpoints[1:]):
            pieces.append(np.linspace(t0, t1, per_leg + 1)[:-1])
        pieces.append(np.array([self.t_end]))
        return np.concatenate(pieces)


def reference_schedule() -> Schedule:
    """The reference hysteresis sweep: F rises from -2.25 to -1.0 over [0,1], mirrored descent."""
    return Schedule(((0.0, -2.25), (1.0, -1.0), (2.0, -2.25)))


@dataclass
class Jump:
    t: float
    F: float
    V_before: float
    V_after: float


@dataclass
class HysteresisTrace:
    t: np.ndarray
    F: np.ndarray
    V: np.ndarray
    branch_id: np.ndarray
    jumps: list[Jump] = field(default_factory=list)

    def loop_area(self) -> float:
        """Enclosed area of the (F, V) loop, oriented along the time path."""
        return float(np.trapezoid(self.V, self.F))


def _local_stable_roots(g_spline, dg_spline, center: float, radius: float,
                        v_scan: float, fine_step: float = 0.005):
    """Stable spline roots within ``radius`` of ``center``."""
    lo = max(center - radius, -v_scan)
    hi = min(center + radius, v_scan)
    if hi <= lo:
        return []
    grid = np.arange(lo, hi + fine_step / 2.0, fine_step)
    vals = g_spline(grid)
    roots = []
    for i in range(len(grid) - 1):
        if (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            v = brentq(g_spline, grid[i], grid[i + 1], xtol=1e-12)
            if dg_spline(v) > 0.0:   # dg/dV = c0 - Phi' > 0 <=> stable
                roots.append(v)
    return roots


def run_hysteresis(schedule: Schedule, beta: float, profile: StandingWaveProfile,
                   V_start: float | None = None, samples_per_leg: int = 2000,
                   capture_radius: float = 0.2, v_scan: float = 25.0,
                   relax_profile: StandingWaveProfile | None = None) -> HysteresisTrace:
    """Quasi-static continuation of the interface law along an F(t) sweep.

    At each sample the stable root nearest the previous velocity is followed
    (tracked on the spline table, then corrected against the exact solver).
    When no stable root survives within ``capture_radius`` the followed branch
    has folded: a jump is recorded and the landing branch is selected by
    relaxing the reduced dynamics seeded with the pre-jump kernel state (run
    on a coarse companion grid; the landing velocity is then re-polished on
    this profile's grid).

    If ``V_start`` is omitted it is chosen by relaxing the reduced dynamics
    from the unpolarized state U = 0 at F(t_start).
    """
    c0 = profile.c0
    table = get_phi_table(profile, v_max=v_scan, dv=0.02)
    if relax_profile is None:
        relax_profile = _companion_profile(profile)

    def g_spline_at(F):
        return (lambda v, _F=F: c0 * v - table.phi(v, beta) + _F)

    def dg_spline(v):
        return c0 - table.phi_prime(v, beta)

    def exact_correct(v, F):
        gv = c0 * v - phi_beta(v, beta, profile) + F
        slope = dg_spline(v)
        if slope != 0.0:
            v = v - gv / slope
        return v

    t_grid = schedule.sample(samples_per_leg)
    F_grid = np.asarray(schedule.F(t_grid), dtype=float)

    if V_start is None:
        _, _, vtraj = relax_reduced(float(F_grid[0]), beta, relax_profile)
        rs = sil_roots(F_grid[0], beta, profile, v_scan=v_scan)
        start = rs.nearest(float(vtraj[-1]))
        if start is None:
            raise RootScanError(f"no stable root at F(0)={F_grid[0]:.6g}")
        V_prev = start.V
    else:
        V_prev = float(V_start)
        rs = sil_roots(F_grid[0], beta, profile, v_scan=v_scan)
        start = rs.nearest(V_prev)
        if start is None or abs(start.V - V_prev) > capture_radius:
            raise ValueError("V_start is not a stable root at F(t_start)")
        V_prev = start.V

    Vs = np.empty_like(F_grid)
    branch = np.zeros(len(F_grid), dtype=int)
    jumps: list[Jump] = []
    branch_id = 0
    Vs[0] = V_prev

    for i in range(1, len(F_grid)):
        F = float(F_grid[i])
        g_sp = g_spline_at(F)
        local = _local_stable_roots(g_sp, dg_spline, V_prev, capture_radius, v_scan)
        if local:
            v = min(local, key=lambda r: abs(r - V_prev))
            v = exact_correct(v, F)
        else:
            # branch folded between samples: bisect in F to pin the fold, so
            # the recorded pre-jump state sits on the fold itself
            F_fold, V_fold = _refine_fold(float(F_grid[i - 1]), F, V_prev,
                                          g_spline_at, dg_spline,
                                          capture_radius, v_scan)
            # let the reduced dynamics pick the landing branch
            seed = solve_psi0(V_fold, beta, relax_profile).psi0
            _, _, vtraj = relax_reduced(F, beta, relax_profile, U_init=seed)
            rs = sil_roots(F, beta, profile, v_scan=v_scan)
            landed = rs.nearest(float(vtraj[-1]))
            if landed is None:
                raise RootScanError(f"no stable root at F={F:.6g} (t={t_grid[i]:.6g})")
            v = landed.V
            jumps.append(Jump(t=float(t_grid[i]), F=F_fold, V_before=V_fold,
                              V_after=v))
            branch_id += 1
        Vs[i] = v
        branch[i] = branch_id
        V_prev = v

    return HysteresisTrace(t=t_grid, F=F_grid, V=Vs, branch_id=branch, jumps=jumps)


def _refine_fold(F_ok: float, F_bad: float, V_ok: float, g_spline_at,
                 dg_spline, radius: float, v_scan: float,
                 tol: float = 1e-9):
    """Bisect in F between a captured and an uncaptured sample.

    Returns (F, V) of the last surviving root of the folding branch, which
    converges to the fold point itself.
    """
    for _ in range(60):
        if abs(F_bad - F_ok) <= tol * (1.0 + abs(F_bad)):
            break
        F_mid = 0.5 * (F_ok + F_bad)
        local = _local_stable_roots(g_spline_at(F_mid), dg_spline, V_ok,
                                    radius, v_scan)
        if local:
            V_ok = min(local, key=lambda r: abs(r - V_ok))
            F_ok = F_mid
        else:
            F_bad = F_mid
    return F_ok, V_ok


_COMPANION_CACHE: dict[str, StandingWaveProfile] = {}


def _companion_profile(profile: StandingWaveProfile,
                       n_points: int = 1001) -> StandingWaveProfile:
    """Coarse same-potential profile for the relax-based jump selection.

    The relaxation only has to identify which root the dynamics lands on
    (roots are separated by O(1) velocities), so a cheap grid suffices; the
    landing root itself is re-polished on the caller's grid.
    """
    if profile.n_points <= n_points:
        return profile
    key = f"{profile.potential.signature}:companion{n_points}"
    comp = _COMPANION_CACHE.get(key)
    if comp is None:
        comp = standing_wave(profile.potential, profile.half_width,
                             n_points, strict=False)
        _COMPANION_CACHE[key] = comp
    return comp
