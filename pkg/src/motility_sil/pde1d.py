"""1D phase-field model problem and the two-interface cell.

Single-interface mode integrates

    d(rho)/dt = rho_xx - W'(rho)/eps^2 - P rho_x + F(t)/eps
    d(P)/dt   = eps P_xx - P/eps - beta rho_x

on a truncated line with homogeneous flux for rho and zero endpoint values
for P.  Two-interface (cell) mode replaces F(t)/eps by the mass-conserving
Lagrange multiplier (the trapezoid mean of W'/eps^2 + P rho_x), which keeps
the discrete trapezoid mass exact because the Neumann Laplacian annihilates
the trapezoid weights.

Diffusion is implicit (one tridiagonal solve per field per step); reaction,
coupling, forcing and the -P/eps decay are explicit.  The interface is free
to travel arbitrarily far: when it drifts from the domain center the fields
are shifted by whole cells (the displaced tail is constant to rounding), and
positions are reported in the fixed lab frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .potentials import PotentialSpec, StandingWaveProfile, standing_wave

__all__ = [
    "Pde1dConfig",
    "CellConfig",
    "FieldState1D",
    "InterfaceTrack",
    "ResidualDecomposition",
    "Monitors1D",
    "Result1D",
    "CellResult",
    "simulate_1d",
    "simulate_two_interface_cell",
    "track_interface",
    "decompose_residual",
    "well_shift",
]

HARD_RHO_BOUNDS = (-0.5, 1.5)
BOUND_MONITOR_TOL = 1e-3


@dataclass
class FieldState1D:
    grid_x: np.ndarray
    rho: np.ndarray
    P: np.ndarray
    t: float
    eps: float
    beta: float

    @property
    def dx(self) -> float:
        return self.grid_x[1] - self.grid_x[0]


@dataclass
class InterfaceTrack:
    t: np.ndarray
    x_interface: np.ndarray
    V_est: np.ndarray
    F: np.ndarray


@dataclass
class Monitors1D:
    t: np.ndarray
    mass: np.ndarray
    rho_min: np.ndarray
    rho_max: np.ndarray
    bound_violation_fraction: np.ndarray
    energy: np.ndarray


@dataclass
class Result1D:
    track: InterfaceTrack
    monitors: Monitors1D
    state: FieldState1D
    snapshots: list[tuple[float, np.ndarray, np.ndarray]]
    dt: float
    recenter_shifts: int


@dataclass
class CellResult:
    t: np.ndarray
    x_back: np.ndarray
    x_front: np.ndarray
    V_cell: np.ndarray
    velocity: float          # mean over the final quarter of the run
    width_drift: float
    monitors: Monitors1D
    state: FieldState1D
    dt: float


@dataclass
class ResidualDecomposition:
    t: float
    y: np.ndarray
    u_eps: np.ndarray
    u_norm_L2: float
    orthogonality: float


@dataclass
class Pde1dConfig:
    eps: float
    beta: float
    potential: PotentialSpec
    F: object                        # scalar or callable F(t)
    t_end: float
    L: float = 1.0
    dx: float | None = None          # default eps/8
    dt: float | None = None          # default: auto (logged in the result)
    sample_dt: float | None = None   # default: t_end/2000
    ic_v: object = None              # perturbation v(y) added as eps*v
    ic_p: object = None              # initial P as p(y); None -> 0
    recenter: bool = True
    recenter_threshold: float = 0.2
    snapshot_every: int = 0          # in samples; 0 disables
    seed: int | None = None
    ic_noise: float = 0.0            # uniform noise amplitude on rho


@dataclass
class CellConfig:
    eps: float
    beta: float
    potential: PotentialSpec
    a: float                         # cell half-width
    t_end: float
    L: float | None = None           # default 4a
    dx: float | None = None
    dt: float | None = None
    sample_dt: float | None = None
    seed_amplitude: float = 1e-3     # symmetry-breaking seed on rho
    seed: int = 0
    recenter: bool = True
    snapshot_every: int = 0


class BoundViolation(RuntimeError):
    pass


class InterfaceLost(RuntimeError):
    pass


def well_shift(p: PotentialSpec, eps: float, F: float, well: float) -> float:
    """Quasi-equilibrium well displacement d solving W'(well + d) = eps*F.

    This is the instantaneous limit of the stiff well-relaxation ODE, valid
    because that ODE settles on the eps^2 timescale.  Newton from the linear
    estimate eps*F/W''(well); falls back to a bracketed solve if needed.
    """
    target = eps * F
    d = target / float(p.Wpp(well))
    for _ in range(50):
        r = float(p.Wp(well + d)) - target
        dr = float(p.Wpp(well + d))
        step = r / dr
        d -= step
        if abs(step) < 1e-15:
            return d
    lo, hi = -0.3, 0.3
    return brentq(lambda s: float(p.Wp(well + s)) - target, lo, hi, xtol=1e-15)


def track_interface(grid_x: np.ndarray, rho: np.ndarray,
                    refine: bool = True) -> float:
    """Location of the single rho = 1/2 crossing.

    Linear interpolation between the bracketing nodes, optionally refined by
    one Newton step on a local cubic fit through the four nearest nodes.
    """
    s = np.sign(rho - 0.5)
    cross = np.where(s[:-1] * s[1:] < 0)[0]
    exact = np.where(s == 0)[0]
    if len(exact) == 1 and len(cross) == 0:
        return float(grid_x[exact[0]])
    if len(cross) != 1:
        raise InterfaceLost(
            f"expected one rho=1/2 crossing, found {len(cross)}"
        )
    i = int(cross[0])
    dx = grid_x[1] - grid_x[0]
    x0 = grid_x[i] + dx * (0.5 - rho[i]) / (rho[i + 1] - rho[i])
    if not refine or i < 1 or i > len(rho) - 3:
        return float(x0)
    xs = grid_x[i - 1:i + 3]
    cs = np.polynomial.polynomial.polyfit(xs - grid_x[i], rho[i - 1:i + 3], 3)
    poly = np.polynomial.Polynomial(cs)
    dpoly = poly.deriv()
    x = x0 - grid_x[i]
    for _ in range(2):
        d = dpoly(x)
        if d == 0:
            break
        x -= (poly(x) - 0.5) / d
    x_ref = grid_x[i] + x
    if abs(x_ref - x0) > dx:
        return float(x0)   # ill-conditioned fit; keep the linear estimate
    return float(x_ref)


def _crossings(grid_x: np.ndarray, rho: np.ndarray) -> list[float]:
    s = np.sign(rho - 0.5)
    idx = np.where(s[:-1] * s[1:] < 0)[0]
    dx = grid_x[1] - grid_x[0]
    return [float(grid_x[i] + dx * (0.5 - rho[i]) / (rho[i + 1] - rho[i]))
            for i in idx]


def _smoothed_velocity(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Centered-difference velocity smoothed by a 5-sample moving average."""
    if len(t) < 2:
        return np.zeros_like(t)
    v = np.gradient(x, t)
    if len(v) >= 5:
        kernel = np.ones(5) / 5.0
        inner = np.convolve(v, kernel, mode="valid")
        v = np.concatenate([v[:2], inner, v[-2:]])
    return v


class _Stepper1D:
    """Semi-implicit machinery shared by both 1D modes.

    Diffusion is Crank-Nicolson (one tridiagonal solve per field per step);
    reaction, coupling, forcing and the P decay are explicit with
    Adams-Bashforth-2.  First order in dt would bias the front speed by
    ~O(dt / eps^2) because dt rides the stiff reaction scale; second order
    removes the bias without extra solves.  The AB2 history is rebuilt with
    one Euler step after a recentering shift.
    """

    def __init__(self, x, eps, beta, potential, dt, lagrange: bool):
        self.x = x
        self.n = len(x)
        self.dx = x[1] - x[0]
        self.eps = eps
        self.beta = beta
        self.p = potential
        self.lagrange = lagrange
        self.w = np.full(self.n, self.dx)
        self.w[0] = self.w[-1] = self.dx / 2.0
        self.wsum = self.w.sum()
        self._n_rho_prev = None
        self._n_P_prev = None
        self._factor(dt)

    def _factor(self, dt):
        n, dx, eps = self.n, self.dx, self.eps
        r = 0.5 * dt / dx**2
        ab = np.zeros((3, n))
        ab[0, 1:] = -r
        ab[1, :] = 1.0 + 2.0 * r
        ab[2, :-1] = -r
        # mirror ghosts give the zero-flux condition
        ab[0, 1] = -2.0 * r
        ab[2, -2] = -2.0 * r
        self.ab_rho = ab
        m = n - 2
        rp = 0.5 * dt * eps / dx**2
        abp = np.zeros((3, m))
        abp[0, 1:] = -rp
        abp[1, :] = 1.0 + 2.0 * rp
        abp[2, :-1] = -rp
        self.ab_P = abp
        self.dt = dt

    def grad(self, f):
        g = np.zeros(self.n)
        g[1:-1] = (f[2:] - f[:-2]) / (2.0 * self.dx)
        return g

    def _lap_neumann(self, f):
        out = np.empty(self.n)
        out[1:-1] = f[2:] - 2.0 * f[1:-1] + f[:-2]
        out[0] = 2.0 * (f[1] - f[0])
        out[-1] = 2.0 * (f[-2] - f[-1])
        return out / self.dx**2

    def _lap_dirichlet(self, f):
        ext = np.concatenate([[0.0], f, [0.0]])
        return (ext[2:] - 2.0 * ext[1:-1] + ext[:-2]) / self.dx**2

    def step(self, rho, P, forcing_per_eps):
        """One step; ``forcing_per_eps`` is F(t)/eps, ignored in Lagrange mode."""
        eps, dt = self.eps, self.dt
        g = self.grad(rho)
        react = self.p.Wp(rho) / eps**2
        if self.lagrange:
            lam = float(np.dot(self.w, react + P * g)) / self.wsum
            n_rho = -react - P * g + lam
        else:
            n_rho = -react - P * g + forcing_per_eps
        n_P = -P / eps - self.beta * g

        if self._n_rho_prev is None:
            ex_rho, ex_P = n_rho, n_P
        else:
            ex_rho = 1.5 * n_rho - 0.5 * self._n_rho_prev
            ex_P = 1.5 * n_P - 0.5 * self._n_P_prev
        self._n_rho_prev = n_rho
        self._n_P_prev = n_P

        rhs = rho + 0.5 * dt * self._lap_neumann(rho) + dt * ex_rho
        rho_new = solve_banded((1, 1), self.ab_rho, rhs)
        rhs_P = P[1:-1] + 0.5 * dt * eps * self._lap_dirichlet(P[1:-1]) \
            + dt * ex_P[1:-1]
        P_new = np.zeros(self.n)
        P_new[1:-1] = solve_banded((1, 1), self.ab_P, rhs_P)
        return rho_new, P_new

    def shift(self, rho, P, cells: int):
        """Translate fields by whole cells; constant tails pad the inflow edge."""
        rho = np.roll(rho, -cells)
        P = np.roll(P, -cells)
        if cells > 0:
            rho[-cells:] = rho[-cells - 1]
            P[-cells:] = P[-cells - 1]
        elif cells < 0:
            rho[:-cells] = rho[-cells]
            P[:-cells] = P[-cells]
        self._n_rho_prev = None   # restart multistep history after a shift
        self._n_P_prev = None
        return rho, P

    def energy(self, rho):
        """(eps/2) int rho_x^2 + (1/eps) int W(rho); equals ~c0 for a front."""
        g = self.grad(rho)
        return float(np.dot(self.w, 0.5 * self.eps * g**2
                            + self.p.W(rho) / self.eps))


def _auto_dt(eps, dx, beta, dtheta_max, safety=1.0):
    """Stable step: reaction bound, P-equation bound, and an advection guard
    for the explicit centered coupling (dt <= 1/|P|_max^2 with unit diffusion).
    """
    p_max = max(beta * dtheta_max, 1e-12)
    return safety * min(0.2 * eps**2, 0.25 * dx**2 / eps, 1.0 / p_max**2)


def _monitor_arrays(records):
    keys = ["t", "mass", "rho_min", "rho_max", "bound_violation_fraction", "energy"]
    cols = {k: np.array([r[i] for r in records]) for i, k in enumerate(keys)}
    return Monitors1D(**cols)


def _as_callable_F(F):
    return F if callable(F) else (lambda t, _F=float(F): _F)


def simulate_1d(cfg: Pde1dConfig,
                profile: StandingWaveProfile | None = None) -> Result1D:
    """Run the single-interface model problem; see the module docstring."""
    if profile is None:
        profile = standing_wave(cfg.potential)
    eps, beta = cfg.eps, cfg.beta
    dx = cfg.dx if cfg.dx is not None else eps / 8.0
    if dx > eps / 8.0 + 1e-15:
        raise ValueError(f"dx={dx:.3g} violates dx <= eps/8 = {eps / 8.0:.3g}")
    x = np.arange(-cfg.L, cfg.L + dx / 2.0, dx)
    F_of_t = _as_callable_F(cfg.F)

    y = x / eps
    rho = np.asarray(profile.theta0_at(y), dtype=float)
    if cfg.ic_v is not None:
        rho = rho + eps * np.asarray(cfg.ic_v(y), dtype=float)
    if cfg.ic_noise > 0.0:
        rng = np.random.default_rng(cfg.seed)
        rho = rho + cfg.ic_noise * (2.0 * rng.random(len(x)) - 1.0)
    P = (np.zeros_like(x) if cfg.ic_p is None
         else np.asarray(cfg.ic_p(y), dtype=float))

    dt = cfg.dt if cfg.dt is not None else _auto_dt(eps, dx, beta,
                                                    float(np.max(profile.dtheta0)))
    for attempt in range(2):
        try:
            return _run_single(cfg, profile, x, rho.copy(), P.copy(), dt, F_of_t)
        except BoundViolation:
            if attempt == 1 or cfg.dt is not None:
                raise
            dt *= 0.5   # auto-refine once, then give up
    raise AssertionError("unreachable")


def _run_single(cfg, profile, x, rho, P, dt, F_of_t) -> Result1D:
    eps, beta = cfg.eps, cfg.beta
    st = _Stepper1D(x, eps, beta, cfg.potential, dt, lagrange=False)
    nsteps = int(round(cfg.t_end / dt))
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else cfg.t_end / 2000.0
    sample_every = max(1, int(round(sample_dt / dt)))
    bound_hi = 1.0 + eps**0.25 + BOUND_MONITOR_TOL
    bound_lo = -(eps**0.25) - BOUND_MONITOR_TOL

    offset = 0.0
    shifts = 0
    ts, xs, Fs = [], [], []
    monitors = []
    snapshots = []
    t = 0.0
    n_sample = 0
    for k in range(nsteps):
        rho, P = st.step(rho, P, F_of_t(t) / eps)
        t += dt
        if (k + 1) % sample_every == 0 or k == nsteps - 1:
            if not np.isfinite(rho).all() or rho.min() < HARD_RHO_BOUNDS[0] \
                    or rho.max() > HARD_RHO_BOUNDS[1]:
                raise BoundViolation(
                    f"rho left {HARD_RHO_BOUNDS} at t={t:.6g} "
                    f"(range [{rho.min():.3g}, {rho.max():.3g}])"
                )
            xi = track_interface(x, rho)
            ts.append(t)
            xs.append(xi + offset)
            Fs.append(F_of_t(t))
            frac = float(np.mean((rho < bound_lo) | (rho > bound_hi)))
            monitors.append((t, float(np.dot(st.w, rho)), float(rho.min()),
                             float(rho.max()), frac, st.energy(rho)))
            n_sample += 1
            if cfg.snapshot_every and n_sample % cfg.snapshot_every == 0:
                snapshots.append((t, rho.copy(), P.copy()))
            if cfg.recenter and abs(xi) > cfg.recenter_threshold:
                cells = int(round(xi / st.dx))
                if cells != 0:
                    rho, P = st.shift(rho, P, cells)
                    offset += cells * st.dx
                    shifts += 1
            elif not cfg.recenter and abs(xi) > cfg.L - 5.0 * eps:
                raise InterfaceLost(
                    f"interface at x={xi:.4g} is within 5 eps of the boundary"
                )

    ts = np.asarray(ts)
    xs = np.asarray(xs)
    track = InterfaceTrack(t=ts, x_interface=xs,
                           V_est=_smoothed_velocity(ts, xs), F=np.asarray(Fs))
    state = FieldState1D(grid_x=x, rho=rho, P=P, t=t, eps=eps, beta=beta)
    return Result1D(track=track, monitors=_monitor_arrays(monitors), state=state,
                    snapshots=snapshots, dt=dt, recenter_shifts=shifts)


def decompose_residual(state: FieldState1D, x_interface: float,
                       profile: StandingWaveProfile, F: float) -> ResidualDecomposition:
    """Residual u_eps of the interface expansion, orthogonal to theta0'.

    Samples (rho - theta0(y) - eps psi(y)) / eps at the grid nodes mapped to
    y = (x - x_interface)/eps, with psi the quasi-equilibrium well shift
    blended by theta0, then projects out the theta0' component.
    """
    eps = state.eps
    p = profile.potential
    y = (state.grid_x - x_interface) / eps
    theta = profile.theta0_at(y)
    d_minus = well_shift(p, eps, F, 0.0)
    d_plus = well_shift(p, eps, F, 1.0)
    psi = (d_minus + theta * (d_plus - d_minus)) / eps
    u = (state.rho - theta - eps * psi) / eps
    dtheta = np.sqrt(np.maximum(2.0 * p.W(theta), 0.0))
    dy = state.dx / eps
    denom = np.trapezoid(dtheta**2, dx=dy)
    coeff = np.trapezoid(u * dtheta, dx=dy) / denom
    u = u - coeff * dtheta
    ortho = float(np.trapezoid(u * dtheta, dx=dy))
    norm = float(np.sqrt(np.trapezoid(u**2, dx=dy)))
    return ResidualDecomposition(t=state.t, y=y, u_eps=u, u_norm_L2=norm,
                                 orthogonality=ortho)


def simulate_two_interface_cell(cfg: CellConfig,
                                profile: StandingWaveProfile | None = None) -> CellResult:
    """Evolve the two-interface cell with the mass-conserving multiplier.

    Starts from the product profile theta0((x+a)/eps) theta0((a-x)/eps), with
    a seeded symmetry-breaking bump so that supercritical runs can leave the
    (numerically symmetric) standing state.  Reports the cell velocity
    averaged over the final quarter of the run and the width drift.
    """
    if profile is None:
        profile = standing_wave(cfg.potential)
    eps, beta, a = cfg.eps, cfg.beta, cfg.a
    if a < 20.0 * eps:
        raise ValueError(f"cell half-width a={a} must be >= 20 eps = {20 * eps}")
    L = cfg.L if cfg.L is not None else 4.0 * a
    if L < 3.0 * a:
        raise ValueError("domain must satisfy L >= 3a")
    dx = cfg.dx if cfg.dx is not None else eps / 8.0
    if dx > eps / 8.0 + 1e-15:
        raise ValueError(f"dx={dx:.3g} violates dx <= eps/8")
    x = np.arange(-L, L + dx / 2.0, dx)

    rho = np.asarray(profile.theta0_at((x + a) / eps)
                     * profile.theta0_at((a - x) / eps), dtype=float)
    if cfg.seed_amplitude > 0.0:
        rng = np.random.default_rng(cfg.seed)
        x0 = (0.2 + 0.3 * rng.random()) * a
        bump = np.exp(-((x - x0) / (0.2 * a)) ** 2)
        rho = rho + cfg.seed_amplitude * bump * 4.0 * rho * (1.0 - rho)
    P = np.zeros_like(x)

    dt = cfg.dt if cfg.dt is not None else _auto_dt(eps, dx, beta,
                                                    float(np.max(profile.dtheta0)))
    st = _Stepper1D(x, eps, beta, cfg.potential, dt, lagrange=True)
    nsteps = int(round(cfg.t_end / dt))
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else cfg.t_end / 2000.0
    sample_every = max(1, int(round(sample_dt / dt)))
    bound_hi = 1.0 + eps**0.25 + BOUND_MONITOR_TOL
    bound_lo = -(eps**0.25) - BOUND_MONITOR_TOL

    offset = 0.0
    ts, backs, fronts = [], [], []
    monitors = []
    t = 0.0
    for k in range(nsteps):
        rho, P = st.step(rho, P, 0.0)
        t += dt
        if (k + 1) % sample_every == 0 or k == nsteps - 1:
            if not np.isfinite(rho).all() or rho.min() < HARD_RHO_BOUNDS[0] \
                    or rho.max() > HARD_RHO_BOUNDS[1]:
                raise BoundViolation(f"rho left {HARD_RHO_BOUNDS} at t={t:.6g}")
            cr = _crossings(x, rho)
            if len(cr) != 2:
                raise InterfaceLost(
                    f"expected 2 interfaces, found {len(cr)} at t={t:.6g}"
                )
            xb, xf = cr
            if xf - xb < 10.0 * eps:
                raise InterfaceLost(
                    f"interfaces merging: width {xf - xb:.4g} < 10 eps at t={t:.6g}"
                )
            ts.append(t)
            backs.append(xb + offset)
            fronts.append(xf + offset)
            frac = float(np.mean((rho < bound_lo) | (rho > bound_hi)))
            monitors.append((t, float(np.dot(st.w, rho)), float(rho.min()),
                             float(rho.max()), frac, st.energy(rho)))
            center = 0.5 * (xb + xf)
            if cfg.recenter and abs(center) > 0.15 * L:
                cells = int(round(center / st.dx))
                if cells != 0:
                    rho, P = st.shift(rho, P, cells)
                    offset += cells * st.dx
            if max(abs(xb), abs(xf)) > L - 5.0 * eps:
                raise InterfaceLost("cell interface reached the domain boundary")

    ts = np.asarray(ts)
    backs = np.asarray(backs)
    fronts = np.asarray(fronts)
    center = 0.5 * (backs + fronts)
    v_back = _smoothed_velocity(ts, backs)
    v_front = _smoothed_velocity(ts, fronts)
    v_cell = 0.5 * (v_back + v_front)
    q = max(1, len(v_cell) // 4)
    velocity = float(np.mean(v_cell[-q:]))
    width_drift = float((fronts[-1] - backs[-1]) - (fronts[0] - backs[0]))
    state = FieldState1D(grid_x=x, rho=rho, P=P, t=t, eps=eps, beta=beta)
    return CellResult(t=ts, x_back=backs, x_front=fronts, V_cell=v_cell,
                      velocity=velocity, width_drift=width_drift,
                      monitors=_monitor_arrays(monitors), state=state, dt=dt)
