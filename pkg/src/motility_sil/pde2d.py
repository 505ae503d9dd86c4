"""Full 2D phase-field system with the volume-preserving multiplier.

    d(rho)/dt = Lap(rho) - W'(rho)/eps^2 - P . grad(rho) + lambda(t)
    d(P)/dt   = eps Lap(P) - P/eps - beta grad(rho)

on a rectangle with zero-flux rho and zero-value P.  The multiplier
lambda(t) is the domain mean of W'/eps^2 + P . grad(rho) (midpoint rule on
the cell-centered grid), which makes the discrete mean of rho exactly
conserved: the mirror-ghost Neumann Laplacian is symmetric with zero row
sums, so the implicit solve preserves the plain cell sum.

Diffusion is implicit through factorized five-point solves; the stiff -P/eps
decay is integrated exactly (with the -beta grad(rho) source frozen over the
step), coupling and reaction are explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from skimage import measure

from .potentials import PotentialSpec, StandingWaveProfile, standing_wave

__all__ = [
    "Pde2dConfig",
    "FieldState2D",
    "Contour",
    "Monitors2D",
    "Result2D",
    "lagrange_multiplier",
    "energies",
    "extract_contour",
    "simulate_2d",
    "radial_ic",
    "write_snapshot",
    "read_snapshot",
]

HARD_RHO_BOUNDS = (-0.5, 1.5)


@dataclass
class FieldState2D:
    """Cell-centered fields on [0,Lx] x [0,Ly]; rho[iy, ix], P[*][iy, ix]."""

    x: np.ndarray           # cell-center coordinates, length nx
    y: np.ndarray           # cell-center coordinates, length ny
    rho: np.ndarray
    Px: np.ndarray
    Py: np.ndarray
    t: float
    eps: float
    beta: float
    potential: PotentialSpec | None = None

    @property
    def dx(self) -> float:
        return self.x[1] - self.x[0]

    @property
    def dy(self) -> float:
        return self.y[1] - self.y[0]


@dataclass
class Contour:
    points: np.ndarray       # (N, 2) (x, y) vertices, counterclockwise
    closed: bool
    enclosed_area: float     # nan for open polylines
    perimeter: float


@dataclass
class Monitors2D:
    t: np.ndarray
    mass: np.ndarray
    E: np.ndarray
    F: np.ndarray
    rho_min: np.ndarray
    rho_max: np.ndarray
    lam: np.ndarray
    p_max: np.ndarray


@dataclass
class Result2D:
    monitors: Monitors2D
    contours: list[tuple[float, Contour]]
    state: FieldState2D
    dt: float


@dataclass
class Pde2dConfig:
    eps: float = 0.04
    beta: float = 10.0
    potential: PotentialSpec = None
    n: int = 256                    # cells per direction
    Lx: float = 1.0
    Ly: float = 1.0
    r0: float = 0.25                # radius of the initial circular cell
    t_end: float = 0.05
    dt: float | None = None
    sample_every: int = 1           # monitor stride, in steps
    contour_every: int = 0          # contour stride, in samples; 0 disables
    ic_rho: np.ndarray | None = None
    # required cell clearance from the walls, in eps units; the P boundary
    # layer decays on scale eps, so a few eps suffice (the desk-scale default
    # r0 = 0.25 on the unit square leaves 0.25 = 6.25 eps of clearance)
    boundary_margin: float = 5.0


class BoundViolation(RuntimeError):
    pass


def _grad(f: np.ndarray, dx: float, dy: float):
    """Centered gradient with mirror (zero-flux) ghosts."""
    fp = np.pad(f, 1, mode="edge")
    gx = (fp[1:-1, 2:] - fp[1:-1, :-2]) / (2.0 * dx)
    gy = (fp[2:, 1:-1] - fp[:-2, 1:-1]) / (2.0 * dy)
    return gx, gy


def lagrange_multiplier(state: FieldState2D) -> float:
    """Domain mean of W'(rho)/eps^2 + P . grad(rho) (midpoint rule)."""
    if state.potential is None:
        raise ValueError("state carries no potential")
    gx, gy = _grad(state.rho, state.dx, state.dy)
    integrand = (state.potential.Wp(state.rho) / state.eps**2
                 + state.Px * gx + state.Py * gy)
    return float(np.mean(integrand))


def energies(state: FieldState2D) -> tuple[float, float]:
    """(E, F): interface energy and orientation-field energy, midpoint rule."""
    if state.potential is None:
        raise ValueError("state carries no potential")
    eps = state.eps
    cell = state.dx * state.dy
    gx, gy = _grad(state.rho, state.dx, state.dy)
    E = cell * float(np.sum(0.5 * eps * (gx**2 + gy**2)
                            + state.potential.W(state.rho) / eps))
    P2 = state.Px**2 + state.Py**2
    F = cell * float(np.sum(P2 + P2**2))
    return E, F


def extract_contour(state_or_rho, x=None, y=None) -> Contour:
    """The rho = 1/2 level set by marching squares with linear interpolation.

    Accepts a FieldState2D or a raw (rho, x, y) triple.  Exactly one level-set
    component must exist.  Closed contours are returned counterclockwise with
    the shoelace area; open polylines get area nan.
    """
    if isinstance(state_or_rho, FieldState2D):
        rho, x, y = state_or_rho.rho, state_or_rho.x, state_or_rho.y
    else:
        rho = state_or_rho
    paths = measure.find_contours(rho, 0.5)
    if len(paths) != 1:
        raise ValueError(f"expected one rho=1/2 component, found {len(paths)}")
    rc = paths[0]
    pts = np.column_stack([np.interp(rc[:, 1], np.arange(len(x)), x),
                           np.interp(rc[:, 0], np.arange(len(y)), y)])
    closed = bool(np.allclose(pts[0], pts[-1]))
    if closed:
        pts = pts[:-1]
        xs, ys = pts[:, 0], pts[:, 1]
        area = 0.5 * float(np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys))
        if area < 0.0:
            pts = pts[::-1].copy()
            area = -area
        per = float(np.sum(np.linalg.norm(np.diff(
            np.vstack([pts, pts[:1]]), axis=0), axis=1)))
        return Contour(points=pts, closed=True, enclosed_area=area, perimeter=per)
    per = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
    return Contour(points=pts, closed=False, enclosed_area=float("nan"),
                   perimeter=per)


def radial_ic(profile: StandingWaveProfile, eps: float, x, y,
              r0: float, center=None) -> np.ndarray:
    """rho = theta0((r0 - r)/eps): 1 inside the disk, 0 outside."""
    if center is None:
        center = (0.5 * (x[0] + x[-1]), 0.5 * (y[0] + y[-1]))
    X, Y = np.meshgrid(x, y)
    r = np.hypot(X - center[0], Y - center[1])
    return np.asarray(profile.theta0_at((r0 - r) / eps), dtype=float)


def _neumann_laplacian(nx: int, ny: int, dx: float, dy: float) -> sp.csc_matrix:
    ex = np.ones(nx)
    ey = np.ones(ny)
    Tx = sp.diags([ex[:-1], -2.0 * ex, ex[:-1]], [-1, 0, 1], format="lil")
    Tx[0, 0] = -1.0
    Tx[-1, -1] = -1.0
    Ty = sp.diags([ey[:-1], -2.0 * ey, ey[:-1]], [-1, 0, 1], format="lil")
    Ty[0, 0] = -1.0
    Ty[-1, -1] = -1.0
    Ix = sp.identity(nx)
    Iy = sp.identity(ny)
    return (sp.kron(Iy, Tx.tocsr()) / dx**2
            + sp.kron(Ty.tocsr(), Ix) / dy**2).tocsc()


def _dirichlet_laplacian(nx: int, ny: int, dx: float, dy: float) -> sp.csc_matrix:
    # ghost = -cell puts the zero value on the boundary face
    ex = np.ones(nx)
    ey = np.ones(ny)
    Tx = sp.diags([ex[:-1], -2.0 * ex, ex[:-1]], [-1, 0, 1], format="lil")
    Tx[0, 0] = -3.0
    Tx[-1, -1] = -3.0
    Ty = sp.diags([ey[:-1], -2.0 * ey, ey[:-1]], [-1, 0, 1], format="lil")
    Ty[0, 0] = -3.0
    Ty[-1, -1] = -3.0
    Ix = sp.identity(nx)
    Iy = sp.identity(ny)
    return (sp.kron(Iy, Tx.tocsr()) / dx**2
            + sp.kron(Ty.tocsr(), Ix) / dy**2).tocsc()


def simulate_2d(cfg: Pde2dConfig,
                profile: StandingWaveProfile | None = None) -> Result2D:
    """Run the 2D system; see the module docstring for the scheme."""
    if cfg.potential is None:
        raise ValueError("config needs a potential")
    if profile is None:
        profile = standing_wave(cfg.potential)
    eps, beta = cfg.eps, cfg.beta
    nx = ny = cfg.n
    dx = cfg.Lx / nx
    dy = cfg.Ly / ny
    if max(dx, dy) > eps / 6.0 + 1e-15:
        raise ValueError(f"grid spacing {max(dx, dy):.4g} violates dx <= eps/6")
    x = (np.arange(nx) + 0.5) * dx
    y = (np.arange(ny) + 0.5) * dy

    if cfg.ic_rho is not None:
        rho = np.array(cfg.ic_rho, dtype=float)
        if rho.shape != (ny, nx):
            raise ValueError("ic_rho has the wrong shape")
    else:
        if cfg.r0 > min(cfg.Lx, cfg.Ly) / 2.0 - cfg.boundary_margin * eps:
            raise ValueError("initial cell too close to the boundary")
        rho = radial_ic(profile, eps, x, y, cfg.r0)
    Px = np.zeros_like(rho)
    Py = np.zeros_like(rho)

    p_max = max(beta * float(np.max(profile.dtheta0)), 1e-12)
    dt = cfg.dt if cfg.dt is not None else min(0.2 * eps**2, 1.0 / p_max**2)

    LN = _neumann_laplacian(nx, ny, dx, dy)
    LD = _dirichlet_laplacian(nx, ny, dx, dy)
    I = sp.identity(nx * ny, format="csc")
    solve_rho = splu((I - dt * LN).tocsc()).solve
    solve_P = splu((I - dt * eps * LD).tocsc()).solve

    pot = cfg.potential
    decay = np.exp(-dt / eps)
    nsteps = int(round(cfg.t_end / dt))
    monitors = []
    contours: list[tuple[float, Contour]] = []
    t = 0.0

    def record(t_now, lam_now):
        st = FieldState2D(x=x, y=y, rho=rho, Px=Px, Py=Py, t=t_now,
                          eps=eps, beta=beta, potential=pot)
        E, Fen = energies(st)
        p_max = float(np.sqrt(np.max(Px**2 + Py**2)))
        monitors.append((t_now, float(np.mean(rho)) * cfg.Lx * cfg.Ly, E, Fen,
                         float(rho.min()), float(rho.max()), lam_now, p_max))
        return st

    state = record(0.0, lagrange_multiplier_of(rho, Px, Py, pot, eps, dx, dy))
    if cfg.contour_every:
        contours.append((0.0, _checked_contour(state, cfg)))

    n_sampled = 0
    for k in range(nsteps):
        gx, gy = _grad(rho, dx, dy)
        react = pot.Wp(rho) / eps**2
        coupling = Px * gx + Py * gy
        lam = float(np.mean(react + coupling))
        rhs = rho + dt * (-react - coupling + lam)
        rho = solve_rho(rhs.ravel()).reshape(ny, nx)
        # exact integration of dP/dt = -P/eps - beta g over the step
        src = 1.0 - decay
        Px = (decay * Px - eps * src * beta * gx)
        Py = (decay * Py - eps * src * beta * gy)
        Px = solve_P(Px.ravel()).reshape(ny, nx)
        Py = solve_P(Py.ravel()).reshape(ny, nx)
        t += dt
        if (k + 1) % cfg.sample_every == 0 or k == nsteps - 1:
            if not np.isfinite(rho).all() or rho.min() < HARD_RHO_BOUNDS[0] \
                    or rho.max() > HARD_RHO_BOUNDS[1]:
                raise BoundViolation(f"rho left {HARD_RHO_BOUNDS} at t={t:.6g}")
            state = record(t, lam)
            n_sampled += 1
            if cfg.contour_every and n_sampled % cfg.contour_every == 0:
                contours.append((t, _checked_contour(state, cfg)))

    keys = ["t", "mass", "E", "F", "rho_min", "rho_max", "lam", "p_max"]
    cols = {kk: np.array([m[i] for m in monitors]) for i, kk in enumerate(keys)}
    return Result2D(monitors=Monitors2D(**cols), contours=contours,
                    state=state, dt=dt)


def lagrange_multiplier_of(rho, Px, Py, potential, eps, dx, dy) -> float:
    gx, gy = _grad(rho, dx, dy)
    return float(np.mean(potential.Wp(rho) / eps**2 + Px * gx + Py * gy))


def _checked_contour(state: FieldState2D, cfg: Pde2dConfig) -> Contour:
    c = extract_contour(state)
    margin = cfg.boundary_margin * cfg.eps
    xs, ys = c.points[:, 0], c.points[:, 1]
    if xs.min() < margin or xs.max() > cfg.Lx - margin \
            or ys.min() < margin or ys.max() > cfg.Ly - margin:
        raise RuntimeError("contour reached the domain boundary margin")
    return c


# --- flat binary snapshots with a plain-text header ------------------------

_SNAPSHOT_MAGIC = "motility-sil field snapshot v1"


def write_snapshot(path, state: FieldState2D) -> None:
    header = (
        f"{_SNAPSHOT_MAGIC}\n"
        f"nx={len(state.x)} ny={len(state.y)}\n"
        f"dx={float(state.dx)!r} dy={float(state.dy)!r}\n"
        f"x0={float(state.x[0])!r} y0={float(state.y[0])!r}\n"
        f"t={float(state.t)!r} eps={float(state.eps)!r} beta={float(state.beta)!r}\n"
        f"arrays=rho,Px,Py dtype=float64 order=C\n"
        f"END_HEADER\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(state.rho, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.Px, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.Py, dtype="<f8").tobytes())


def read_snapshot(path) -> FieldState2D:
    with open(path, "rb") as fh:
        lines = []
        while True:
            line = fh.readline().decode("ascii").rstrip("\n")
            if line == "END_HEADER":
                break
            lines.append(line)
        if not lines or lines[0] != _SNAPSHOT_MAGIC:
            raise ValueError(f"{path} is not a field snapshot")
        meta = {}
        for line in lines[1:]:
            for tok in line.split():
                k, v = tok.split("=", 1)
                meta[k] = v
        nx, ny = int(meta["nx"]), int(meta["ny"])
        dx, dy = float(meta["dx"]), float(meta["dy"])
        x0, y0 = float(meta["x0"]), float(meta["y0"])
        raw = fh.read()
    arr = np.frombuffer(raw, dtype="<f8")
    if arr.size != 3 * nx * ny:
        raise ValueError("snapshot payload size mismatch")
    rho, Px, Py = (arr[i * nx * ny:(i + 1) * nx * ny].reshape(ny, nx).copy()
                   for i in range(3))
    x = x0 + np.arange(nx) * dx
    y = y0 + np.arange(ny) * dy
    return FieldState2D(x=x, y=y, rho=rho, Px=Px, Py=Py, t=float(meta["t"]),
                        eps=float(meta["eps"]), beta=float(meta["beta"]))
