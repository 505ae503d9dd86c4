"""Closed-curve evolution under V = kappa + Phi_beta(V)/c0 - lambda(t).

The curve is a uniformly resampled closed polyline, positively oriented,
moving along its inward normal.  lambda(t) is the arclength mean of
kappa + Phi_beta(V)/c0, which enforces the volume-preservation condition
(the arclength integral of V vanishes).  With beta = 0 the law reduces to
volume-preserving curvature flow, V = kappa - mean(kappa).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .kernel import PhiTable, get_phi_table
from .potentials import StandingWaveProfile

__all__ = [
    "CurveState",
    "curvature_and_normals",
    "solve_nodal_velocities",
    "evolve_curve",
    "resample_uniform",
    "polygon_area",
    "polygon_perimeter",
    "make_circle",
    "make_ellipse",
    "SelfIntersectionError",
]

log = logging.getLogger(__name__)


class SelfIntersectionError(RuntimeError):
    def __init__(self, msg, nodes):
        super().__init__(msg)
        self.nodes = nodes


@dataclass(frozen=True)
class CurveState:
    """Closed polyline (N, 2), counterclockwise, plus the interface response."""

    nodes: np.ndarray
    t: float
    beta: float
    c0: float
    phi_table: PhiTable | None      # None is the beta = 0 (pure curvature) case
    V: np.ndarray | None = None     # nodal velocities of the last accepted step
    lam: float = 0.0


def make_circle(radius: float, n_nodes: int, center=(0.0, 0.0)) -> np.ndarray:
    th = np.linspace(0.0, 2.0 * np.pi, n_nodes, endpoint=False)
    return np.column_stack([center[0] + radius * np.cos(th),
                            center[1] + radius * np.sin(th)])


def make_ellipse(ax_a: float, ax_b: float, n_nodes: int,
                 center=(0.0, 0.0)) -> np.ndarray:
    th = np.linspace(0.0, 2.0 * np.pi, n_nodes, endpoint=False)
    pts = np.column_stack([center[0] + ax_a * np.cos(th),
                           center[1] + ax_b * np.sin(th)])
    return resample_uniform(pts, n_nodes)


def polygon_area(nodes: np.ndarray) -> float:
    x, y = nodes[:, 0], nodes[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_perimeter(nodes: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.roll(nodes, -1, axis=0) - nodes, axis=1)))


def _edge_lengths(nodes: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.roll(nodes, -1, axis=0) - nodes, axis=1)


def _node_weights(nodes: np.ndarray) -> np.ndarray:
    """Arclength weight per node: half of the two adjacent edges."""
    e = _edge_lengths(nodes)
    return 0.5 * (e + np.roll(e, 1))


def resample_uniform(nodes: np.ndarray, n_out: int | None = None) -> np.ndarray:
    """Uniform-arclength resampling through a periodic cubic interpolant."""
    if n_out is None:
        n_out = len(nodes)
    closed = np.vstack([nodes, nodes[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    sx = CubicSpline(s, closed[:, 0], bc_type="periodic")
    sy = CubicSpline(s, closed[:, 1], bc_type="periodic")
    s_new = np.linspace(0.0, total, n_out, endpoint=False)
    return np.column_stack([sx(s_new), sy(s_new)])


def curvature_and_normals(nodes: np.ndarray):
    """Signed curvature and inward unit normal per node.

    Curvature from the circumscribed circle of each node triple (second-order
    on smooth curves); for a counterclockwise circle of radius R this gives
    kappa = +1/R with the normal pointing at the center, so positive V moves
    the curve inward.
    """
    if len(nodes) < 16:
        raise ValueError("need at least 16 nodes")
    prev = np.roll(nodes, 1, axis=0)
    nxt = np.roll(nodes, -1, axis=0)
    u = nodes - prev
    v = nxt - nodes
    w = nxt - prev
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    a = np.linalg.norm(u, axis=1)
    b = np.linalg.norm(v, axis=1)
    c = np.linalg.norm(w, axis=1)
    denom = a * b * c
    kappa = np.where(np.abs(cross) < 1e-14, 0.0,
                     2.0 * cross / np.where(denom == 0.0, 1.0, denom))
    tx = w[:, 0] / np.where(c == 0.0, 1.0, c)
    ty = w[:, 1] / np.where(c == 0.0, 1.0, c)
    normals = np.column_stack([-ty, tx])   # inward for counterclockwise curves
    return kappa, normals


def solve_nodal_velocities(curve: CurveState, kappa: np.ndarray,
                           max_iter: int = 200, tol: float = 1e-10,
                           capture_radius: float = 0.5):
    """Solve V_i = kappa_i + Phi_beta(V_i)/c0 - lambda jointly with lambda.

    Damped fixed point: lambda is updated to the arclength mean of
    kappa + Phi_beta(V)/c0, then each nodal scalar equation is re-solved on
    the branch nearest the previous V.  The final additive correction that
    pins the arclength mean of V to zero is absorbed into lambda.  With
    beta = 0 this is the closed form V = kappa - mean(kappa).
    """
    w = _node_weights(curve.nodes)
    wsum = w.sum()
    beta, c0 = curve.beta, curve.c0

    if curve.phi_table is None or beta == 0.0:
        lam = float(np.dot(w, kappa) / wsum)
        return kappa - lam, lam

    table = curve.phi_table
    V = np.array(curve.V, copy=True) if curve.V is not None \
        else np.zeros(len(kappa))
    lam = curve.lam

    def nodal_residual(v, k_i, lam_now):
        return v - k_i - table.phi(v, beta) / c0 + lam_now

    for it in range(max_iter):
        lam_new = float(np.dot(w, kappa + table.phi(V, beta) / c0) / wsum)
        lam = 0.5 * (lam + lam_new) if it else lam_new
        V_new = np.empty_like(V)
        for i, (k_i, v_prev) in enumerate(zip(kappa, V)):
            V_new[i] = _solve_branch(nodal_residual, k_i, lam, v_prev,
                                     capture_radius)
        resid = np.max(np.abs(nodal_residual(V_new, kappa, lam)))
        mean_v = abs(float(np.dot(w, V_new) / wsum))
        V = V_new
        if resid < tol and mean_v < tol:
            break
    else:
        worst = int(np.argmax(np.abs(nodal_residual(V, kappa, lam))))
        raise RuntimeError(
            f"nodal velocity iteration did not converge; worst node {worst} "
            f"residual {nodal_residual(V[worst], kappa[worst], lam):.3e}"
        )

    correction = float(np.dot(w, V) / wsum)
    V = V - correction
    lam = lam + correction

    # multiple nodal roots inside the capture radius mean the selected branch
    # is ambiguous (symmetry breaking onset); resolve to the nearest and log
    probes = np.linspace(-capture_radius, capture_radius, 17)
    sample = V[:: max(1, len(V) // 16)]
    kap_sample = kappa[:: max(1, len(V) // 16)]
    for v_i, k_i in zip(sample, kap_sample):
        vals = nodal_residual(v_i + probes, k_i, lam)
        crossings = int(np.sum(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))
        if crossings > 1:
            log.warning("branch ambiguity: %d nodal roots within %.2g of V=%.4g",
                        crossings, capture_radius, v_i)
            break
    return V, lam


def _solve_branch(resid, k_i, lam, v_prev, radius):
    """Root of the nodal equation nearest v_prev (bisection on a bracket)."""
    f_prev = resid(v_prev, k_i, lam)
    if f_prev == 0.0:
        return v_prev
    step = max(1e-3, 0.05 * (1.0 + abs(v_prev)))
    lo = hi = v_prev
    flo = fhi = f_prev
    for _ in range(60):
        lo -= step
        flo = resid(lo, k_i, lam)
        if (flo < 0.0) != (f_prev < 0.0):
            return brentq(lambda v: resid(v, k_i, lam), lo, v_prev, xtol=1e-13)
        hi += step
        fhi = resid(hi, k_i, lam)
        if (fhi < 0.0) != (f_prev < 0.0):
            return brentq(lambda v: resid(v, k_i, lam), v_prev, hi, xtol=1e-13)
        step *= 1.6
    raise RuntimeError(f"no bracket for the nodal velocity near V={v_prev:.4g}")


def _self_intersects(nodes: np.ndarray) -> bool:
    """Segment-segment test over all non-adjacent pairs (vectorized)."""
    n = len(nodes)
    p = nodes
    q = np.roll(nodes, -1, axis=0)
    d = q - p
    i, j = np.triu_indices(n, k=2)
    adjacent = (i == 0) & (j == n - 1)
    i, j = i[~adjacent], j[~adjacent]

    def cross(a, b):
        return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]

    r = d[i]
    s = d[j]
    pq = p[j] - p[i]
    denom = cross(r, s)
    parallel = np.abs(denom) < 1e-30
    denom_safe = np.where(parallel, 1.0, denom)
    t = cross(pq, s) / denom_safe
    u = cross(pq, r) / denom_safe
    hit = (~parallel) & (t > 0.0) & (t < 1.0) & (u > 0.0) & (u < 1.0)
    return bool(np.any(hit))


def evolve_curve(curve: CurveState, dt: float, t_end: float,
                 record_every: int = 1, check_intersections: bool = True):
    """Explicit normal-velocity stepping with uniform-arclength resampling.

    dt must satisfy the curvature-flow bound dt <= 0.25 h^2 for the current
    node spacing h.  Area drift is reported by the trajectory, never corrected
    by rescaling.  Returns the list of recorded CurveState (including the
    initial one).
    """
    h = polygon_perimeter(curve.nodes) / len(curve.nodes)
    if dt > 0.25 * h * h * (1.0 + 1e-9):
        raise ValueError(f"dt={dt:.3g} exceeds the stability bound "
                         f"0.25 h^2 = {0.25 * h * h:.3g}")
    nsteps = int(round(t_end / dt))
    traj = [curve]
    for k in range(nsteps):
        kappa, normals = curvature_and_normals(curve.nodes)
        V, lam = solve_nodal_velocities(curve, kappa)
        moved = curve.nodes + dt * V[:, None] * normals
        moved = resample_uniform(moved)
        if check_intersections and _self_intersects(moved):
            raise SelfIntersectionError(
                f"curve self-intersected at t={curve.t + dt:.6g}", moved)
        curve = replace(curve, nodes=moved, t=curve.t + dt, V=V, lam=lam)
        if (k + 1) % record_every == 0 or k == nsteps - 1:
            traj.append(curve)
    return traj


def curve_state(nodes: np.ndarray, beta: float,
                profile: StandingWaveProfile | None = None,
                v_max: float = 10.0, t: float = 0.0) -> CurveState:
    """Convenience constructor wiring the Phi spline table for beta > 0."""
    nodes = resample_uniform(np.asarray(nodes, dtype=float))
    if polygon_area(nodes) < 0.0:
        nodes = nodes[::-1].copy()
    if beta > 0.0:
        if profile is None:
            raise ValueError("beta > 0 needs a standing-wave profile")
        table = get_phi_table(profile, v_max=v_max, dv=0.05)
        c0 = profile.c0
    else:
        table = None
        c0 = profile.c0 if profile is not None else 1.0
    return CurveState(nodes=nodes, t=t, beta=beta, c0=c0, phi_table=table)
