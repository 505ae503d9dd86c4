"""Experiment orchestration: config in, deterministic CSVs (and figures) out.

Every run creates the output directory, writes a resolved copy of its
configuration, produces the experiment's CSV files per the documented
schemas, and finishes with a manifest (timestamps, parameter hash, code
version).  CSV payloads carry no timestamps, so reruns of the same config
are byte-identical.
"""

from __future__ import annotations

import datetime
import hashlib
import os

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from . import figures as figs
from .config import ConfigError, ExperimentConfig, parse_config
from .csvio import write_csv
from .kernel import phi_beta, phi_beta_prime, solve_psi0
from .pde1d import (CellConfig, FieldState1D, Pde1dConfig,
                    decompose_residual, simulate_1d,
                    simulate_two_interface_cell, track_interface)
from .pde2d import Pde2dConfig, simulate_2d, write_snapshot
from .potentials import asymmetry_indicator, make_potential, standing_wave
from .sil1d import (Schedule, beta_critical, reference_schedule, run_hysteresis,
                    sil_roots, traveling_wave_roots)
from .sil2d import (curvature_and_normals, curve_state, evolve_curve,
                    make_circle, make_ellipse, solve_nodal_velocities)
from .stability import is_stable

__all__ = ["run_experiment", "run_sweep"]

# second-difference residual of the profile passes 1e-6 for dz below this
_STRICT_DZ = 0.0145


def _make_potential(cfg: ExperimentConfig):
    kind = cfg["potential.kind"]
    coeffs = cfg.values.get("potential.coefficients")
    if kind == "polynomial":
        return make_potential("polynomial", coeffs)
    if coeffs is not None:
        raise ConfigError("potential.coefficients requires potential.kind = polynomial")
    return make_potential(kind)


def _make_profile(cfg: ExperimentConfig, potential=None):
    potential = potential or _make_potential(cfg)
    L = cfg["grid.half_width"]
    n = cfg["grid.n_points"]
    strict = (2.0 * L / (n - 1)) <= _STRICT_DZ
    return standing_wave(potential, half_width=L, n_points=n, strict=strict)


def _schedule_from(cfg: ExperimentConfig) -> Schedule | None:
    kind = cfg.values.get("schedule.kind")
    bps = cfg.values.get("schedule.breakpoints")
    if bps is not None:
        return Schedule(bps)
    if kind == "reference-sweep":
        return reference_schedule()
    if kind is None:
        return None
    raise ConfigError(f"unknown schedule.kind {kind!r}")


def _run_kernel(cfg, outdir):
    profile = _make_profile(cfg)
    beta = cfg["beta"]
    vs = np.linspace(cfg["v.start"], cfg["v.stop"], cfg["v.count"])
    rows = [(v, phi_beta(v, beta, profile), phi_beta_prime(v, beta, profile))
            for v in vs]
    phi_csv = write_csv("phi_table", rows, os.path.join(outdir, "phi_table.csv"))
    sol = solve_psi0(cfg["v.psi0"], beta, profile)
    psi_csv = write_csv("psi0", zip(profile.grid_z, sol.psi0),
                        os.path.join(outdir, "psi0.csv"))
    prof_csv = write_csv("profile",
                         zip(profile.grid_z, profile.theta0, profile.dtheta0),
                         os.path.join(outdir, "profile.csv"))
    arts = [phi_csv, psi_csv, prof_csv]
    if cfg["figures"]:
        arts.append(figs.render_phi_curve(phi_csv,
                                          os.path.join(outdir, "phi_curve.png"),
                                          c0=profile.c0, beta=beta))
    return arts, [f"c0 = {profile.c0!r}", f"phi_beta({cfg['v.psi0']}) = {sol.phi!r}"]


def _run_sil_roots(cfg, outdir):
    profile = _make_profile(cfg)
    f_stop = cfg.get("f.stop", cfg["f.start"])
    Fs = np.linspace(cfg["f.start"], f_stop, cfg["f.count"])
    rows = []
    for F in Fs:
        rs = sil_roots(F, cfg["beta"], profile, v_scan=cfg["v_scan"],
                       dv=cfg["dv"], stability_method=cfg["stability_method"])
        rows.extend((rs.F, r.V, int(r.stable), r.phi_prime) for r in rs.roots)
    path = write_csv("roots", rows, os.path.join(outdir, "roots.csv"))
    return [path], [f"{len(rows)} roots over {len(Fs)} F values"]


def _run_tw(cfg, outdir):
    profile = _make_profile(cfg)
    rows = []
    for beta in cfg["beta.list"]:
        for v in traveling_wave_roots(beta, profile, v_scan=cfg["v_scan"]):
            rows.append((beta, v))
    path = write_csv("tw_roots", rows, os.path.join(outdir, "tw_roots.csv"))
    return [path], [f"{len(rows)} traveling-wave roots"]


def _run_beta_crit(cfg, outdir):
    potential = _make_potential(cfg)
    profile = _make_profile(cfg, potential)
    bc_bisect = beta_critical(profile, (cfg["beta.lo"], cfg["beta.hi"]),
                              tol=cfg["tol"])
    bc_closed = profile.c0 / phi_beta_prime(0.0, 1.0, profile)
    asym = asymmetry_indicator(potential)
    path = write_csv("beta_crit", [(bc_bisect, bc_closed, asym)],
                     os.path.join(outdir, "beta_crit.csv"))
    return [path], [f"beta_critical = {bc_bisect!r} (closed form {bc_closed!r})"]


def _run_hysteresis(cfg, outdir):
    profile = _make_profile(cfg)
    schedule = _schedule_from(cfg) or reference_schedule()
    trace = run_hysteresis(schedule, cfg["beta"], profile,
                           V_start=cfg.values.get("v_start"),
                           samples_per_leg=cfg["samples_per_leg"],
                           capture_radius=cfg["capture_radius"],
                           v_scan=cfg["v_scan"])
    jump_ts = {j.t for j in trace.jumps}
    rows = [(t, F, V, int(b), int(t in jump_ts))
            for t, F, V, b in zip(trace.t, trace.F, trace.V, trace.branch_id)]
    hyst_csv = write_csv("hysteresis", rows, os.path.join(outdir, "hysteresis.csv"))
    jrows = [(j.t, j.F, j.V_before, j.V_after) for j in trace.jumps]
    jumps_csv = write_csv("jumps", jrows, os.path.join(outdir, "jumps.csv"))
    arts = [hyst_csv, jumps_csv]
    if cfg["figures"]:
        arts.append(figs.render_hysteresis(
            hyst_csv, os.path.join(outdir, "hysteresis.png"),
            title=f"quasi-static sweep, beta={cfg['beta']:g}"))
    return arts, [f"{len(trace.jumps)} jumps, loop area {trace.loop_area()!r}"]


def _run_stability(cfg, outdir):
    profile = _make_profile(cfg)
    vs = np.linspace(cfg["v.start"], cfg["v.stop"], cfg["v.count"])
    rows = []
    for beta in cfg["beta.list"]:
        for v in vs:
            stable, rep = is_stable(v, beta, profile)
            rows.append((v, beta, rep.max_real, int(stable),
                         phi_beta_prime(v, beta, profile), profile.c0))
    path = write_csv("stability", rows, os.path.join(outdir, "stability.csv"))
    arts = [path]
    if cfg["figures"]:
        arts.append(figs.render_stability_map(
            path, os.path.join(outdir, "stability.png")))
    return arts, [f"{len(rows)} (V, beta) spectra"]


def _run_pde1d(cfg, outdir):
    potential = _make_potential(cfg)
    profile = _make_profile(cfg, potential)
    schedule = _schedule_from(cfg)
    f_const = cfg.values.get("f.const")
    if schedule is None and f_const is None:
        raise ConfigError("pde1d needs f.const or a schedule")
    F = schedule.F if schedule is not None else float(f_const)

    ic_p = None
    if cfg["ic.p"] == "psi0":
        v0 = cfg.values.get("ic.v_start")
        if v0 is None:
            raise ConfigError("ic.p = psi0 requires ic.v_start")
        sol = solve_psi0(v0, cfg["beta"], profile)
        itp = CubicSpline(profile.grid_z, sol.psi0)
        half = profile.half_width
        ic_p = lambda y: np.where(np.abs(y) <= half, itp(np.clip(y, -half, half)), 0.0)
    elif cfg["ic.p"] != "zero":
        raise ConfigError(f"unknown ic.p {cfg['ic.p']!r}")

    p1 = Pde1dConfig(eps=cfg["eps"], beta=cfg["beta"], potential=potential,
                     F=F, t_end=cfg["t_end"], L=cfg["domain.L"],
                     dx=cfg.values.get("dx"), dt=cfg.values.get("dt"),
                     sample_dt=cfg.values.get("sample_dt"), ic_p=ic_p,
                     snapshot_every=cfg["snapshot_every"],
                     ic_noise=cfg["ic.noise"], seed=cfg["seed"],
                     recenter=cfg["recenter"])
    res = simulate_1d(p1, profile)
    tr = res.track
    track_csv = write_csv("interface", zip(tr.t, tr.x_interface, tr.V_est, tr.F),
                          os.path.join(outdir, "interface.csv"))
    mon = res.monitors
    mon_csv = write_csv("monitors1d",
                        zip(mon.t, mon.mass, mon.rho_min, mon.rho_max,
                            mon.bound_violation_fraction, mon.energy),
                        os.path.join(outdir, "monitors.csv"))
    arts = [track_csv, mon_csv]
    for i, (t_snap, rho, P) in enumerate(res.snapshots):
        arts.append(write_csv("snapshot1d", zip(res.state.grid_x, rho, P),
                              os.path.join(outdir, f"snapshot_{i:04d}.csv")))
    if cfg["residual_diagnostics"]:
        rows = []
        for t_snap, rho, P in res.snapshots + [(res.state.t, res.state.rho,
                                                res.state.P)]:
            st = FieldState1D(grid_x=res.state.grid_x, rho=rho, P=P, t=t_snap,
                              eps=cfg["eps"], beta=cfg["beta"])
            xi = track_interface(st.grid_x, rho)
            F_now = F(t_snap) if callable(F) else F
            dec = decompose_residual(st, xi, profile, F_now)
            rows.append((t_snap, dec.u_norm_L2))
        arts.append(write_csv("residual", rows,
                              os.path.join(outdir, "residual.csv")))
    if cfg["figures"]:
        arts.append(figs.render_interface_vf(
            track_csv, os.path.join(outdir, "interface_vf.png"),
            title=f"PDE trace, eps={cfg['eps']:g}, beta={cfg['beta']:g}"))
    return arts, [f"dt = {res.dt!r}, {res.recenter_shifts} recenter shifts"]


def _run_cell1d(cfg, outdir):
    potential = _make_potential(cfg)
    profile = _make_profile(cfg, potential)
    cc = CellConfig(eps=cfg["eps"], beta=cfg["beta"], potential=potential,
                    a=cfg["a"], t_end=cfg["t_end"], L=cfg.values.get("domain.L"),
                    dx=cfg.values.get("dx"), dt=cfg.values.get("dt"),
                    sample_dt=cfg.values.get("sample_dt"),
                    seed_amplitude=cfg["seed_amplitude"], seed=cfg["seed"])
    res = simulate_two_interface_cell(cc, profile)
    cell_csv = write_csv("cell", zip(res.t, res.x_back, res.x_front, res.V_cell),
                         os.path.join(outdir, "cell.csv"))
    mon = res.monitors
    mon_csv = write_csv("monitors1d",
                        zip(mon.t, mon.mass, mon.rho_min, mon.rho_max,
                            mon.bound_violation_fraction, mon.energy),
                        os.path.join(outdir, "monitors.csv"))
    return [cell_csv, mon_csv], [f"steady velocity {res.velocity!r}, "
                                 f"width drift {res.width_drift!r}"]


def _run_pde2d(cfg, outdir):
    potential = _make_potential(cfg)
    profile = _make_profile(cfg, potential)
    p2 = Pde2dConfig(eps=cfg["eps"], beta=cfg["beta"], potential=potential,
                     n=cfg["n"], Lx=cfg["domain.Lx"], Ly=cfg["domain.Ly"],
                     r0=cfg["r0"], t_end=cfg["t_end"], dt=cfg.values.get("dt"),
                     sample_every=cfg["sample_every"],
                     contour_every=cfg["contour_every"])
    res = simulate_2d(p2, profile)
    mon = res.monitors
    mon_csv = write_csv("monitors2d",
                        zip(mon.t, mon.mass, mon.E, mon.F, mon.rho_min,
                            mon.rho_max, mon.lam),
                        os.path.join(outdir, "monitors.csv"))
    crows = []
    for t_c, contour in res.contours:
        crows.extend((t_c, i, px, py)
                     for i, (px, py) in enumerate(contour.points))
    cont_csv = write_csv("contour", crows, os.path.join(outdir, "contours.csv"))
    arts = [mon_csv, cont_csv]
    if cfg["snapshot_final"]:
        snap = os.path.join(outdir, "final_state.dat")
        write_snapshot(snap, res.state)
        arts.append(snap)
    if cfg["figures"] and crows:
        arts.append(figs.render_contours(cont_csv,
                                         os.path.join(outdir, "contours.png")))
    return arts, [f"dt = {res.dt!r}, mass drift "
                  f"{abs(mon.mass[-1] - mon.mass[0]) / abs(mon.mass[0])!r}"]


def _run_sil2d(cfg, outdir):
    beta = cfg["beta"]
    profile = _make_profile(cfg) if beta > 0.0 else None
    if cfg["shape"] == "circle":
        nodes = make_circle(cfg["radius"], cfg["n_nodes"])
    elif cfg["shape"] == "ellipse":
        nodes = make_ellipse(cfg["ax_a"], cfg["ax_b"], cfg["n_nodes"])
    else:
        raise ConfigError(f"unknown shape {cfg['shape']!r}")
    state = curve_state(nodes, beta, profile)
    h = np.linalg.norm(state.nodes[1] - state.nodes[0])
    dt = cfg.values.get("dt") or 0.2 * h * h
    traj = evolve_curve(state, dt, cfg["t_end"], record_every=cfg["record_every"])
    rows = []
    for st in traj:
        kappa, _ = curvature_and_normals(st.nodes)
        V, lam = solve_nodal_velocities(st, kappa)
        rows.extend((st.t, i, p[0], p[1], V[i], kappa[i], lam)
                    for i, p in enumerate(st.nodes))
    curve_csv = write_csv("curve", rows, os.path.join(outdir, "curve.csv"))
    arts = [curve_csv]
    if cfg["figures"]:
        arts.append(figs.render_curve(curve_csv,
                                      os.path.join(outdir, "curve.png")))
    return arts, [f"{len(traj)} recorded states, dt = {dt!r}"]


_RUNNERS = {
    "kernel": _run_kernel,
    "sil-roots": _run_sil_roots,
    "tw": _run_tw,
    "beta-crit": _run_beta_crit,
    "hysteresis": _run_hysteresis,
    "stability": _run_stability,
    "pde1d": _run_pde1d,
    "cell1d": _run_cell1d,
    "pde2d": _run_pde2d,
    "sil2d": _run_sil2d,
}


def resolve_output_dir(cfg: ExperimentConfig, out_dir=None) -> str:
    if out_dir:
        return str(out_dir)
    if cfg.values.get("output_dir"):
        return cfg.values["output_dir"]
    root = os.environ.get("MOTILITY_SIL_OUT", "runs")
    return os.path.join(root, cfg.experiment)


def run_experiment(config_path, out_dir=None) -> str:
    """Parse, run, and write outputs; returns the output directory."""
    cfg = parse_config(config_path)
    outdir = resolve_output_dir(cfg, out_dir)
    os.makedirs(outdir, exist_ok=True)
    resolved = cfg.resolved_text()
    with open(os.path.join(outdir, "resolved.cfg"), "w") as fh:
        fh.write(resolved)
    started = datetime.datetime.now(datetime.timezone.utc)
    artifacts, notes = _RUNNERS[cfg.experiment](cfg, outdir)
    finished = datetime.datetime.now(datetime.timezone.utc)
    param_hash = hashlib.sha256(resolved.encode()).hexdigest()
    with open(os.path.join(outdir, "manifest.txt"), "w") as fh:
        fh.write(f"experiment: {cfg.experiment}\n"
                 f"version: {__version__}\n"
                 f"parameter_hash: {param_hash}\n"
                 f"started: {started.isoformat()}\n"
                 f"finished: {finished.isoformat()}\n")
        for note in notes:
            fh.write(f"note: {note}\n")
        for art in artifacts:
            fh.write(f"artifact: {os.path.basename(art)}\n")
    return outdir


def run_sweep(config_paths, out_root=None, threads: int = 1):
    """Fan independent configs out to a process pool; one directory each."""
    jobs = []
    for path in config_paths:
        cfg = parse_config(path)
        name = os.path.splitext(os.path.basename(path))[0]
        outdir = os.path.join(out_root or os.environ.get("MOTILITY_SIL_OUT", "runs"),
                              name)
        jobs.append((path, outdir))
    if threads <= 1:
        return [run_experiment(p, o) for p, o in jobs]
    import concurrent.futures as cf
    with cf.ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run_experiment, p, o) for p, o in jobs]
        return [f.result() for f in futures]
