"""Smoke coverage for every experiment runner and figure renderer."""

import os

import pytest

from motility_sil.csvio import read_csv
from motility_sil.experiments import run_experiment


def run_cfg(tmp_path, text, name="run"):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text)
    return run_experiment(cfg, out_dir=tmp_path / f"{name}-out")


def test_sil_roots_runner(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = sil-roots\nbeta = 150\ngrid.n_points = 4001\n"
        "f.start = -2.1\nf.stop = -1.9\nf.count = 3\nv_scan = 20\n"
        "figures = false\n"))
    _, rows = read_csv(os.path.join(out, "roots.csv"))
    assert len(rows) == 9   # three roots inside the fold window
    assert all(r[2] in (0, 1) for r in rows)


def test_tw_runner(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = tw\nbeta.list = 1, 150\ngrid.n_points = 4001\n"
        "figures = false\n"))
    _, rows = read_csv(os.path.join(out, "tw_roots.csv"))
    assert [r[1] for r in rows] == [0.0, 0.0]


def test_beta_crit_runner(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = beta-crit\npotential.kind = asymmetric-sextic\n"
        "grid.n_points = 4001\nbeta.lo = 100\nbeta.hi = 5000\n"
        "figures = false\n"))
    _, rows = read_csv(os.path.join(out, "beta_crit.csv"))
    bisect, closed, asym = rows[0]
    assert abs(bisect - closed) / closed < 1e-3
    assert asym > 0.0


def test_stability_runner(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = stability\nbeta.list = 150\n"
        "v.start = 0.0\nv.stop = 0.9\nv.count = 3\nfigures = true\n"))
    _, rows = read_csv(os.path.join(out, "stability.csv"))
    assert len(rows) == 3
    stable_flags = [r[3] for r in rows]
    assert stable_flags == [1, 0, 0]   # fold at V ~ 0.406
    assert os.path.exists(os.path.join(out, "stability.png"))


def test_pde1d_runner_with_residuals(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = pde1d\neps = 0.02\nbeta = 0\nf.const = 0.05\n"
        "t_end = 0.1\nsnapshot_every = 500\nresidual_diagnostics = true\n"
        "figures = true\n"))
    names = set(os.listdir(out))
    assert {"interface.csv", "monitors.csv", "residual.csv",
            "interface_vf.png"} <= names
    _, rows = read_csv(os.path.join(out, "residual.csv"))
    assert all(r[1] < 1.0 for r in rows)


def test_cell1d_runner(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = cell1d\neps = 0.02\nbeta = 20\na = 0.5\nt_end = 0.1\n"
        "figures = false\n"))
    _, rows = read_csv(os.path.join(out, "cell.csv"))
    assert rows, "cell track must not be empty"
    t, xb, xf, v = rows[-1]
    assert xf - xb == pytest.approx(1.0, abs=0.15)


def test_pde2d_runner(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = pde2d\neps = 0.04\nbeta = 5\nn = 160\nt_end = 0.005\n"
        "contour_every = 3\nfigures = true\n"))
    names = set(os.listdir(out))
    assert {"monitors.csv", "contours.csv", "final_state.dat",
            "contours.png"} <= names
    from motility_sil.pde2d import read_snapshot
    snap = read_snapshot(os.path.join(out, "final_state.dat"))
    assert snap.rho.shape == (160, 160)


def test_kernel_runner_figure(tmp_path):
    out = run_cfg(tmp_path, (
        "experiment = kernel\nbeta = 150\ngrid.n_points = 4001\n"
        "v.count = 9\nfigures = true\n"))
    assert os.path.exists(os.path.join(out, "phi_curve.png"))


def test_figures_read_only(tmp_path):
    """Rendering must not modify its input CSVs."""
    import hashlib
    out = run_cfg(tmp_path, (
        "experiment = hysteresis\nbeta = 0\ngrid.n_points = 4001\n"
        "schedule.kind = reference-sweep\nsamples_per_leg = 50\nfigures = false\n"))
    csv_path = os.path.join(out, "hysteresis.csv")
    before = hashlib.sha256(open(csv_path, "rb").read()).hexdigest()
    from motility_sil.figures import render_hysteresis
    render_hysteresis(csv_path, os.path.join(out, "h.png"))
    after = hashlib.sha256(open(csv_path, "rb").read()).hexdigest()
    assert before == after
    assert os.path.getsize(os.path.join(out, "h.png")) > 0
