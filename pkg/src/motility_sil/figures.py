"""Matplotlib renderers for the CLI report path.

Each renderer reads a documented CSV back through the package's own reader
(inputs stay untouched) and writes a figure next to it.  Hysteresis plots
follow the red = rising-F sweep, blue = falling-F sweep convention with
direction arrows.
"""

from __future__ import annotations

import hashlib
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import read_csv

__all__ = [
    "render_phi_curve",
    "render_hysteresis",
    "render_stability_map",
    "render_interface_vf",
    "render_contours",
    "render_curve",
]

UP_COLOR = "tab:red"
DOWN_COLOR = "tab:blue"


def _stamp(fig, csv_path):
    with open(csv_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()[:12]
    fig.text(0.01, 0.005, f"source: {os.path.basename(csv_path)} [{digest}]",
             fontsize=6, color="0.4")


def _arrow_along(ax, x, y, color, n_arrows=4):
    n = len(x)
    if n < 3:
        return
    for frac in np.linspace(0.15, 0.85, n_arrows):
        i = int(frac * (n - 2))
        if x[i + 1] == x[i] and y[i + 1] == y[i]:
            continue
        ax.annotate("", xy=(x[i + 1], y[i + 1]), xytext=(x[i], y[i]),
                    arrowprops=dict(arrowstyle="-|>", color=color, lw=1.2))


def render_phi_curve(phi_csv, out_path, c0: float, beta: float) -> str:
    _, rows = read_csv(phi_csv, "phi_table")
    V = np.array([r[0] for r in rows])
    phi = np.array([r[1] for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(V, c0 * V - beta * phi, color="k")
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("V")
    ax.set_ylabel(r"$c_0 V - \Phi_\beta(V)$")
    ax.set_title(f"interface response, beta={beta:g}")
    _stamp(fig, phi_csv)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def _split_sweeps(t, F):
    """Indices of rising-F and falling-F samples."""
    dF = np.gradient(F, t) if len(t) > 2 else np.zeros_like(F)
    return dF >= 0.0, dF < 0.0


def render_hysteresis(hyst_csv, out_path, title="hysteresis") -> str:
    _, rows = read_csv(hyst_csv, "hysteresis")
    t = np.array([r[0] for r in rows])
    F = np.array([r[1] for r in rows])
    V = np.array([r[2] for r in rows])
    jumps = np.array([r[4] for r in rows], dtype=bool)
    up, down = _split_sweeps(t, F)
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    ax.plot(F[up], V[up], color=UP_COLOR, lw=1.4, label="F rising")
    ax.plot(F[down], V[down], color=DOWN_COLOR, lw=1.4, label="F falling")
    _arrow_along(ax, F[up], V[up], UP_COLOR)
    _arrow_along(ax, F[down], V[down], DOWN_COLOR)
    if jumps.any():
        ax.plot(F[jumps], V[jumps], "o", ms=5, mfc="none", mec="k",
                label="jump")
    ax.set_xlabel("F")
    ax.set_ylabel("V")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _stamp(fig, hyst_csv)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_interface_vf(interface_csv, out_path, title="PDE interface") -> str:
    """V-vs-F trace of a PDE run driven by a schedule."""
    _, rows = read_csv(interface_csv, "interface")
    t = np.array([r[0] for r in rows])
    V = np.array([r[2] for r in rows])
    F = np.array([r[3] for r in rows])
    up, down = _split_sweeps(t, F)
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    ax.plot(F[up], V[up], color=UP_COLOR, lw=1.0, label="F rising")
    ax.plot(F[down], V[down], color=DOWN_COLOR, lw=1.0, label="F falling")
    _arrow_along(ax, F[up], V[up], UP_COLOR)
    _arrow_along(ax, F[down], V[down], DOWN_COLOR)
    ax.set_xlabel("F")
    ax.set_ylabel("V")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _stamp(fig, interface_csv)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_stability_map(stab_csv, out_path) -> str:
    _, rows = read_csv(stab_csv, "stability")
    V = np.array([r[0] for r in rows])
    beta = np.array([r[1] for r in rows])
    max_real = np.array([r[2] for r in rows])
    stable = np.array([r[3] for r in rows], dtype=bool)
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    for b in np.unique(beta):
        sel = beta == b
        ax.plot(V[sel], max_real[sel], "-", lw=1.0, label=f"beta={b:g}")
        ax.plot(V[sel & stable], max_real[sel & stable], "o", ms=4,
                color="tab:green")
        ax.plot(V[sel & ~stable], max_real[sel & ~stable], "x", ms=5,
                color="tab:red")
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("V")
    ax.set_ylabel("max Re eigenvalue")
    ax.legend(fontsize=8)
    _stamp(fig, stab_csv)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_contours(contour_csv, out_path) -> str:
    _, rows = read_csv(contour_csv, "contour")
    t = np.array([r[0] for r in rows])
    x = np.array([r[2] for r in rows])
    y = np.array([r[3] for r in rows])
    fig, ax = plt.subplots(figsize=(4.6, 4.6))
    times = np.unique(t)
    cmap = plt.get_cmap("viridis")
    for i, tv in enumerate(times):
        sel = t == tv
        color = cmap(i / max(len(times) - 1, 1))
        ax.plot(np.append(x[sel], x[sel][0]), np.append(y[sel], y[sel][0]),
                color=color, lw=1.0, label=f"t={tv:.3g}" if len(times) < 8 else None)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if len(times) < 8:
        ax.legend(fontsize=7)
    _stamp(fig, contour_csv)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_curve(curve_csv, out_path) -> str:
    _, rows = read_csv(curve_csv, "curve")
    t = np.array([r[0] for r in rows])
    x = np.array([r[2] for r in rows])
    y = np.array([r[3] for r in rows])
    fig, ax = plt.subplots(figsize=(4.6, 4.6))
    times = np.unique(t)
    cmap = plt.get_cmap("plasma")
    for i, tv in enumerate(times):
        sel = t == tv
        color = cmap(i / max(len(times) - 1, 1))
        ax.plot(np.append(x[sel], x[sel][0]), np.append(y[sel], y[sel][0]),
                color=color, lw=1.0)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("curve evolution")
    _stamp(fig, curve_csv)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
