"""Figure rendering for the CLI report paths.

Every plotting helper writes a PNG next to the delimited output; the CSV
stays the authoritative data product.  The Agg backend is forced so the
CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm


def save_phase_diagram(boundary_rows, grid, path, axis_name="g"):
    """Instability boundaries plus the stable/unstable cell shading.

    ``boundary_rows`` are (value, I_s, kind, omega) tuples; ``grid`` is a
    (values, intensities, stable_bool_array) triple or None.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if grid is not None:
        vals, I_vals, stable = grid
        ax.pcolormesh(vals, I_vals, (~stable.T).astype(float),
                      cmap="Reds", vmin=0.0, vmax=2.5, shading="nearest")
    tp = [(r[0], r[1]) for r in boundary_rows if r[2] == "TP"]
    hb = [(r[0], r[1]) for r in boundary_rows if r[2] == "HB"]
    if tp:
        ax.plot(*zip(*tp), "r.-", lw=1.8, ms=4, label="turning point")
    if hb:
        ax.plot(*zip(*hb), "b.-", lw=1.8, ms=4, label="Hopf")
    ax.set_xlabel(axis_name)
    ax.set_ylabel(r"$I_s$")
    if tp or hb:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _masked(values):
    arr = np.array([[np.nan if v is None else v for v in row] for row in values])
    return np.ma.masked_invalid(arr)


def save_effective_map(axis_values, I_values, n_eff, squeeze, path,
                       axis_name="g", n_th=None):
    """Two density panels: effective phonon number and squeeze factor.

    ``n_eff`` and ``squeeze`` are nested lists indexed [axis][intensity],
    with None marking unstable cells (left blank).
    """
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.0), sharey=True)
    ne = _masked(n_eff)
    sq = _masked(squeeze)
    norm = LogNorm(vmin=max(float(ne.min()), 1e-2), vmax=n_th or float(ne.max())) \
        if ne.count() else None
    im0 = axes[0].pcolormesh(axis_values, I_values, ne.T, cmap="viridis",
                             norm=norm, shading="nearest")
    fig.colorbar(im0, ax=axes[0], label=r"$\bar{n}_\mathrm{eff}$")
    im1 = axes[1].pcolormesh(axis_values, I_values, sq.T, cmap="magma",
                             vmin=0.0, vmax=1.0, shading="nearest")
    fig.colorbar(im1, ax=axes[1], label=r"$e^{-2 r_\mathrm{eff}}$")
    for ax in axes:
        ax.set_xlabel(axis_name)
    axes[0].set_ylabel(r"$I_s$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trajectory_plot(traj, path):
    """Time series of the two intensities and the mirror displacement."""
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 6.0), sharex=True)
    axes[0].plot(traj.times, traj.signal_intensity, lw=0.9)
    axes[0].set_ylabel(r"$|\beta_s|^2$")
    axes[1].plot(traj.times, traj.pump_intensity, lw=0.9, color="tab:orange")
    axes[1].set_ylabel(r"$|\beta_p|^2$")
    axes[2].plot(traj.times, traj.y[:, 0], lw=0.9, color="tab:green")
    axes[2].set_ylabel("x")
    axes[2].set_xlabel(r"$\tau$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
