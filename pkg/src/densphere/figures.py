"""Figure rendering for run outputs.

Every report-producing subcommand drops PNG figures next to its CSV
files unless figures are disabled. All rendering targets the Agg
backend so runs work headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150
MAX_SPAGHETTI = 100


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def density_draws_figure(path, grid, draw_values, data_points, raw_scale=None):
    """Spaghetti plot of posterior density draws over a data rug (1D)."""
    x = grid[:, 0]
    step = max(1, draw_values.shape[0] // MAX_SPAGHETTI)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, draw_values[::step].T, color="tab:gray", lw=0.5, alpha=0.35)
    if data_points is not None and len(data_points):
        ax.plot(data_points[:, 0], np.zeros(len(data_points)), "|", color="tab:red", ms=12, alpha=0.5)
    ax.set_xlabel("x (unit domain)")
    ax.set_ylabel("density")
    ax.set_title("posterior density draws")
    return _save(fig, path)


def density_band_figure(path, grid, summary, true_density=None):
    """Median plus quantile band (1D)."""
    x = grid[:, 0]
    fig, ax = plt.subplots(figsize=(7, 4))
    levels = sorted(summary.quantile_levels)
    lo, hi = levels[0], levels[-1]
    if len(levels) >= 2:
        ax.fill_between(x, summary.level(lo), summary.level(hi), color="tab:blue",
                        alpha=0.3, label=f"{lo:g}-{hi:g} band")
    mid = 0.5 if 0.5 in summary.quantile_levels else levels[len(levels) // 2]
    ax.plot(x, summary.level(mid), color="black", lw=1.5, label=f"pointwise q{mid:g}")
    ax.plot(x, summary.mean, color="tab:blue", lw=1.0, ls="--", label="pointwise mean")
    if true_density is not None:
        ax.plot(x, true_density, color="tab:red", lw=1.0, label="reference")
    ax.set_xlabel("x (unit domain)")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    ax.set_title("pointwise posterior summary")
    return _save(fig, path)


def density_contour_figure(path, grid, values, data_points=None, title="posterior median density"):
    """Filled contours of a density summary on the unit square."""
    side = int(round(np.sqrt(grid.shape[0])))
    x = grid[:, 0].reshape(side, side)
    y = grid[:, 1].reshape(side, side)
    z = np.asarray(values).reshape(side, side)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    cs = ax.contourf(x, y, z, levels=20, cmap="viridis")
    fig.colorbar(cs, ax=ax, shrink=0.85)
    if data_points is not None and len(data_points):
        ax.plot(data_points[:, 0], data_points[:, 1], ".", color="tab:red", ms=2, alpha=0.5)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(title)
    return _save(fig, path)


def predictive_figure(path, samples, dim, data_points=None):
    """Histogram (1D) or scatter (2D) of posterior-predictive samples."""
    fig, ax = plt.subplots(figsize=(6, 4) if dim == 1 else (5.5, 5))
    if dim == 1:
        ax.hist(samples[:, 0], bins=50, density=True, color="tab:blue", alpha=0.7)
        if data_points is not None and len(data_points):
            ax.plot(data_points[:, 0], np.zeros(len(data_points)), "|", color="tab:red", ms=12, alpha=0.5)
        ax.set_xlabel("x")
        ax.set_ylabel("density")
    else:
        ax.plot(samples[:, 0], samples[:, 1], ".", color="black", ms=2, alpha=0.6)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_aspect("equal")
    ax.set_title("posterior predictive sample")
    return _save(fig, path)


def intensity_figure(path, nodes, summary, dim, events=None):
    """Intensity band (1D) or median heatmap (2D) in raw coordinates."""
    if dim == 1:
        x = nodes[:, 0]
        fig, ax = plt.subplots(figsize=(7, 4))
        levels = sorted(summary.quantile_levels)
        ax.fill_between(x, summary.level(levels[0]), summary.level(levels[-1]),
                        color="tab:blue", alpha=0.3)
        mid = 0.5 if 0.5 in summary.quantile_levels else levels[len(levels) // 2]
        ax.plot(x, summary.level(mid), color="black", lw=1.5)
        if events is not None and len(events):
            ax.plot(events[:, 0], np.zeros(len(events)), "|", color="tab:red", ms=12, alpha=0.5)
        ax.set_xlabel("location (raw coordinates)")
        ax.set_ylabel("intensity")
        ax.set_title("posterior intensity")
        return _save(fig, path)
    return density_contour_figure(path, nodes, summary.level(0.5) if 0.5 in summary.quantile_levels
                                  else summary.mean, data_points=events, title="posterior median intensity")


def convergence_figure(path, reports):
    """Truncation-convergence summary: flow distance versus truncation."""
    truncs = [r.truncation for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(truncs, [r.f0 for r in reports], "o-", label="f(0)")
    ax.loglog(truncs, [r.integral_f for r in reports], "s-", label="integral of f")
    ax.set_xlabel("truncation size")
    ax.set_ylabel("flow distance")
    ax.legend(frameon=False)
    ax.set_title("truncated vs full geodesic flow")
    return _save(fig, path)


def trace_figure(path, trace):
    """Log-posterior trace over iterations."""
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(trace, lw=0.5, color="tab:blue")
    ax.set_xlabel("iteration")
    ax.set_ylabel("log posterior")
    ax.set_title("chain trace")
    return _save(fig, path)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
