"""Posterior summaries: density grids, pointwise bands, predictive draws.

Quantiles use linear interpolation between order statistics. Summaries
stream over node blocks so a long chain on a fine 2D grid never
materializes the full draws-by-nodes matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec
from .errors import ConfigError
from .hmc import Chain

DEFAULT_GRID_1D = 512
DEFAULT_GRID_2D = 128
DEFAULT_QUANTILES = (0.25, 0.5, 0.75)
SUMMARY_BLOCK_NODES = 2048


def unit_grid(dim: int, resolution: int | None = None) -> np.ndarray:
    """Uniform cell-center grid on the unit domain, shape (n_nodes, dim)."""
    if resolution is None:
        resolution = DEFAULT_GRID_1D if dim == 1 else DEFAULT_GRID_2D
    centers = (np.arange(resolution) + 0.5) / resolution
    if dim == 1:
        return centers.reshape(-1, 1)
    xx, yy = np.meshgrid(centers, centers, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


@dataclass(frozen=True)
class DensityGrid:
    """Density values of every stored draw at every grid node."""

    nodes: np.ndarray
    values: np.ndarray  # (n_draws, n_nodes)


def density_values(coeffs: np.ndarray, basis: BasisSpec, nodes: np.ndarray) -> np.ndarray:
    """Density of one or many coefficient vectors at the given nodes."""
    phi = basis.evaluate(nodes)
    return np.square(np.atleast_2d(coeffs) @ phi.T)


def evaluate_draws(chain: Chain, basis: BasisSpec, grid: np.ndarray) -> DensityGrid:
    """Evaluate every stored draw's density on the grid."""
    if chain.n_draws == 0:
        raise ConfigError("chain has no stored draws")
    return DensityGrid(nodes=grid, values=density_values(chain.draws, basis, grid))


@dataclass(frozen=True)
class PointwiseSummary:
    nodes: np.ndarray
    mean: np.ndarray
    quantile_levels: tuple
    quantiles: np.ndarray  # (n_levels, n_nodes)

    def level(self, p: float) -> np.ndarray:
        return self.quantiles[self.quantile_levels.index(p)]


def pointwise_summary(grid_values: np.ndarray, quantiles=DEFAULT_QUANTILES, nodes=None) -> PointwiseSummary:
    """Per-node mean and quantiles over draws (linear interpolation)."""
    levels = tuple(quantiles)
    if len(levels) == 0:
        raise ConfigError("quantile list must not be empty")
    values = np.atleast_2d(np.asarray(grid_values, dtype=float))
    if values.shape[0] < 1:
        raise ConfigError("need at least one draw to summarize")
    return PointwiseSummary(
        nodes=nodes,
        mean=values.mean(axis=0),
        quantile_levels=levels,
        quantiles=np.quantile(values, levels, axis=0, method="linear"),
    )


def summarize_chain(
    chain: Chain,
    basis: BasisSpec,
    grid: np.ndarray,
    quantiles=DEFAULT_QUANTILES,
    block_nodes: int = SUMMARY_BLOCK_NODES,
) -> PointwiseSummary:
    """Streaming pointwise summary: evaluates node blocks one at a time."""
    levels = tuple(quantiles)
    if len(levels) == 0:
        raise ConfigError("quantile list must not be empty")
    if chain.n_draws == 0:
        raise ConfigError("chain has no stored draws")
    n_nodes = grid.shape[0]
    mean = np.empty(n_nodes)
    quants = np.empty((len(levels), n_nodes))
    for start in range(0, n_nodes, block_nodes):
        block = slice(start, min(start + block_nodes, n_nodes))
        vals = density_values(chain.draws, basis, grid[block])
        mean[block] = vals.mean(axis=0)
        quants[:, block] = np.quantile(vals, levels, axis=0, method="linear")
    return PointwiseSummary(nodes=grid, mean=mean, quantile_levels=levels, quantiles=quants)


def envelope_constant(coeffs: np.ndarray, basis: BasisSpec) -> float:
    """Rigorous sup bound on the density of one coefficient vector:
    (sum_b |q_b| sup|phi_b|)^2, by the triangle inequality."""
    return float(np.abs(coeffs) @ basis.sup_norms()) ** 2


def predictive_sample(
    chain: Chain, basis: BasisSpec, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Posterior-predictive points in the unit domain.

    Each output picks a stored draw uniformly at random and
    rejection-samples its density with uniform proposals under the
    coefficient-sum envelope, so the accepted points are exact draws
    from the selected densities.
    """
    if chain.n_draws == 0:
        raise ConfigError("chain has no stored draws")
    dim = basis.dim
    picks = rng.integers(0, chain.n_draws, size=count)
    draw_ids, needs = np.unique(picks, return_counts=True)
    out = np.empty((count, dim))
    cursor = 0
    for draw_id, need in zip(draw_ids, needs):
        coeffs = chain.draws[draw_id]
        bound = envelope_constant(coeffs, basis)
        got = 0
        while got < need:
            batch = min(max(32, int(1.5 * (need - got) * bound)), 200_000)
            proposals = rng.uniform(size=(batch, dim))
            dens = density_values(coeffs, basis, proposals)[0]
            keep = proposals[rng.uniform(size=batch) * bound <= dens]
            take = min(len(keep), need - got)
            out[cursor : cursor + take] = keep[:take]
            cursor += take
            got += take
    return out
