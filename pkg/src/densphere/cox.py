"""Cox-process intensity from a density chain and a Gamma total mass.

The intensity is modeled as a positive total mass times a density,
mu(s) = M p(s). The point-process likelihood then factors in M and p,
so with a Gamma(a, b) prior (shape-rate; the rate update below assumes
the unit-measure domain) the mass posterior is the exact conjugate
Gamma(a + N, b + 1), independent of the density posterior.

The mass posterior depends on the data only through the event count N,
itself a single Poisson realization, so this formulation is most useful
when real prior information about M is available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec
from .errors import ConfigError
from .hmc import Chain
from .summarize import density_values

DEFAULT_PRIOR = (1.0, 1.0)


@dataclass(frozen=True)
class GammaPrior:
    """Gamma distribution in shape-rate parameterization."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ConfigError(f"Gamma parameters must be positive, got ({self.a}, {self.b})")

    @property
    def mean(self) -> float:
        return self.a / self.b

    @property
    def variance(self) -> float:
        return self.a / self.b**2

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        return rng.gamma(shape=self.a, scale=1.0 / self.b, size=size)


def mass_posterior(prior: GammaPrior, count: int) -> GammaPrior:
    """Exact conjugate update of the total mass given the event count."""
    if count < 0:
        raise ConfigError(f"event count must be >= 0, got {count}")
    return GammaPrior(prior.a + count, prior.b + 1.0)


def intensity_draws(
    chain: Chain,
    basis: BasisSpec,
    prior: GammaPrior,
    count: int,
    grid: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-draw intensity values on the grid (unit-domain coordinates).

    Each density draw is scaled by an independent mass sampled from the
    conjugate posterior; independence is exact because the likelihood
    factors. Each row integrates to its sampled mass.
    """
    if chain.n_draws == 0:
        raise ConfigError("chain has no stored draws")
    posterior = mass_posterior(prior, count)
    masses = posterior.sample(rng, size=chain.n_draws)
    return masses[:, None] * density_values(chain.draws, basis, grid)
