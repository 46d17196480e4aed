"""Hamiltonian Monte Carlo on the coefficient sphere.

The Hamiltonian splits into a potential part (the negative
log-posterior) and a kinetic part (half the squared velocity norm, the
velocity constrained to the tangent space). Velocity kicks perturb the
tangent velocity by the projected gradient; position updates follow the
sphere's geodesics exactly, so the integrator is volume-preserving and
time-reversible and the only Metropolis correction needed comes from
the potential-kick discretization.

The target is the posterior density with respect to the uniform
(Hausdorff) measure on the embedded sphere, so no chart-volume
correction term enters the energy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, build_design_matrix
from .errors import ConfigError, GradientSingularityError, TrajectoryError
from .model import (
    Dataset,
    SqrtDensityState,
    log_posterior,
    log_posterior_grad,
    log_posterior_hess,
)
from .sphere import (
    NewtonResult,
    SphereObjective,
    geodesic_flow,
    newton_optimize,
    project_to_tangent,
)

DRAW_NORM_TOL = 1e-8


def make_rng(seed, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; (seed, stream) fully determines the output."""
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


@dataclass(frozen=True)
class ChainConfig:
    iterations: int
    burn_in: int = 0
    step_size: float = 0.01
    leapfrog_steps: int = 20
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ConfigError(f"step_size must be positive, got {self.step_size}")
        if self.leapfrog_steps < 1:
            raise ConfigError(f"leapfrog_steps must be >= 1, got {self.leapfrog_steps}")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError(
                f"need 0 <= burn_in < iterations, got {self.burn_in}, {self.iterations}"
            )
        if self.thin < 1:
            raise ConfigError(f"thin must be >= 1, got {self.thin}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    @property
    def stored_draws(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class Chain:
    """Stored posterior draws plus run diagnostics."""

    draws: np.ndarray
    iteration_index: np.ndarray
    log_post_draws: np.ndarray
    log_post_trace: np.ndarray
    accept_rate: float
    basis: BasisSpec
    config: ChainConfig
    newton_init: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        norms = np.linalg.norm(self.draws, axis=1)
        if self.draws.size and np.max(np.abs(norms - 1.0)) > DRAW_NORM_TOL:
            raise TrajectoryError("stored draw violates the unit-norm constraint")

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    def states(self):
        return [SqrtDensityState(c, self.basis) for c in self.draws]


def sample_tangent_velocity(q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Standard normal in ambient space projected to the tangent space at q."""
    return project_to_tangent(q, rng.standard_normal(len(q)))


def integrate_trajectory(q, v, step_size: float, steps: int, grad_fn):
    """Leapfrog with geodesic position updates.

    Each step is a half velocity kick by the projected gradient, a
    geodesic flight for one step size, and another half kick; the
    velocity is re-projected after every position update. A gradient
    singularity anywhere on the trajectory raises TrajectoryError
    (callers treat it as a forced rejection).
    """
    half = 0.5 * step_size
    try:
        grad = grad_fn(q)
        for _ in range(steps):
            v = v + half * project_to_tangent(q, grad)
            q, v = geodesic_flow(q, v, step_size)
            v = project_to_tangent(q, v)
            grad = grad_fn(q)
            v = v + half * project_to_tangent(q, grad)
    except GradientSingularityError as exc:
        raise TrajectoryError(f"trajectory aborted: {exc}") from exc
    return q, v


def hmc_step(q, log_post: float, config: ChainConfig, log_post_fn, grad_fn, rng):
    """One proposal: fresh tangent velocity, trajectory, Metropolis test.

    Returns (q, log_post, accepted); on rejection the position is
    unchanged. Aborted trajectories reject without consuming the
    Metropolis uniform.
    """
    v = sample_tangent_velocity(q, rng)
    h0 = -log_post + 0.5 * float(v @ v)
    try:
        q_new, v_new = integrate_trajectory(q, v, config.step_size, config.leapfrog_steps, grad_fn)
    except TrajectoryError:
        return q, log_post, False
    lp_new = log_post_fn(q_new)
    log_accept = h0 - (-lp_new + 0.5 * float(v_new @ v_new))
    if np.log(rng.uniform()) < log_accept:
        return q_new, lp_new, True
    return q, log_post, False


def newton_initialize(design, eigenvalues, size: int, tol: float = 1e-6, max_iter: int = 100):
    """Posterior-mode start for the chain via Newton ascent on the sphere.

    Starts from the constant mode. Returns (point, report dict); on any
    failure the constant mode itself is returned with a warning record.
    """
    q0 = np.zeros(size)
    q0[0] = 1.0
    objective = SphereObjective(
        value=lambda q: log_posterior(q, design, eigenvalues),
        grad=lambda q: log_posterior_grad(q, design, eigenvalues),
        hess=lambda q: log_posterior_hess(q, design, eigenvalues),
    )
    try:
        result: NewtonResult = newton_optimize(objective, q0, tol=tol, max_iter=max_iter)
        report = {
            "method": "newton",
            "iterations": result.iterations,
            "tangent_grad_norm": result.tangent_grad_norm,
            "converged": bool(result.converged),
        }
        return result.point, report
    except Exception as exc:
        report = {
            "method": "constant_mode_fallback",
            "warning": f"Newton initialization failed: {exc}",
        }
        return q0, report


def run_chain(
    data: Dataset,
    basis: BasisSpec,
    config: ChainConfig,
    init: np.ndarray | None = None,
) -> Chain:
    """Run one chain; the result is a pure function of (data, basis, config, init).

    Without an explicit init the chain starts at the Newton mode (falling
    back to the constant mode if the optimizer fails). Draws after
    burn-in are kept every ``thin`` iterations; the log-posterior trace
    covers every iteration.
    """
    started = time.perf_counter()
    design = build_design_matrix(basis, data)
    eigenvalues = basis.eigenvalues
    log_post_fn = lambda q: log_posterior(q, design, eigenvalues)
    grad_fn = lambda q: log_posterior_grad(q, design, eigenvalues)

    newton_report: dict = {"method": "explicit_init"}
    if init is None:
        init, newton_report = newton_initialize(design, eigenvalues, basis.size)
    q = np.asarray(init, dtype=float)
    q = q / np.linalg.norm(q)

    rng = make_rng(config.seed)
    log_post = log_post_fn(q)
    trace = np.empty(config.iterations)
    stored = np.empty((config.stored_draws, basis.size))
    stored_lp = np.empty(config.stored_draws)
    stored_iter = np.empty(config.stored_draws, dtype=int)
    accepted = 0
    kept = 0
    for i in range(config.iterations):
        q, log_post, ok = hmc_step(q, log_post, config, log_post_fn, grad_fn, rng)
        accepted += ok
        trace[i] = log_post
        if i >= config.burn_in and (i - config.burn_in + 1) % config.thin == 0:
            stored[kept] = q
            stored_lp[kept] = log_post
            stored_iter[kept] = i
            kept += 1
    return Chain(
        draws=stored[:kept],
        iteration_index=stored_iter[:kept],
        log_post_draws=stored_lp[:kept],
        log_post_trace=trace,
        accept_rate=accepted / config.iterations,
        basis=basis,
        config=config,
        newton_init=newton_report,
        wall_time=time.perf_counter() - started,
    )
