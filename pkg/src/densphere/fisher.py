"""Numerical checks of the Fisher-geometry identities behind the model.

The nonparametric Fisher information metric on densities equals the
flat L2 metric on square-root densities; working on the unit sphere of
square roots therefore gives closed-form geodesics. This module
verifies those identities by quadrature and measures how fast geodesic
flows on a truncated coefficient sphere approach the flow of the full
(high-dimensional proxy) sphere.

The square-root map is taken onto the unit sphere q = sqrt(p); the
radius-2 convention that makes the map an exact isometry only rescales
distances and is not used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import as_points, default_quadrature
from .errors import DegenerateTruncationError, NumericError, SingularDensityError
from .hmc import make_rng
from .sphere import project_to_tangent

DENSITY_FLOOR = 1e-12

COEFF_DECAY_EXPONENT = 1.1  # variance i^-2.2, square-summable
DEFAULT_AMBIENT_DIM = 512
DEFAULT_TIME_HORIZON = 3.0
DEFAULT_TIME_POINTS = 201
BOUND_SLACK = 1e-9


def _node_values(evaluator, nodes) -> np.ndarray:
    vals = np.asarray(evaluator(nodes), dtype=float)
    if vals.shape != (nodes.shape[0] if nodes.ndim > 1 else len(nodes),):
        vals = vals.reshape(-1)
    return vals


@dataclass(frozen=True)
class DensityFunction:
    """A density given by a pointwise evaluator, checked by quadrature.

    The evaluator maps an (N, dim) array of unit-domain points to N
    values; it must be non-negative at the quadrature nodes and
    integrate to 1 within 1e-6 at the stated level.
    """

    evaluator: Callable
    dim: int = 1
    level: int | None = None

    def __post_init__(self):
        nodes, weights = default_quadrature(self.dim, self.level)
        vals = _node_values(self.evaluator, as_points(nodes, self.dim))
        if vals.min() < -1e-12:
            raise NumericError(f"density negative at a quadrature node: {vals.min():.3e}")
        total = float(weights @ vals)
        if abs(total - 1.0) > 1e-6:
            raise NumericError(f"density integrates to {total}, not 1")
        object.__setattr__(self, "_nodes", as_points(nodes, self.dim))
        object.__setattr__(self, "_weights", weights)
        object.__setattr__(self, "_values", vals)

    def __call__(self, points) -> np.ndarray:
        return _node_values(self.evaluator, as_points(points, self.dim))


@dataclass(frozen=True)
class TangentFunction:
    """A perturbation direction for densities: integrates to zero."""

    evaluator: Callable
    dim: int = 1
    level: int | None = None

    def __post_init__(self):
        nodes, weights = default_quadrature(self.dim, self.level)
        vals = _node_values(self.evaluator, as_points(nodes, self.dim))
        total = float(weights @ vals)
        if abs(total) > 1e-8:
            raise NumericError(f"tangent function integrates to {total}, not 0")
        object.__setattr__(self, "_nodes", as_points(nodes, self.dim))
        object.__setattr__(self, "_weights", weights)
        object.__setattr__(self, "_values", vals)

    def __call__(self, points) -> np.ndarray:
        return _node_values(self.evaluator, as_points(points, self.dim))


def _density_at(p: DensityFunction, nodes) -> np.ndarray:
    vals = p(nodes)
    if vals.min() < DENSITY_FLOOR:
        node = int(np.argmin(vals))
        raise SingularDensityError(
            f"density below {DENSITY_FLOOR} at quadrature node {node}", where=node
        )
    return vals


def fisher_metric(p: DensityFunction, phi: TangentFunction, psi: TangentFunction) -> float:
    """Fisher inner product of two tangent directions at p: integral of
    phi psi / p over the domain, by quadrature at p's level."""
    nodes, weights = p._nodes, p._weights
    pv = _density_at(p, nodes)
    return float(weights @ (phi(nodes) * psi(nodes) / pv))


def isometry_residual(p: DensityFunction, phi: TangentFunction, psi: TangentFunction) -> float:
    """Gap between the Fisher metric and the flat L2 product of the
    pushed-forward directions phi/sqrt(p), psi/sqrt(p).

    Identically zero in exact arithmetic; this guards quadrature-grid
    mismatches (the L2 side is integrated at the finer of the two
    tangent levels).
    """
    g = fisher_metric(p, phi, psi)
    if (phi._nodes.shape == psi._nodes.shape) and np.array_equal(phi._nodes, psi._nodes):
        nodes, weights = phi._nodes, phi._weights
    else:
        finer = phi if len(phi._weights) >= len(psi._weights) else psi
        nodes, weights = finer._nodes, finer._weights
    root = np.sqrt(_density_at(p, nodes))
    l2 = float(weights @ ((phi(nodes) / root) * (psi(nodes) / root)))
    return abs(g - l2)


def density_geodesic(p0: DensityFunction, f: TangentFunction, t: float) -> DensityFunction:
    """Flow p0 for time t along the density-space geodesic directed by f.

    The square root q0 = sqrt(p0) moves on the unit sphere with initial
    direction f / (2 sqrt(p0)), rescaled to unit L2 norm so t is arc
    length; the result is the squared flowed square root and integrates
    to 1 by construction.
    """
    nodes, weights = p0._nodes, p0._weights
    p0v = _density_at(p0, nodes)
    w = f(nodes) / (2.0 * np.sqrt(p0v))
    speed = math.sqrt(float(weights @ w**2))
    if speed == 0.0:
        raise NumericError("zero geodesic direction")
    c, s = math.cos(t), math.sin(t)

    def evaluator(points):
        root = np.sqrt(_node_values(p0.evaluator, points))
        direction = _node_values(f.evaluator, points) / (2.0 * root * speed)
        return (root * c + direction * s) ** 2

    return DensityFunction(evaluator, dim=p0.dim, level=p0.level)


def truncate_and_normalize(q: np.ndarray, keep: int) -> np.ndarray:
    """First ``keep`` coordinates, renormalized to the unit sphere."""
    head = q[:keep]
    norm = np.linalg.norm(head)
    if norm == 0.0:
        raise DegenerateTruncationError(f"first {keep} coordinates are all zero")
    return head / norm


def truncate_velocity(v: np.ndarray, q_trunc: np.ndarray, target_norm: float) -> np.ndarray:
    """Truncate, project onto the tangent space at the truncated point,
    and rescale to the requested speed."""
    head = project_to_tangent(q_trunc, v[: len(q_trunc)])
    norm = np.linalg.norm(head)
    if norm == 0.0:
        raise DegenerateTruncationError("truncated velocity is zero after projection")
    return head * (target_norm / norm)


@dataclass(frozen=True)
class ConvergenceReport:
    truncation: int
    f0: float
    max_f: float
    integral_f: float
    bound_violations: int


def _flow_closed_form(q0, v0, times):
    alpha = np.linalg.norm(v0)
    ct = np.cos(alpha * times)[:, None]
    st = np.sin(alpha * times)[:, None]
    pos = q0[None, :] * ct + (v0 / alpha)[None, :] * st
    vel = -alpha * q0[None, :] * st + v0[None, :] * ct
    return pos, vel


def geodesic_convergence_trial(
    ambient_dim: int,
    truncation: int,
    seed: int,
    horizon: float = DEFAULT_TIME_HORIZON,
    time_points: int = DEFAULT_TIME_POINTS,
) -> ConvergenceReport:
    """Distance between a full and a truncated geodesic flow.

    A random unit-speed state (q0, v0) is drawn in the ambient
    dimension (coefficients Gaussian with variance i^-2.2, then
    normalized), truncated to the leading coordinates, and both flows
    are evaluated in closed form on a uniform time grid. Reported are
    the squared-distance function f(t) = |dq|^2 + |dv|^2 at zero, its
    maximum over the grid, its trapezoidal integral, and the number of
    grid times violating the exponential growth bound
    f(t) <= f(0) exp(t (1 - |v0|^2)) (plus slack 1e-9).
    """
    if not 2 <= truncation <= ambient_dim:
        raise NumericError(
            f"need 2 <= truncation <= ambient_dim, got {truncation}, {ambient_dim}"
        )
    rng = make_rng(seed)
    sd = np.arange(1, ambient_dim + 1, dtype=float) ** (-COEFF_DECAY_EXPONENT)
    q0 = rng.standard_normal(ambient_dim) * sd
    q0 /= np.linalg.norm(q0)
    v0 = project_to_tangent(q0, rng.standard_normal(ambient_dim) * sd)
    v0 /= np.linalg.norm(v0)

    q_t = truncate_and_normalize(q0, truncation)
    v_t = truncate_velocity(v0, q_t, target_norm=1.0)

    times = np.linspace(0.0, horizon, time_points)
    pos_full, vel_full = _flow_closed_form(q0, v0, times)
    pos_trunc, vel_trunc = _flow_closed_form(q_t, v_t, times)
    pad = np.zeros((time_points, ambient_dim - truncation))
    dq = pos_full - np.hstack([pos_trunc, pad])
    dv = vel_full - np.hstack([vel_trunc, pad])
    f = np.sum(dq**2, axis=1) + np.sum(dv**2, axis=1)

    speed_sq = float(v0 @ v0)
    bound = f[0] * np.exp(times * (1.0 - speed_sq)) + BOUND_SLACK
    return ConvergenceReport(
        truncation=truncation,
        f0=float(f[0]),
        max_f=float(f.max()),
        integral_f=float(np.trapezoid(f, times)),
        bound_violations=int(np.sum(f > bound)),
    )


def convergence_table(
    truncations=(10, 20, 40, 80),
    ambient_dim: int = DEFAULT_AMBIENT_DIM,
    seed: int = 0,
    horizon: float = DEFAULT_TIME_HORIZON,
) -> list[ConvergenceReport]:
    """Convergence trials for several truncation levels at a shared seed."""
    return [
        geodesic_convergence_trial(ambient_dim, trunc, seed, horizon)
        for trunc in truncations
    ]
