"""Square-root density model with a spectral Gaussian prior.

A density on the unit domain is represented by a unit-norm coefficient
vector q against the orthonormal cosine basis: the square-root density
is sum_b q_b phi_b(x) and the density its square, so non-negativity and
unit integral hold by construction. The coefficient prior is Gaussian
with the basis eigenvalues as variances, restricted to the sphere; this
module evaluates the resulting log-posterior, its gradient, and
densities. Gradients are ambient; tangent projection is left to the
sampler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, DesignMatrix, as_points
from .errors import DataError, GradientSingularityError, NumericError
from .sphere import check_unit

# Observations where |q(x_n)| falls below these thresholds turn into a
# -inf log-posterior (proposal rejected) or a gradient singularity
# (trajectory aborted) instead of NaNs.
LOG_FLOOR = 1e-300
GRAD_FLOOR = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Observed points in the unit domain plus the affine map to raw
    coordinates (raw = offset + scale * unit, per axis)."""

    points: np.ndarray
    offset: np.ndarray
    scale: np.ndarray
    raw_bounds: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=float))
        object.__setattr__(self, "raw_bounds", np.asarray(self.raw_bounds, dtype=float))
        if pts.size and (pts.min() < -1e-12 or pts.max() > 1.0 + 1e-12):
            raise DataError("dataset points must lie in the unit domain")
        if np.any(self.scale <= 0):
            raise DataError(f"rescale factors must be positive, got {self.scale}")

    @classmethod
    def from_unit(cls, points, dim: int | None = None) -> "Dataset":
        """Wrap points already in the unit domain with the identity map."""
        pts = as_points(points, dim if dim is not None else np.atleast_2d(points).shape[-1])
        d = pts.shape[1]
        bounds = (
            np.column_stack([pts.min(axis=0), pts.max(axis=0)])
            if pts.size
            else np.tile([0.0, 1.0], (d, 1))
        )
        return cls(points=pts, offset=np.zeros(d), scale=np.ones(d), raw_bounds=bounds)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def scale_product(self) -> float:
        """Jacobian of the unit-to-raw map; divides unit-domain densities."""
        return float(np.prod(self.scale))

    def to_raw(self, unit_points: np.ndarray) -> np.ndarray:
        return self.offset + np.asarray(unit_points) * self.scale

    def to_unit(self, raw_points: np.ndarray) -> np.ndarray:
        return (np.asarray(raw_points) - self.offset) / self.scale


@dataclass(frozen=True)
class SqrtDensityState:
    """Unit-norm coefficient vector paired with its basis."""

    coeffs: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        object.__setattr__(self, "coeffs", check_unit(np.asarray(self.coeffs, dtype=float)))
        if len(self.coeffs) != self.basis.size:
            raise DataError(
                f"coefficient length {len(self.coeffs)} does not match basis size {self.basis.size}"
            )


def eval_sqrt_density(state: SqrtDensityState, x) -> np.ndarray | float:
    """Square-root density at one or many points (sign carries no meaning)."""
    pts = as_points(x, state.basis.dim)
    vals = state.basis.evaluate(pts) @ state.coeffs
    return float(vals[0]) if np.ndim(x) == 0 or (state.basis.dim > 1 and np.ndim(x) == 1) else vals


def eval_density(state: SqrtDensityState, x) -> np.ndarray | float:
    """Density at one or many points: the squared square-root density."""
    vals = eval_sqrt_density(state, x)
    return vals**2 if isinstance(vals, float) else np.square(vals)


def _check_lengths(coeffs: np.ndarray, design: DesignMatrix, eigenvalues=None):
    if design.values.shape[1] != len(coeffs):
        raise DataError(
            f"design matrix has {design.values.shape[1]} columns for {len(coeffs)} coefficients"
        )
    if eigenvalues is not None and len(eigenvalues) != len(coeffs):
        raise DataError("eigenvalue list does not match coefficient length")


def log_posterior(coeffs: np.ndarray, design: DesignMatrix, eigenvalues) -> float:
    """Unnormalized log-posterior of a coefficient vector.

    2 sum_n log|q(x_n)| - (1/2) sum_b q_b^2 / lambda_b^2, with
    q(x_n) read off the design matrix. Returns -inf when any
    observation sits numerically on a zero of q. Coefficients are
    evaluated as given; the sphere constraint is the sampler's job.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise NumericError("non-finite coefficients in log_posterior")
    _check_lengths(coeffs, design, eigenvalues)
    prior = -0.5 * float(np.sum(coeffs**2 / eigenvalues))
    if design.point_count == 0:
        return prior
    qv = design.values @ coeffs
    aqv = np.abs(qv)
    if aqv.min() < LOG_FLOOR:
        return -np.inf
    return 2.0 * float(np.sum(np.log(aqv))) + prior


def log_likelihood_only(coeffs: np.ndarray, design: DesignMatrix) -> float:
    """Data term alone: 2 sum_n log|q(x_n)|, same zero guard as the posterior."""
    coeffs = np.asarray(coeffs, dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise NumericError("non-finite coefficients in log_likelihood_only")
    _check_lengths(coeffs, design)
    if design.point_count == 0:
        return 0.0
    aqv = np.abs(design.values @ coeffs)
    if aqv.min() < LOG_FLOOR:
        return -np.inf
    return 2.0 * float(np.sum(np.log(aqv)))


def log_posterior_grad(coeffs: np.ndarray, design: DesignMatrix, eigenvalues) -> np.ndarray:
    """Ambient gradient of the log-posterior.

    Component j: 2 sum_n Phi(n, j) / q(x_n) - q_j / lambda_j^2. An
    observation with |q(x_n)| below the gradient floor raises
    GradientSingularityError carrying n; the sampler maps that to a
    forced rejection.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise NumericError("non-finite coefficients in log_posterior_grad")
    _check_lengths(coeffs, design, eigenvalues)
    prior_grad = -coeffs / eigenvalues
    if design.point_count == 0:
        return prior_grad
    qv = design.values @ coeffs
    small = np.abs(qv) < GRAD_FLOOR
    if small.any():
        n = int(np.argmax(small))
        raise GradientSingularityError(
            f"|q(x_n)| below {GRAD_FLOOR} at observation {n}", where=n
        )
    return 2.0 * (design.values.T @ (1.0 / qv)) + prior_grad


def log_posterior_hess(coeffs: np.ndarray, design: DesignMatrix, eigenvalues) -> np.ndarray:
    """Ambient Hessian of the log-posterior (used by the Newton initializer)."""
    coeffs = np.asarray(coeffs, dtype=float)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    _check_lengths(coeffs, design, eigenvalues)
    hess = np.diag(-1.0 / eigenvalues)
    if design.point_count == 0:
        return hess
    qv = design.values @ coeffs
    small = np.abs(qv) < GRAD_FLOOR
    if small.any():
        n = int(np.argmax(small))
        raise GradientSingularityError(
            f"|q(x_n)| below {GRAD_FLOOR} at observation {n}", where=n
        )
    scaled = design.values / qv[:, None]
    return hess - 2.0 * (scaled.T @ scaled)
