"""Spectral basis for the Matern covariance operator on the unit domain.

The covariance operator sigma^2 (alpha - Laplacian)^(-s) on [0,1] (or
[0,1]^2 with Neumann-type cosine eigenfunctions) has closed-form
eigen-pairs; this module builds the truncated eigen-expansion, evaluates
eigenfunctions, and precomputes design matrices of basis values at
observed points.

Normalization: the per-axis cosine normalizer is 1 for index 0 and
sqrt(2) otherwise, so every basis element has unit L2 norm. Without the
index-0 special case the constant mode would have norm sqrt(2) per axis
and the coefficient-sphere constraint would not hold exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

BOUNDARY_TOL = 1e-12

DEFAULT_QUAD_LEVEL_1D = 256
DEFAULT_QUAD_LEVEL_2D = 64


@dataclass(frozen=True)
class MaternHyper:
    """Hyperparameters of the Matern covariance operator.

    sigma is the marginal scale, alpha the inverse-lengthscale offset,
    s the smoothness exponent; dim is the domain dimension (1 or 2).
    """

    sigma: float
    alpha: float
    s: float
    dim: int = 1

    def __post_init__(self):
        if not (self.sigma > 0 and self.alpha > 0 and self.s > 0):
            raise ConfigError(
                f"sigma, alpha, s must be positive, got "
                f"({self.sigma}, {self.alpha}, {self.s})"
            )
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")


def eigenvalue(hyper: MaternHyper, index) -> float:
    """Eigenvalue (prior variance) of a single basis mode.

    In 1D the mode with integer index i has eigenvalue
    sigma^2 (alpha + pi^2 i^2)^(-s); in 2D, with index pair (i1, i2),
    sigma^2 (alpha + pi^2 (i1^2 + i2^2))^(-s).
    """
    idx = _as_index(index, hyper.dim)
    freq = float(sum(i * i for i in idx))
    return hyper.sigma**2 * (hyper.alpha + math.pi**2 * freq) ** (-hyper.s)


def _as_index(index, dim: int) -> tuple:
    if dim == 1:
        if np.ndim(index) != 0:
            (index,) = index
        idx = (int(index),)
    else:
        i1, i2 = index
        idx = (int(i1), int(i2))
    if any(i < 0 for i in idx):
        raise ConfigError(f"index components must be >= 0, got {index}")
    return idx


def _axis_normalizer(i: int) -> float:
    return 1.0 if i == 0 else math.sqrt(2.0)


def eigenfunction(index, x) -> float:
    """Evaluate one orthonormal cosine eigenfunction at a point.

    1D: c_i cos(pi i x); 2D: c_i1 c_i2 cos(pi i1 x1) cos(pi i2 x2),
    where c_0 = 1 and c_i = sqrt(2) for i >= 1.
    """
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    dim = pt.shape[0]
    idx = _as_index(index, dim)
    _validate_unit_point(pt)
    value = 1.0
    for axis, i in enumerate(idx):
        value *= _axis_normalizer(i) * math.cos(math.pi * i * pt[axis])
    return value


def _validate_unit_point(pt: np.ndarray, row: int | None = None):
    for axis, coord in enumerate(pt):
        if not (-BOUNDARY_TOL <= coord <= 1.0 + BOUNDARY_TOL):
            where = f"coordinate {axis}" + (f" of row {row}" if row is not None else "")
            raise DomainError(f"point outside unit domain: {where} = {coord}")


@dataclass(frozen=True)
class BasisSpec:
    """A truncated eigen-expansion: ordered indices plus eigenvalues.

    1D indices run 0..max_index; 2D indices are all pairs (i1, i2) with
    0 <= i1, i2 <= max_index, in lexicographic order. The ordering is
    part of the serialization contract: coefficient vectors are aligned
    with it.
    """

    hyper: MaternHyper
    max_index: int
    indices: tuple = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, hyper: MaternHyper, max_index: int) -> "BasisSpec":
        if max_index < 0:
            raise ConfigError(f"max_index must be >= 0, got {max_index}")
        if hyper.dim == 1:
            indices = tuple((i,) for i in range(max_index + 1))
        else:
            indices = tuple(
                (i1, i2)
                for i1 in range(max_index + 1)
                for i2 in range(max_index + 1)
            )
        eigs = np.array([eigenvalue(hyper, idx) for idx in indices])
        return cls(hyper=hyper, max_index=max_index, indices=indices, eigenvalues=eigs)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def dim(self) -> int:
        return self.hyper.dim

    def sup_norms(self) -> np.ndarray:
        """Sup norm of each basis element (product of axis normalizers)."""
        return np.array(
            [math.prod(_axis_normalizer(i) for i in idx) for idx in self.indices]
        )

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Basis values at many points: matrix of shape (N, size).

        ``points`` is (N, dim) or (N,) in 1D; all points must lie in the
        unit domain up to the boundary tolerance.
        """
        pts = as_points(points, self.dim)
        bad = (pts < -BOUNDARY_TOL) | (pts > 1.0 + BOUNDARY_TOL)
        if bad.any():
            n, axis = map(int, np.argwhere(bad)[0])
            raise DomainError(
                f"point outside unit domain: coordinate {axis} of row {n} "
                f"= {pts[n, axis]}"
            )
        pts = np.clip(pts, 0.0, 1.0)
        axis_vals = []
        for axis in range(self.dim):
            i = np.arange(self.max_index + 1)
            c = np.where(i == 0, 1.0, math.sqrt(2.0))
            axis_vals.append(c * np.cos(math.pi * np.outer(pts[:, axis], i)))
        if self.dim == 1:
            return axis_vals[0]
        idx = np.asarray(self.indices)
        return axis_vals[0][:, idx[:, 0]] * axis_vals[1][:, idx[:, 1]]

    def to_json(self) -> str:
        h = self.hyper
        return json.dumps(
            {"sigma": h.sigma, "alpha": h.alpha, "s": h.s, "dim": h.dim,
             "max_index": self.max_index}
        )

    @classmethod
    def from_json(cls, text: str) -> "BasisSpec":
        obj = json.loads(text)
        hyper = MaternHyper(obj["sigma"], obj["alpha"], obj["s"], obj["dim"])
        return cls.build(hyper, obj["max_index"])


def as_points(points, dim: int) -> np.ndarray:
    """Coerce input to an (N, dim) float array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim == 1 else pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ConfigError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class DesignMatrix:
    """Precomputed basis values at the observations (N x B)."""

    values: np.ndarray

    @property
    def point_count(self) -> int:
        return self.values.shape[0]

    @property
    def basis_count(self) -> int:
        return self.values.shape[1]


def build_design_matrix(spec: BasisSpec, data) -> DesignMatrix:
    """Evaluate every basis element at every observation.

    ``data`` may be a Dataset or a bare point array. An empty dataset
    yields a 0 x B matrix.
    """
    points = getattr(data, "points", data)
    pts = as_points(points, spec.dim) if np.size(points) else np.empty((0, spec.dim))
    if pts.shape[0] == 0:
        return DesignMatrix(values=np.empty((0, spec.size)))
    return DesignMatrix(values=spec.evaluate(pts))


def quadrature_grid(dim: int, level: int):
    """Gauss-Legendre nodes and weights on the unit domain.

    Returns ``(nodes, weights)`` with nodes of shape (level,) in 1D and
    (level^2, 2) in 2D (tensor product); weights sum to 1.
    """
    if level < 2:
        raise ConfigError(f"quadrature level must be >= 2, got {level}")
    t, w = np.polynomial.legendre.leggauss(level)
    x = 0.5 * (t + 1.0)
    w = 0.5 * w
    if dim == 1:
        return x, w
    if dim == 2:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        nodes = np.column_stack([xx.ravel(), yy.ravel()])
        weights = np.outer(w, w).ravel()
        return nodes, weights
    raise ConfigError(f"dim must be 1 or 2, got {dim}")


def default_quadrature(dim: int, level: int | None = None):
    """Quadrature at the package default level for the given dimension."""
    if level is None:
        level = DEFAULT_QUAD_LEVEL_1D if dim == 1 else DEFAULT_QUAD_LEVEL_2D
    return quadrature_grid(dim, level)


def gram_matrix(spec: BasisSpec, level: int | None = None) -> np.ndarray:
    """Quadrature Gram matrix of the basis (identity up to quadrature error)."""
    nodes, weights = default_quadrature(spec.dim, level)
    phi = spec.evaluate(nodes)
    return phi.T @ (weights[:, None] * phi)
