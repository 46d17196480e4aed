"""Geometry of the unit sphere embedded in R^B.

Closed-form great-circle geodesics, tangent projection, the sphere
Hessian of an ambient function, and Newton ascent along geodesics.
All functions are pure and operate on plain ndarrays; callers that need
the unit-norm or tangency invariants enforced can use the check helpers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericError, OptimizationError

UNIT_TOL = 1e-10
TANGENT_TOL = 1e-10
CRITICAL_GRAD_TOL = 1e-12

RIDGE_INITIAL = 1e-8
RIDGE_FACTOR = 10.0
RIDGE_MAX = 1.0
BACKTRACK_LIMIT = 40


def check_unit(q: np.ndarray, tol: float = UNIT_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q)
    if abs(norm - 1.0) > tol:
        raise NumericError(f"vector is not on the unit sphere: |norm - 1| = {abs(norm - 1.0):.3e}")
    return q


def check_tangent(q: np.ndarray, v: np.ndarray, tol: float = TANGENT_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    inner = abs(float(q @ v))
    if inner > tol:
        raise NumericError(f"vector is not tangent: |<q, v>| = {inner:.3e}")
    return v


def project_to_tangent(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Orthogonal projection of w onto the tangent space at q."""
    return w - q * (q @ w)


def geodesic_flow(q: np.ndarray, v: np.ndarray, t: float):
    """Flow along the great circle from (q, v) for time t.

    With a = |v|, the position is q cos(a t) + (v/a) sin(a t) and the
    velocity -a q sin(a t) + v cos(a t); a zero velocity returns the
    inputs unchanged (the continuous limit). The position is
    renormalized to unit length to suppress floating-point drift.
    """
    alpha = float(np.linalg.norm(v))
    if alpha == 0.0:
        return q.copy(), v.copy()
    c = np.cos(alpha * t)
    s = np.sin(alpha * t)
    pos = q * c + (v / alpha) * s
    vel = -alpha * s * q + c * v
    pos /= np.linalg.norm(pos)
    return pos, vel


def directional_hessian(f_grad: np.ndarray, f_hess: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hessian of an ambient function restricted to the sphere at q.

    Equals the ambient Hessian minus (grad . q) times the identity; its
    bilinear form on tangent vectors gives second derivatives of the
    function along geodesics.
    """
    f_hess = np.asarray(f_hess, dtype=float)
    asym = np.max(np.abs(f_hess - f_hess.T)) if f_hess.size else 0.0
    if asym > 1e-10:
        raise NumericError(f"Hessian is not symmetric: max asymmetry {asym:.3e}")
    radial = float(np.asarray(f_grad) @ q)
    return f_hess - radial * np.eye(len(q))


def _solve_symmetric(h: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve h y = b through a symmetric eigenfactorization.

    Raises NumericError when h is numerically singular so callers can
    fall back to ridge regularization.
    """
    w, vecs = np.linalg.eigh(h)
    scale = np.max(np.abs(w))
    if scale == 0.0 or np.min(np.abs(w)) <= 1e-14 * scale:
        raise NumericError("singular Hessian in Newton solve")
    return vecs @ ((vecs.T @ b) / w)


def _tangent_newton_direction(q: np.ndarray, hess: np.ndarray, g_t: np.ndarray) -> np.ndarray:
    """Newton direction from the Hessian restricted to the tangent space.

    Solves (P hess P + k q q^T) y = g_t with P = I - q q^T; the radial
    block k q q^T only completes the rank, so y is the tangent solution
    of the restricted system. Solving the ambient system and projecting
    afterwards is degenerate for quadratic objectives (the solution is
    radial and projects to zero), so the restriction is essential.
    """
    proj = np.eye(len(q)) - np.outer(q, q)
    k = -max(1.0, float(np.max(np.abs(hess))))
    h_t = proj @ hess @ proj + k * np.outer(q, q)
    return project_to_tangent(q, _solve_symmetric(h_t, g_t))


def newton_step(
    q: np.ndarray,
    f_grad: np.ndarray,
    f_hess: np.ndarray,
    objective: Callable[[np.ndarray], float] | None = None,
) -> np.ndarray:
    """One Newton ascent iteration on the sphere.

    Builds the sphere Hessian, solves the tangent-restricted Newton
    system for the direction V = -(P Hess P)^+ P grad (P the tangent
    projector), and moves along the geodesic with velocity V for unit
    time. When ``objective`` is given, a step may not decrease it
    beyond float resolution; otherwise the Hessian is ridged (shifted
    by -delta I with delta escalating from 1e-8 by factors of 10) and,
    as a last resort, a backtracking projected-gradient geodesic step
    is taken. Returns q unchanged at critical points.
    """
    q = np.asarray(q, dtype=float)
    f_grad = np.asarray(f_grad, dtype=float)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(f_grad)) and np.all(np.isfinite(f_hess))):
        raise NumericError("non-finite inputs to newton_step")
    g_t = project_to_tangent(q, f_grad)
    if np.linalg.norm(g_t) <= CRITICAL_GRAD_TOL:
        return q.copy()

    hess = directional_hessian(f_grad, f_hess, q)
    f0 = None if objective is None else float(objective(q))
    # "Increase" up to float resolution of the objective, so the final
    # Newton steps (whose gain underflows the comparison) still land.
    floor = None if f0 is None else f0 - 1e-12 * (1.0 + abs(f0))

    delta = 0.0
    while delta <= RIDGE_MAX:
        try:
            y = _tangent_newton_direction(q, hess - delta * np.eye(len(q)), g_t)
        except NumericError:
            y = None
        if y is not None:
            cand, _ = geodesic_flow(q, -y, 1.0)
            if objective is None:
                return cand
            f_cand = float(objective(cand))
            if np.isfinite(f_cand) and f_cand >= floor:
                return cand
        delta = RIDGE_INITIAL if delta == 0.0 else delta * RIDGE_FACTOR

    if objective is None:
        raise NumericError("Newton solve failed at every ridge level")

    # Projected-gradient geodesic step with backtracking.
    t = 1.0
    for _ in range(BACKTRACK_LIMIT):
        cand, _ = geodesic_flow(q, g_t, t)
        f_cand = float(objective(cand))
        if np.isfinite(f_cand) and f_cand >= floor:
            return cand
        t *= 0.5
    return q.copy()


@dataclass(frozen=True)
class SphereObjective:
    """Callbacks for a scalar function on the sphere."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class NewtonResult:
    point: np.ndarray
    iterations: int
    tangent_grad_norm: float
    converged: bool


def newton_optimize(
    objective: SphereObjective,
    q0: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> NewtonResult:
    """Iterate newton_step until the tangent gradient is below tol.

    Stops early when a step makes no progress (the backtracking
    fallback returned the current point). Raises OptimizationError,
    carrying the last valid iterate, when the objective or gradient
    becomes non-finite.
    """
    if tol <= 0:
        raise NumericError(f"tol must be positive, got {tol}")
    q = np.asarray(q0, dtype=float).copy()
    iterations = 0
    for _ in range(max_iter):
        try:
            grad = np.asarray(objective.grad(q), dtype=float)
            value = float(objective.value(q))
        except Exception as exc:
            raise OptimizationError(f"objective evaluation failed: {exc}", last_iterate=q) from exc
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise OptimizationError("objective returned non-finite value", last_iterate=q)
        gnorm = float(np.linalg.norm(project_to_tangent(q, grad)))
        if gnorm <= tol:
            return NewtonResult(q, iterations, gnorm, True)
        q_next = newton_step(q, grad, objective.hess(q), objective=objective.value)
        if np.array_equal(q_next, q):
            return NewtonResult(q, iterations, gnorm, False)
        q = q_next
        iterations += 1
    grad = np.asarray(objective.grad(q), dtype=float)
    gnorm = float(np.linalg.norm(project_to_tangent(q, grad)))
    return NewtonResult(q, iterations, gnorm, gnorm <= tol)
