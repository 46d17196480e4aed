"""Bayesian nonparametric density estimation on the sphere of
square-root densities, sampled with geodesic Hamiltonian Monte Carlo."""

from .basis import (
    BasisSpec,
    DesignMatrix,
    MaternHyper,
    build_design_matrix,
    eigenfunction,
    eigenvalue,
    quadrature_grid,
)
from .cox import GammaPrior, intensity_draws, mass_posterior
from .datasets import generate_synthetic, ingest_csv
from .fisher import (
    DensityFunction,
    TangentFunction,
    density_geodesic,
    fisher_metric,
    geodesic_convergence_trial,
    isometry_residual,
)
from .hmc import Chain, ChainConfig, make_rng, run_chain
from .model import (
    Dataset,
    SqrtDensityState,
    eval_density,
    eval_sqrt_density,
    log_likelihood_only,
    log_posterior,
    log_posterior_grad,
)
from .sphere import (
    SphereObjective,
    directional_hessian,
    geodesic_flow,
    newton_optimize,
    newton_step,
    project_to_tangent,
)
from .summarize import (
    evaluate_draws,
    pointwise_summary,
    predictive_sample,
    summarize_chain,
    unit_grid,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "Chain",
    "ChainConfig",
    "Dataset",
    "DensityFunction",
    "DesignMatrix",
    "GammaPrior",
    "MaternHyper",
    "SphereObjective",
    "SqrtDensityState",
    "TangentFunction",
    "build_design_matrix",
    "density_geodesic",
    "directional_hessian",
    "eigenfunction",
    "eigenvalue",
    "eval_density",
    "eval_sqrt_density",
    "evaluate_draws",
    "fisher_metric",
    "generate_synthetic",
    "geodesic_convergence_trial",
    "geodesic_flow",
    "ingest_csv",
    "intensity_draws",
    "isometry_residual",
    "log_likelihood_only",
    "log_posterior",
    "log_posterior_grad",
    "make_rng",
    "mass_posterior",
    "newton_optimize",
    "newton_step",
    "pointwise_summary",
    "predictive_sample",
    "project_to_tangent",
    "quadrature_grid",
    "run_chain",
    "summarize_chain",
    "unit_grid",
]
