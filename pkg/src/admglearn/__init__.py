"""admglearn: causal discovery of acyclic directed mixed graphs.

Estimates directed and bidirected ("latent confounder") edges from
observational data by continuous optimization of a multivariate
generalized normal likelihood; non-Gaussian errors make causal directions
identifiable rather than just the Markov equivalence class.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .constraints import ConstraintKind, h_gradient, h_value
from .exceptions import EstimationError, NumericError, ParameterError
from .graph import (AdmgStructure, CovarianceFit, Parameters, fit_params_to_covariance,
                    implied_covariance, is_acyclic, is_ancestral, is_bow_free, threshold)
from .metrics import PrfScores, arrowhead_prf, skeleton_prf, tail_prf
from .mggd import (BetaEstimate, MggdParams, covariance_factor, estimate_beta,
                   estimate_beta_dataset, log_density, log_likelihood, sample)
from .optimizer import (FitResult, OptimizerConfig, PriorKnowledge, apply_prior_knowledge,
                        discover, discover_gaussian, inner_minimize)
from .simgen import SimConfig, generate_data, random_admg, scenario_grid

__all__ = [
    "KERNEL_BACKEND", "ConstraintKind", "h_gradient", "h_value",
    "EstimationError", "NumericError", "ParameterError",
    "AdmgStructure", "CovarianceFit", "Parameters", "fit_params_to_covariance",
    "implied_covariance", "is_acyclic", "is_ancestral", "is_bow_free", "threshold",
    "PrfScores", "arrowhead_prf", "skeleton_prf", "tail_prf",
    "BetaEstimate", "MggdParams", "covariance_factor", "estimate_beta",
    "estimate_beta_dataset", "log_density", "log_likelihood", "sample",
    "FitResult", "OptimizerConfig", "PriorKnowledge", "apply_prior_knowledge",
    "discover", "discover_gaussian", "inner_minimize",
    "SimConfig", "generate_data", "random_admg", "scenario_grid",
    "__version__",
]
