"""Synthetic bow-free ADMG generation and data synthesis.

Structures are drawn pairwise: one uniform draw per unordered pair decides
between a directed edge (weight from +/-[0.5, 2.0]), a bidirected edge
(strength from +/-[0.4, 0.7]), or no edge.  Directed edges initially point
from lower to higher index, so acyclicity and bow-freeness hold by
construction; labels are then randomly permuted so learners cannot read
the causal order off the column order.
"""

from dataclasses import dataclass

import numpy as np

from . import mggd
from .exceptions import ParameterError
from .graph import Parameters, implied_covariance, is_bow_free, threshold

DIRECTED_WEIGHT_RANGE = (0.5, 2.0)
BIDIRECTED_WEIGHT_RANGE = (0.4, 0.7)
DIAG_OFFSET_RANGE = (0.1, 0.5)


@dataclass(frozen=True)
class SimConfig:
    """One simulation scenario."""

    d: int = 5
    n: int = 500
    beta: float = 1.0
    p_directed: float = 0.3
    p_bidirected: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise ParameterError("need at least two variables")
        if self.n < 1:
            raise ParameterError("need at least one sample")
        if not (0 <= self.p_directed and 0 <= self.p_bidirected
                and self.p_directed + self.p_bidirected <= 1):
            raise ParameterError("edge probabilities must be nonnegative and sum to at most 1")


def _signed_uniform(rng, lo, hi):
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi))


def ensure_positive_definite(omega, rng=None):
    """Make a symmetric matrix strictly diagonally dominant, hence PD.

    Each diagonal entry becomes |omega_ii| + sum_j |omega_ij| + offset with
    the offset drawn uniformly from [0.1, 0.5].
    """
    omega = np.array(omega, dtype=float)
    if not np.allclose(omega, omega.T, atol=1e-12):
        raise ParameterError("omega must be symmetric")
    rng = np.random.default_rng(rng)
    d = omega.shape[0]
    off_abs = np.abs(omega).sum(axis=1) - np.abs(np.diag(omega))
    offsets = rng.uniform(*DIAG_OFFSET_RANGE, size=d)
    omega[np.diag_indices(d)] = np.abs(np.diag(omega)) + off_abs + offsets
    return omega


def random_admg(config):
    """Draw a random bow-free parameterization (delta, omega)."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=config.seed, spawn_key=(0,)))
    d = config.d
    delta = np.zeros((d, d))
    omega = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            u = rng.uniform()
            if u < config.p_directed:
                delta[i, j] = _signed_uniform(rng, *DIRECTED_WEIGHT_RANGE)
            elif u < config.p_directed + config.p_bidirected:
                w = _signed_uniform(rng, *BIDIRECTED_WEIGHT_RANGE)
                omega[i, j] = omega[j, i] = w
    omega[np.diag_indices(d)] = rng.uniform(*BIDIRECTED_WEIGHT_RANGE, size=d)
    omega = ensure_positive_definite(omega, rng)

    perm = rng.permutation(d)  # relabel so index order carries no signal
    delta = delta[np.ix_(perm, perm)]
    omega = omega[np.ix_(perm, perm)]
    return Parameters(delta=delta, omega=omega)


def generate_data(params, n, beta, seed):
    """Sample n rows of the linear SEM with generalized normal errors.

    Errors are drawn with dispersion omega and shape beta, then propagated
    through x = eps (I - delta)^{-1}; columns are centered.  Note omega is
    the error dispersion, not the error covariance, unless beta = 1.
    """
    if not is_bow_free(threshold(params, 0.0)):
        raise ParameterError("params must describe a bow-free acyclic graph")
    d = params.d
    errors = mggd.sample(n, mggd.MggdParams(mu=np.zeros(d), sigma=params.omega, beta=beta), seed)
    X = np.linalg.solve((np.eye(d) - params.delta).T, errors.T).T
    return X - X.mean(axis=0)


def scenario_grid():
    """The 18 benchmark scenarios: n in {100, 500, 1000} x d in {5, 10} x beta in {1, 3, 5}.

    Ordered with n outermost, then d, then beta.
    """
    return [
        SimConfig(d=d, n=n, beta=float(beta))
        for n in (100, 500, 1000)
        for d in (5, 10)
        for beta in (1, 3, 5)
    ]


def implied_data_covariance(params):
    """Covariance of the generated data at beta = 1 (dispersion = covariance)."""
    return implied_covariance(params)
