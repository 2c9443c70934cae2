"""Multivariate generalized Gaussian (power-exponential) distribution.

Density, log-likelihood, sampling, and shape-parameter estimation.  The
density is

    f(x | mu, sigma, beta) = Gamma(p/2) / (pi^{p/2} Gamma(p/(2 beta)))
                             * beta / (2^{p/(2 beta)} |sigma|^{1/2})
                             * exp(-1/2 ((x-mu)' sigma^{-1} (x-mu))^beta)

with beta = 1 the multivariate normal.  Note that sigma is a dispersion
matrix: the covariance of the distribution is c * sigma where

    c = 2^{1/beta} Gamma((p+2)/(2 beta)) / (p Gamma(p/(2 beta)))

and c = 1 only at beta = 1.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import brentq
from scipy.special import gammaln

from .exceptions import EstimationError, ParameterError

_SYM_TOL = 1e-12
_BETA_LO = 0.2
_BETA_HI = 20.0


@dataclass(frozen=True)
class MggdParams:
    """Location mu (p,), dispersion sigma (p, p) SPD, shape beta > 0."""

    mu: np.ndarray
    sigma: np.ndarray
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "mu", np.atleast_1d(np.asarray(self.mu, dtype=float)))
        object.__setattr__(self, "sigma", np.atleast_2d(np.asarray(self.sigma, dtype=float)))
        object.__setattr__(self, "beta", float(self.beta))
        p = self.mu.shape[0]
        if self.sigma.shape != (p, p):
            raise ParameterError(f"sigma must be {p}x{p}, got {self.sigma.shape}")
        if not np.all(np.abs(self.sigma - self.sigma.T) <= _SYM_TOL):
            raise ParameterError("sigma must be symmetric")
        if self.beta <= 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")

    @property
    def p(self):
        return self.mu.shape[0]


def _chol(params):
    """Cholesky factor of sigma; rejects non-PD dispersion."""
    try:
        return cholesky(params.sigma, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("sigma is not positive definite") from exc


def _log_norm_const(p, beta, logdet_sigma):
    """Log of the density's normalizing constant."""
    return (gammaln(p / 2.0) - (p / 2.0) * np.log(np.pi) - gammaln(p / (2.0 * beta))
            + np.log(beta) - (p / (2.0 * beta)) * np.log(2.0) - 0.5 * logdet_sigma)


def log_density(x, params):
    """Log density at a single point x of length p.

    All special functions are evaluated in log space and the determinant
    through the Cholesky factor, so small beta and large p stay finite.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (params.p,):
        raise ParameterError(f"x must have length {params.p}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("x must be finite")
    L = _chol(params)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    y = solve_triangular(L, x - params.mu, lower=True)
    q = float(y @ y)
    return _log_norm_const(params.p, params.beta, logdet) - 0.5 * q ** params.beta


def log_likelihood(X, params):
    """Sum of log_density over the rows of X (n, p)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != params.p:
        raise ParameterError(f"X must have {params.p} columns, got {X.shape[1]}")
    L = _chol(params)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    Y = solve_triangular(L, (X - params.mu).T, lower=True)
    q = np.sum(Y * Y, axis=0)
    n = X.shape[0]
    return n * _log_norm_const(params.p, params.beta, logdet) - 0.5 * float(np.sum(q ** params.beta))


def sample(n, params, seed):
    """Draw n i.i.d. rows.

    Uses the stochastic representation x = mu + R * sigma^{1/2} u with u
    uniform on the unit sphere, T ~ Gamma(p/(2 beta), scale 2) and
    R = T^{1/(2 beta)}.  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    p, beta = params.p, params.beta
    L = _chol(params)
    U = rng.standard_normal((n, p))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    T = rng.gamma(shape=p / (2.0 * beta), scale=2.0, size=n)
    R = T ** (1.0 / (2.0 * beta))
    return params.mu + (R[:, None] * U) @ L.T


def covariance_factor(beta, p):
    """Scale c with covariance = c * sigma; equals 1 at beta = 1."""
    beta = float(beta)
    return float(2.0 ** (1.0 / beta)
                 * np.exp(gammaln((p + 2.0) / (2.0 * beta)) - gammaln(p / (2.0 * beta))) / p)


def kurtosis_of_shape(beta):
    """Population kurtosis m4/m2^2 of the univariate member with shape beta."""
    beta = float(beta)
    return float(np.exp(gammaln(5.0 / (2.0 * beta)) + gammaln(1.0 / (2.0 * beta))
                        - 2.0 * gammaln(3.0 / (2.0 * beta))))


def estimate_beta(x):
    """Estimate the shape parameter of a univariate sample by kurtosis matching.

    Inverts kurt(beta) = Gamma(5/(2b)) Gamma(1/(2b)) / Gamma(3/(2b))^2 by
    bisection on [0.2, 20]; the sample kurtosis is clamped into the
    invertible range first, with out-of-range values mapping to the
    corresponding endpoint (heavy platykurtic -> cap 20, extreme
    leptokurtic -> floor 0.2).
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 20:
        raise EstimationError(f"need at least 20 samples to estimate beta, got {n}")
    xc = x - x.mean()
    m2 = float(np.mean(xc ** 2))
    if m2 <= 0.0:
        raise EstimationError("sample variance is zero; beta is undefined")
    kurt = float(np.mean(xc ** 4)) / m2 ** 2

    k_lo = kurtosis_of_shape(_BETA_HI)            # ~1.8067, the platykurtic limit of the bracket
    k_hi = min(kurtosis_of_shape(_BETA_LO), 100.0)
    kurt = min(max(kurt, k_lo), k_hi)
    if kurt <= k_lo:
        return _BETA_HI
    if kurt >= kurtosis_of_shape(_BETA_LO):
        return _BETA_LO
    return float(brentq(lambda b: kurtosis_of_shape(b) - kurt, _BETA_LO, _BETA_HI, xtol=1e-12))


@dataclass(frozen=True)
class BetaEstimate:
    """Per-column shape estimates and their maximum."""

    beta: float
    per_column: np.ndarray  # NaN where a column failed


def estimate_beta_dataset(X):
    """Estimate beta per column and take the largest.

    Estimating one shape from the pooled dataset is known to drift below 1
    on mixed data and destabilize downstream fits, hence the per-variable
    maximum rule.  Columns that fail (degenerate) are skipped; estimation
    fails only when every column does.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] < 1:
        raise ParameterError("X must have at least one column")
    per = np.full(X.shape[1], np.nan)
    for j in range(X.shape[1]):
        try:
            per[j] = estimate_beta(X[:, j])
        except EstimationError:
            continue
    if np.all(np.isnan(per)):
        raise EstimationError("beta estimation failed for every column")
    return BetaEstimate(beta=float(np.nanmax(per)), per_column=per)
