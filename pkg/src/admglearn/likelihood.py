"""Residuals, pseudo-variables, the power least-squares objective, and the
decomposed generalized normal log-likelihood.

The objective evaluated inside the primal solves is

    LS(theta) = (1/2n) sum_i ( ||X[:,i] - X delta[:,i] - Z(i) omega[:,i]||^2 )^beta

with the pseudo-variables Z held fixed (they are refreshed between primal
solves, not differentiated through).  At beta = 1 this reduces to the plain
least-squares objective of the Gaussian path.
"""

import numpy as np

from . import _kernels
from .exceptions import NumericError

_TINY_SQ = 1e-300


def residuals(X, delta):
    """eps[:, i] = X[:, i] - X @ delta[:, i]."""
    X = np.asarray(X, dtype=float)
    delta = np.asarray(delta, dtype=float)
    return X - X @ delta


def pseudo_variables(eps, omega, i):
    """Pseudo-variable block for target i.

    Z[:, i] = 0 and Z[:, -i] = eps[:, -i] @ (omega_{-i,-i})^{-T}, computed
    with a linear solve.  Regressing X[:, i] on these columns absorbs the
    bidirected-edge contribution of the siblings.
    """
    eps = np.asarray(eps, dtype=float)
    omega = np.asarray(omega, dtype=float)
    n, d = eps.shape
    idx = np.arange(d) != i
    Om = omega[np.ix_(idx, idx)]
    Z = np.zeros((n, d))
    try:
        Z[:, idx] = np.linalg.solve(Om, eps[:, idx].T).T
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"omega block excluding index {i} is singular") from exc
    return Z


def pseudo_variable_stack(X, theta):
    """All d pseudo-variable blocks as one (d, n, d) array."""
    eps = residuals(X, theta.delta)
    n, d = eps.shape
    Z = np.empty((d, n, d))
    for i in range(d):
        Z[i] = pseudo_variables(eps, theta.omega, i)
    return Z


def ls_objective(theta, X, beta, Z=None):
    """Power least-squares objective; Z is computed from theta when omitted."""
    if Z is None:
        Z = pseudo_variable_stack(X, theta)
    value, _, _ = _kernels.ls_power_value_grad(X, Z, theta.delta, theta.omega, float(beta))
    return value


def ls_gradient(theta, X, beta, Z=None):
    """Per-entry gradients of ls_objective with Z treated as a constant."""
    if Z is None:
        Z = pseudo_variable_stack(X, theta)
    _, g_delta, g_omega = _kernels.ls_power_value_grad(X, Z, theta.delta, theta.omega, float(beta))
    return g_delta, g_omega


def ls_value_gradient(theta, X, beta, Z=None):
    """Objective and gradients in one fused evaluation (the hot path)."""
    if Z is None:
        Z = pseudo_variable_stack(X, theta)
    return _kernels.ls_power_value_grad(X, Z, theta.delta, theta.omega, float(beta))


def ls_gaussian_value_gradient(theta, X, Z=None):
    """Squared-loss objective and gradients (the Gaussian code path)."""
    if Z is None:
        Z = pseudo_variable_stack(X, theta)
    return _kernels.ls_gaussian_value_grad(X, Z, theta.delta, theta.omega)


def penalty_tanh(theta, lam, n):
    """Smooth sparsity penalty lam * sum tanh(ln(n) |entry|).

    Runs over the free entries: all off-diagonal delta entries and each
    symmetric omega pair once; the omega diagonal is exempt.
    """
    if n < 2:
        raise ValueError("n must be at least 2 so that ln(n) > 0")
    c = np.log(n)
    mask_off = ~np.eye(theta.d, dtype=bool)
    total = float(np.sum(np.tanh(c * np.abs(theta.delta[mask_off]))))
    iu = np.triu_indices(theta.d, k=1)
    total += float(np.sum(np.tanh(c * np.abs(theta.omega[iu]))))
    return lam * total


def _pow_guarded(q, beta):
    """(q)^beta elementwise with q < 1e-300 contributing exactly zero."""
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    live = q >= _TINY_SQ
    out[live] = q[live] ** beta
    return out


def loglik_core(theta, X, beta):
    """Joint log-likelihood core -(N/2) log|omega| - (1/2) sum_l (e_l' omega^{-1} e_l)^beta.

    Constant terms that do not involve (delta, omega) are dropped.
    """
    X = np.asarray(X, dtype=float)
    eps = residuals(X, theta.delta)
    sign, logdet = np.linalg.slogdet(theta.omega)
    if sign <= 0:
        raise NumericError("omega must be positive definite")
    try:
        sol = np.linalg.solve(theta.omega, eps.T)
    except np.linalg.LinAlgError as exc:
        raise NumericError("omega is singular") from exc
    q = np.sum(eps.T * sol, axis=0)
    N = X.shape[0]
    return -0.5 * N * logdet - 0.5 * float(np.sum(_pow_guarded(q, beta)))


def loglik_decomposed(theta, X, beta, i):
    """Log-likelihood core via the conditional split on variable i.

    Splits the error vector into (eps_i | eps_{-i}) and the marginal of
    eps_{-i}; equals loglik_core for every choice of i:

        -(N/2) log w_i - (N/2) log det(omega_{-i,-i})
        - (1/2) sum_l ( (eps_i - m_l)^2 / w_i + eps_{-i}' omega_{-i,-i}^{-1} eps_{-i} )^beta

    with w_i the conditional variance omega_ii - omega_{i,-i} omega_{-i,-i}^{-1} omega_{-i,i}
    and m_l the conditional mean of eps_i given the other errors.
    """
    X = np.asarray(X, dtype=float)
    d = theta.d
    eps = residuals(X, theta.delta)
    idx = np.arange(d) != i
    Om_sub = theta.omega[np.ix_(idx, idx)]
    om_cross = theta.omega[idx, i]

    sign, logdet_sub = np.linalg.slogdet(Om_sub)
    if sign <= 0:
        raise NumericError(f"omega block excluding index {i} is not positive definite")
    try:
        coef = np.linalg.solve(Om_sub, om_cross)            # omega_{-i,-i}^{-1} omega_{-i,i}
        sol = np.linalg.solve(Om_sub, eps[:, idx].T)        # omega_{-i,-i}^{-1} eps_{-i}'
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"omega block excluding index {i} is singular") from exc

    w = float(theta.omega[i, i] - om_cross @ coef)          # conditional variance
    if w <= 0:
        raise NumericError(f"conditional variance at index {i} is not positive")

    m = eps[:, idx] @ coef                                  # conditional mean of eps_i
    quad_rest = np.sum(eps[:, idx].T * sol, axis=0)         # eps_{-i}' omega^{-1} eps_{-i}
    q = (eps[:, i] - m) ** 2 / w + quad_rest
    N = X.shape[0]
    return (-0.5 * N * np.log(w) - 0.5 * N * logdet_sub
            - 0.5 * float(np.sum(_pow_guarded(q, beta))))


def holder_gap(residual_sq, beta):
    """Both sides of the finite-sum power bound.

    lhs = sum_l (r_l^2)^beta and rhs = (sum_l r_l^2)^beta / N^{beta-1};
    lhs >= rhs for beta >= 1, with equality when beta = 1 or all entries
    are equal.
    """
    r = np.asarray(residual_sq, dtype=float)
    if np.any(r < 0):
        raise ValueError("residual squares must be nonnegative")
    N = r.size
    lhs = float(np.sum(r ** beta))
    rhs = float(np.sum(r) ** beta / N ** (beta - 1.0))
    return lhs, rhs
