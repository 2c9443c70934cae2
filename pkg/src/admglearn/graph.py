"""ADMG parameters, discrete structures, covariance map, and the covariance refit.

Conventions used repo-wide: delta[j, i] is the coefficient of the directed
edge j -> i (so column i collects the parents of i), omega is symmetric with
omega[i, i] the error dispersion of variable i and off-diagonal entries the
bidirected-edge strengths.  D and B are the corresponding binary adjacency
matrices, D[j, i] = 1 iff j -> i, B symmetric with zero diagonal.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericError, ParameterError

_SYM_TOL = 1e-12


@dataclass
class Parameters:
    """Continuous ADMG parameters (delta, omega)."""

    delta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.delta = np.atleast_2d(np.asarray(self.delta, dtype=float))
        self.omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        d = self.delta.shape[0]
        if self.delta.shape != (d, d) or self.omega.shape != (d, d):
            raise ParameterError("delta and omega must be square with matching size")
        if np.any(np.diag(self.delta) != 0.0):
            raise ParameterError("delta must have a zero diagonal")
        if not np.all(np.abs(self.omega - self.omega.T) <= _SYM_TOL):
            raise ParameterError("omega must be symmetric")

    @property
    def d(self):
        return self.delta.shape[0]

    def copy(self):
        return Parameters(self.delta.copy(), self.omega.copy())


@dataclass
class AdmgStructure:
    """Binary ADMG adjacency: directed D (D[j, i] = 1 iff j -> i) and bidirected B."""

    D: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.D = np.atleast_2d(np.asarray(self.D)).astype(np.int8)
        self.B = np.atleast_2d(np.asarray(self.B)).astype(np.int8)
        d = self.D.shape[0]
        if self.D.shape != (d, d) or self.B.shape != (d, d):
            raise ParameterError("D and B must be square with matching size")
        if np.any(self.D < 0) or np.any(self.D > 1) or np.any(self.B < 0) or np.any(self.B > 1):
            raise ParameterError("D and B must be binary")
        if np.any(np.diag(self.D) != 0) or np.any(np.diag(self.B) != 0):
            raise ParameterError("D and B must have zero diagonals")
        if np.any(self.B != self.B.T):
            raise ParameterError("B must be symmetric")

    @property
    def d(self):
        return self.D.shape[0]

    def directed_edges(self):
        """Sorted list of (j, i) pairs with j -> i."""
        return sorted((int(j), int(i)) for j, i in zip(*np.nonzero(self.D)))

    def bidirected_edges(self):
        """Sorted list of (i, j) pairs, i < j."""
        return sorted((int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(self.B))))


def implied_covariance(theta):
    """Covariance implied by the linear SEM: (I - delta')^{-1} omega (I - delta')^{-T}."""
    d = theta.d
    A = np.eye(d) - theta.delta.T
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError("I - delta is singular") from exc
    return Ainv @ theta.omega @ Ainv.T


def is_acyclic(D):
    """True iff the directed graph has no cycle (Kahn's topological sort)."""
    D = np.atleast_2d(np.asarray(D))
    d = D.shape[0]
    indeg = np.asarray(D.sum(axis=0), dtype=int).ravel()  # column i: parents of i
    ready = [i for i in range(d) if indeg[i] == 0]
    seen = 0
    while ready:
        j = ready.pop()
        seen += 1
        for i in np.nonzero(D[j])[0]:
            indeg[i] -= 1
            if indeg[i] == 0:
                ready.append(int(i))
    return seen == d


def is_bow_free(s):
    """True iff D is acyclic and no pair carries both a directed and a bidirected edge."""
    return is_acyclic(s.D) and not np.any((s.D != 0) & (s.B != 0))


def _reachable(D):
    """Boolean closure R[j, i] = True iff a directed path j -> ... -> i exists."""
    R = np.asarray(D, dtype=bool)
    for _ in range(D.shape[0]):
        R_next = R | (R @ R)
        if np.array_equal(R_next, R):
            break
        R = R_next
    return R


def is_ancestral(s):
    """True iff acyclic and no vertex is both an ancestor and a sibling of another."""
    if not is_acyclic(s.D):
        return False
    return not np.any(_reachable(s.D) & (s.B != 0))


def threshold(theta, w_thr):
    """Binary structure from parameter magnitudes; B symmetrized by OR."""
    if w_thr < 0:
        raise ParameterError("threshold must be nonnegative")
    D = (np.abs(theta.delta) > w_thr).astype(np.int8)
    np.fill_diagonal(D, 0)
    off = np.abs(theta.omega) > w_thr
    B = (off | off.T).astype(np.int8)
    np.fill_diagonal(B, 0)
    return AdmgStructure(D=D, B=B)


@dataclass
class CovarianceFit:
    """Result of fitting structural parameters to a target covariance."""

    params: Parameters
    distance: float
    converged: bool
    restarts_used: int = field(default=0)


def _cov_objective(sigma_obs, D_mask, B_mask):
    """Builder for the squared Frobenius distance and its gradient on the support."""
    d = sigma_obs.shape[0]

    def fun_grad(x):
        delta, omega = _unpack(x, d, D_mask, B_mask)
        A = np.linalg.inv(np.eye(d) - delta.T)  # maps errors to observables
        sigma = A @ omega @ A.T
        E = sigma - sigma_obs
        f = float(np.sum(E * E))
        R = 2.0 * E
        g_omega_full = A.T @ R @ A
        # dA = A d(delta') A, so d f = 2 tr(R dA omega A') = tr(2 sigma R A d(delta'))
        g_delta_full = 2.0 * sigma @ R @ A
        return f, _pack_grad(g_delta_full, g_omega_full, D_mask, B_mask)

    return fun_grad


def _unpack(x, d, D_mask, B_mask):
    delta = np.zeros((d, d))
    omega = np.zeros((d, d))
    nD = int(D_mask.sum())
    delta[D_mask] = x[:nD]
    iu = np.triu_indices(d, k=1)
    pair_mask = B_mask[iu]
    vals = np.zeros(pair_mask.shape)
    nB = int(pair_mask.sum())
    vals[pair_mask] = x[nD:nD + nB]
    omega[iu] = vals
    omega += omega.T
    omega[np.diag_indices(d)] = x[nD + nB:]
    return delta, omega


def _pack_grad(g_delta, g_omega, D_mask, B_mask):
    d = D_mask.shape[0]
    iu = np.triu_indices(d, k=1)
    pair_mask = B_mask[iu]
    g_pairs = (g_omega + g_omega.T)[iu][pair_mask]
    return np.concatenate([g_delta[D_mask], g_pairs, np.diag(g_omega)])


def fit_params_to_covariance(s, sigma_obs, init=None, tol=1e-8, restarts=3, seed=0,
                             max_iterations=2000):
    """Fit (delta, omega) with support s to a target covariance matrix.

    Minimizes ||implied_covariance(theta) - sigma_obs||_F^2 over the entries
    allowed by s (off-support entries fixed at zero, omega diagonal free
    positive).  A regression warm start is used when no init is given, plus
    ``restarts`` random restarts through the shared box-constrained
    quasi-Newton minimizer; the best solution wins.

    Returns a CovarianceFit; ``converged`` is False when the best squared
    distance stays above ``tol``.
    """
    from .optimizer import inner_minimize  # shared inner solver

    if not is_bow_free(s):
        raise ParameterError("structure must be bow-free (and acyclic)")
    sigma_obs = np.asarray(sigma_obs, dtype=float)
    d = s.d
    if sigma_obs.shape != (d, d) or not np.all(np.abs(sigma_obs - sigma_obs.T) <= 1e-9):
        raise ParameterError("sigma_obs must be symmetric with matching size")

    D_mask = s.D != 0
    B_mask = s.B != 0
    nD = int(D_mask.sum())
    iu = np.triu_indices(d, k=1)
    nB = int(B_mask[iu].sum())
    fun_grad = _cov_objective(sigma_obs, D_mask, B_mask)

    if init is None:
        x0 = _warm_start(s, sigma_obs, D_mask, B_mask)
    else:
        x0 = np.concatenate([
            init.delta[D_mask],
            init.omega[iu][B_mask[iu]],
            np.diag(init.omega),
        ])

    bounds = [(-np.inf, np.inf)] * (nD + nB) + [(1e-9, np.inf)] * d
    rng = np.random.default_rng(seed)
    best = None
    tried = 0
    for r in range(restarts + 1):
        start = x0 if r == 0 else x0 + rng.normal(scale=0.3, size=x0.size)
        start[nD + nB:] = np.maximum(start[nD + nB:], 1e-6)
        res = inner_minimize(fun_grad, start, bounds, max_iterations=max_iterations)
        tried = r + 1
        if best is None or res.fun < best.fun:
            best = res
        if best.fun < tol:
            break

    delta, omega = _unpack(best.x, d, D_mask, B_mask)
    return CovarianceFit(
        params=Parameters(delta=delta, omega=omega),
        distance=float(best.fun),
        converged=bool(best.fun < tol),
        restarts_used=tried,
    )


def _warm_start(s, sigma_obs, D_mask, B_mask):
    """Deterministic start: per-column least squares on the parent support,
    then omega from the implied error covariance projected to the support."""
    d = s.d
    delta = np.zeros((d, d))
    for i in range(d):
        pa = np.nonzero(D_mask[:, i])[0]
        if pa.size:
            Spp = sigma_obs[np.ix_(pa, pa)]
            try:
                delta[pa, i] = np.linalg.solve(Spp, sigma_obs[pa, i])
            except np.linalg.LinAlgError:
                pass
    ImD = np.eye(d) - delta
    err_cov = ImD.T @ sigma_obs @ ImD  # error covariance if delta were exact
    omega = np.where(B_mask, err_cov, 0.0)
    np.fill_diagonal(omega, np.maximum(np.diag(err_cov), 1e-3))
    iu = np.triu_indices(d, k=1)
    return np.concatenate([delta[D_mask], omega[iu][B_mask[iu]], np.diag(omega)])
