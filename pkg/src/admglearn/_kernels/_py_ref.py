"""Pure NumPy reference implementation of the hot kernels.

Used when the compiled extension is unavailable (or disabled via the
ADMGLEARN_FORCE_PYTHON environment variable).  The compiled kernel in
``_core.pyx`` must produce the same values to floating-point roundoff;
``tests/test_kernels.py`` asserts the equivalence.
"""

import numpy as np

# squared norms below this contribute nothing (guards 0**(beta-1) and log(0))
_TINY_SQ = 1e-300


def ls_power_value_grad(X, Z, delta, omega, beta):
    """Power-residual objective and per-entry gradients, pseudo-variables fixed.

    value = (1/2n) sum_i (||r_i||^2)^beta  with
    r_i = X[:, i] - X @ delta[:, i] - Z[i] @ omega[:, i].

    Parameters
    ----------
    X : (n, d) ndarray
    Z : (d, n, d) ndarray, Z[i] the pseudo-variable block for target i
        (column i identically zero), treated as a constant.
    delta, omega : (d, d) ndarray
    beta : float, >= 1

    Returns
    -------
    value : float
    g_delta, g_omega : (d, d) ndarray
        Entrywise gradients with delta and omega treated as full matrices.
    """
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n, d = X.shape

    # r[:, i] = X[:, i] - X @ delta[:, i] - Z[i] @ omega[:, i]
    R = X - X @ delta - np.einsum("inj,ji->ni", Z, omega)
    s = np.einsum("ni,ni->i", R, R)

    if beta == 1.0:
        w = np.full(d, 1.0 / n)
        value = 0.5 / n * float(np.sum(s))
    else:
        live = s >= _TINY_SQ
        w = np.zeros(d)
        w[live] = (beta / n) * s[live] ** (beta - 1.0)
        value = 0.5 / n * float(np.sum(s[live] ** beta))

    Rw = R * w  # column i scaled by w_i
    g_delta = -(X.T @ Rw)
    g_omega = -np.einsum("inj,ni->ji", Z, Rw)
    return value, g_delta, g_omega


def ls_gaussian_value_grad(X, Z, delta, omega):
    """Plain squared-loss objective and gradients (no shape power anywhere).

    This is the separate Gaussian code path.  It keeps the same evaluation
    order as the power kernel so that the two paths coincide exactly when
    the power degenerates, while never touching the power machinery.
    """
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n, d = X.shape
    R = X - X @ delta - np.einsum("inj,ji->ni", Z, omega)
    s = np.einsum("ni,ni->i", R, R)
    value = 0.5 / n * float(np.sum(s))
    Rw = R * np.full(d, 1.0 / n)
    g_delta = -(X.T @ Rw)
    g_omega = -np.einsum("inj,ni->ji", Z, Rw)
    return value, g_delta, g_omega
