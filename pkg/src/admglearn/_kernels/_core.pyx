# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: fused power-residual objective and gradients.

Mirrors ``_py_ref``; the NumPy file is the reference, this one the fast path.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()

cdef double _TINY_SQ = 1e-300


def ls_power_value_grad(X, Z, delta, omega, double beta):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xc = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Zc = np.ascontiguousarray(Z, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Dc = np.ascontiguousarray(delta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Oc = np.ascontiguousarray(omega, dtype=np.float64)

    cdef Py_ssize_t n = Xc.shape[0]
    cdef Py_ssize_t d = Xc.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_delta = np.zeros((d, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_omega = np.zeros((d, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(n)

    cdef double value = 0.0
    cdef double s, r, w, acc_x, acc_z
    cdef Py_ssize_t i, k, l

    for i in range(d):
        s = 0.0
        for l in range(n):
            r = Xc[l, i]
            for k in range(d):
                r -= Xc[l, k] * Dc[k, i] + Zc[i, l, k] * Oc[k, i]
            buf[l] = r
            s += r * r

        if beta == 1.0:
            w = 1.0 / n
            value += 0.5 * s / n
        elif s < _TINY_SQ:
            continue
        else:
            w = (beta / n) * pow(s, beta - 1.0)
            value += 0.5 / n * pow(s, beta)

        for k in range(d):
            acc_x = 0.0
            acc_z = 0.0
            for l in range(n):
                acc_x += Xc[l, k] * buf[l]
                acc_z += Zc[i, l, k] * buf[l]
            g_delta[k, i] = -w * acc_x
            g_omega[k, i] = -w * acc_z

    return value, g_delta, g_omega


def ls_gaussian_value_grad(X, Z, delta, omega):
    # Same loop skeleton as above with the power machinery removed, so the
    # Gaussian path coincides exactly with the degenerate power path.
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xc = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Zc = np.ascontiguousarray(Z, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Dc = np.ascontiguousarray(delta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Oc = np.ascontiguousarray(omega, dtype=np.float64)

    cdef Py_ssize_t n = Xc.shape[0]
    cdef Py_ssize_t d = Xc.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_delta = np.zeros((d, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g_omega = np.zeros((d, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(n)

    cdef double value = 0.0
    cdef double s, r, w, acc_x, acc_z
    cdef Py_ssize_t i, k, l

    for i in range(d):
        s = 0.0
        for l in range(n):
            r = Xc[l, i]
            for k in range(d):
                r -= Xc[l, k] * Dc[k, i] + Zc[i, l, k] * Oc[k, i]
            buf[l] = r
            s += r * r

        w = 1.0 / n
        value += 0.5 * s / n

        for k in range(d):
            acc_x = 0.0
            acc_z = 0.0
            for l in range(n):
                acc_x += Xc[l, k] * buf[l]
                acc_z += Zc[i, l, k] * buf[l]
            g_delta[k, i] = -w * acc_x
            g_omega[k, i] = -w * acc_z

    return value, g_delta, g_omega
