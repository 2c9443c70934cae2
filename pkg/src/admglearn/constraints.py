"""Differentiable graph-class constraints on (delta, omega).

Binary adjacency is replaced by smooth Hadamard-square surrogates,
Ds = delta o delta and Bs = omega o omega with the diagonal of Bs zeroed.
Each constraint value is nonnegative and vanishes exactly when the support
graph belongs to the class:

    acyclic_dag : trace(exp(Ds)) - d
    bow_free    : trace(exp(Ds)) - d + sum(Ds o Bs)
    ancestral   : trace(exp(Ds)) - d + sum(exp(Ds) o Bs)
"""

import enum

import numpy as np
from scipy.linalg import expm, expm_frechet


class ConstraintKind(enum.Enum):
    ACYCLIC_DAG = "dag"
    BOW_FREE = "bowfree"
    ANCESTRAL = "ancestral"

    @classmethod
    def from_name(cls, name):
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValueError(f"unknown constraint {name!r}; choose from "
                         f"{[k.value for k in cls]}")


def _surrogates(theta):
    Ds = theta.delta * theta.delta
    Bs = theta.omega * theta.omega
    np.fill_diagonal(Bs, 0.0)
    return Ds, Bs


def h_value(theta, kind):
    """Constraint value; >= 0, and 0 iff the support graph is in the class."""
    Ds, Bs = _surrogates(theta)
    d = Ds.shape[0]
    eDs = expm(Ds)
    h = float(np.trace(eDs)) - d
    if kind is ConstraintKind.BOW_FREE:
        h += float(np.sum(Ds * Bs))
    elif kind is ConstraintKind.ANCESTRAL:
        h += float(np.sum(eDs * Bs))
    return h


def h_value_gradient(theta, kind):
    """Constraint value together with per-entry gradients (one expm shared).

    Gradients treat delta and omega as full matrices; the coupling terms are
    entrywise except the ancestral one, whose delta gradient needs the
    Frechet derivative of the matrix exponential (block augmented-matrix
    method, applied through the trace adjoint identity).
    """
    Ds, Bs = _surrogates(theta)
    d = Ds.shape[0]
    eDs = expm(Ds)
    h = float(np.trace(eDs)) - d
    g_delta = 2.0 * theta.delta * eDs.T
    g_omega = np.zeros_like(theta.omega)

    if kind is ConstraintKind.BOW_FREE:
        h += float(np.sum(Ds * Bs))
        g_delta = g_delta + 2.0 * theta.delta * Bs
        g_omega = 2.0 * theta.omega * Ds
        np.fill_diagonal(g_omega, 0.0)
    elif kind is ConstraintKind.ANCESTRAL:
        h += float(np.sum(eDs * Bs))
        # grad_M of sum(exp(M) o Bs) is the Frechet derivative L_exp(M', Bs)
        frech = expm_frechet(Ds.T, Bs, method="blockEnlarge", compute_expm=False)
        g_delta = g_delta + 2.0 * theta.delta * frech
        g_omega = 2.0 * theta.omega * eDs
        np.fill_diagonal(g_omega, 0.0)

    return h, g_delta, g_omega


def h_gradient(theta, kind):
    """Per-entry gradients (d h / d delta, d h / d omega)."""
    _, g_delta, g_omega = h_value_gradient(theta, kind)
    return g_delta, g_omega
