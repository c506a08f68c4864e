"""Subspace agreement metrics.

Trace correlation weighs spans through a covariance metric (population
covariance in simulations); projection distance is the Frobenius gap
between orthogonal projectors.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError

_RANK_TOL = 1e-12


@dataclass(frozen=True)
class SubspaceScore:
    rho: float
    dim_est: int
    dim_true: int


def _as_basis(b, name):
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2 or b.shape[1] < 1:
        raise ParameterError(f"{name} must be a p x d matrix with d >= 1")
    if b.shape[0] < b.shape[1]:
        raise ParameterError(f"{name} has more columns than rows")
    return b


def _solve_spd(mat, rhs, what):
    w = np.linalg.eigvalsh(mat)
    if w.min() <= _RANK_TOL * max(w.max(), 1.0):
        raise NumericalError(f"{what} is singular; basis not full rank in this metric")
    return np.linalg.solve(mat, rhs)


def trace_correlation(b_est, b_true, sigma):
    """Trace correlation between span(b_est) and span(b_true) under sigma.

    rho^2 averages the canonical correlations of the two projected
    variables over the true dimension, so a superset span still scores 1.
    """
    b1 = _as_basis(b_est, "b_est")
    b2 = _as_basis(b_true, "b_true")
    sigma = np.asarray(sigma, dtype=float)
    p = b1.shape[0]
    if b2.shape[0] != p or sigma.shape != (p, p):
        raise ParameterError("b_est, b_true, and sigma disagree on p")

    s1 = b1.T @ sigma @ b1
    s2 = b2.T @ sigma @ b2
    s12 = b1.T @ sigma @ b2
    # trace(s2^{-1/2} s12' s1^{-1} s12 s2^{-1/2}) = trace((s1^{-1} s12)(s2^{-1} s12'))
    left = _solve_spd(s1, s12, "covariance of the estimated projection")
    right = _solve_spd(s2, s12.T, "covariance of the true projection")
    t = float(np.trace(left @ right))
    d2 = b2.shape[1]
    rho = float(np.sqrt(max(t, 0.0) / d2))
    if rho > 1.0 + 1e-8:
        raise NumericalError(f"trace correlation exceeded 1: {rho}")
    return SubspaceScore(rho=rho, dim_est=b1.shape[1], dim_true=d2)


def _projector(b, name):
    q, r = np.linalg.qr(b)
    diag = np.abs(np.diagonal(r))
    if diag.min() <= _RANK_TOL * max(diag.max(), 1.0):
        raise NumericalError(f"{name} is numerically rank-deficient")
    return q @ q.T


def projection_distance(b_est, b_true):
    """Frobenius distance between the two span projectors."""
    b1 = _as_basis(b_est, "b_est")
    b2 = _as_basis(b_true, "b_true")
    if b1.shape[0] != b2.shape[0]:
        raise ParameterError("bases disagree on p")
    return float(np.linalg.norm(_projector(b1, "b_est") - _projector(b2, "b_true")))
