"""Sliced inverse regression on a (reduced) covariate block.

Observations are sorted by the response and cut into near-equal
contiguous slices; the kernel is the covariance of slice means, and
directions solve the generalized eigenproblem against the reduced
covariance through an explicit whitening with a relative ridge guard.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError

_RIDGE = 1e-8
_LAMBDA_NEG_TOL = 1e-10


@dataclass(frozen=True)
class SirResult:
    """All u directions (columns, normalized s.t. g' Sigma_e g = 1) and eigenvalues."""

    gammas: np.ndarray
    lambdas: np.ndarray
    slices: int


def slice_assign(y, n_slices):
    """Slice labels for each observation.

    Equal-count contiguous slices after a stable sort; the first
    n mod H slices take one extra observation.  When y has fewer
    distinct values than slices (binary labels, say), each distinct
    value becomes its own slice.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    n = len(y)
    if n_slices < 2:
        raise ParameterError(f"need at least 2 slices, got {n_slices}")
    if n_slices > n:
        raise ParameterError(f"more slices ({n_slices}) than observations ({n})")

    values = np.unique(y)
    if len(values) < n_slices:
        return np.searchsorted(values, y).astype(np.int64)

    order = np.argsort(y, kind="stable")
    sizes = np.full(n_slices, n // n_slices, dtype=int)
    sizes[: n % n_slices] += 1
    labels = np.empty(n, dtype=np.int64)
    start = 0
    for h, size in enumerate(sizes):
        labels[order[start : start + size]] = h
        start += size
    return labels


def sir_kernel(z, labels):
    """Covariance of slice means: sum_h (n_h/n) mbar_h mbar_h'.  z centered."""
    z = np.asarray(z, dtype=float)
    labels = np.asarray(labels)
    n = z.shape[0]
    n_slices = int(labels.max()) + 1
    means = np.zeros((n_slices, z.shape[1]))
    counts = np.bincount(labels, minlength=n_slices)
    for h in range(n_slices):
        if counts[h]:
            means[h] = z[labels == h].mean(axis=0)
    m = (means * (counts / n)[:, None]).T @ means
    return (m + m.T) / 2.0


def sir_directions(y, z, n_slices=5, sigma_e=None):
    """Generalized eigenpairs of the slice-mean kernel against cov(z).

    Returns every direction, eigenvalues descending in [0, 1] (a small
    relative ridge keeps near-singular reduced covariances solvable).
    `sigma_e` may pass in a precomputed covariance of z; z is assumed
    centered either way.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise ParameterError("z must be a 2-d matrix")
    n, u = z.shape
    labels = slice_assign(y, n_slices)
    m = sir_kernel(z, labels)

    if sigma_e is None:
        sigma_e = z.T @ z / n
        sigma_e = (sigma_e + sigma_e.T) / 2.0
    ridge = _RIDGE * float(np.mean(np.diagonal(sigma_e)))
    guarded = sigma_e + ridge * np.eye(u)

    w, v = np.linalg.eigh(guarded)
    if w.min() <= 0.0:
        raise NumericalError(
            "reduced covariance is rank-deficient beyond the ridge guard"
        )
    inv_half = (v / np.sqrt(w)) @ v.T
    whitened = inv_half @ m @ inv_half
    whitened = (whitened + whitened.T) / 2.0
    lam, vec = np.linalg.eigh(whitened)
    lam = lam[::-1]
    vec = vec[:, ::-1]

    if lam.min() < -_LAMBDA_NEG_TOL:
        raise NumericalError(f"negative inverse-regression eigenvalue: {lam.min()}")
    lam = np.clip(lam, 0.0, None)
    gammas = inv_half @ vec
    return SirResult(
        gammas=gammas, lambdas=lam, slices=int(labels.max()) + 1
    )
