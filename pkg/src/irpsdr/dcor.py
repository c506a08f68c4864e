"""Squared sample distance covariance and correlation.

Plain V-statistics: double-center each pairwise Euclidean distance
matrix and average the elementwise product.  Biased, always
nonnegative up to rounding, O(n^2) time and memory, and defined for
arguments of different dimension.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError, ParameterError

# rounding slack below zero before we call the result an internal error
_NEG_TOL = 1e-12
# denominators at or below this are treated as degenerate
_DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class DcorValue:
    value: float
    degenerate: bool


def _as_rows(v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2:
        raise ParameterError(f"expected a vector or matrix, got ndim={v.ndim}")
    return v


def _pairwise_distances(v):
    """Euclidean distances between rows, by the Gram-matrix expansion."""
    g = v @ v.T
    sq = np.diagonal(g)
    d2 = sq[:, None] + sq[None, :] - 2.0 * g
    return np.sqrt(np.clip(d2, 0.0, None))


def _double_center(d):
    return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()


def _product_mean(a_centered, b_centered):
    value = float((a_centered * b_centered).mean())
    if value < -_NEG_TOL:
        raise NumericalError(f"distance covariance fell below zero: {value}")
    return max(value, 0.0)


def _check_pair(v1, v2):
    v1, v2 = _as_rows(v1), _as_rows(v2)
    if v1.shape[0] != v2.shape[0]:
        raise DataError(f"sample sizes differ: {v1.shape[0]} vs {v2.shape[0]}")
    if v1.shape[0] < 2:
        raise DataError("need at least two observations")
    return v1, v2


def dcov2_sample(v1, v2):
    """Squared sample distance covariance between the rows of v1 and v2."""
    v1, v2 = _check_pair(v1, v2)
    a = _double_center(_pairwise_distances(v1))
    b = _double_center(_pairwise_distances(v2))
    return _product_mean(a, b)


def dcor2_sample(v1, v2):
    """Squared sample distance correlation, 0 with a flag when degenerate."""
    v1, v2 = _check_pair(v1, v2)
    a = _double_center(_pairwise_distances(v1))
    b = _double_center(_pairwise_distances(v2))
    num = _product_mean(a, b)
    den = np.sqrt(_product_mean(a, a) * _product_mean(b, b))
    if den <= _DEGENERATE_TOL:
        return DcorValue(value=0.0, degenerate=True)
    return DcorValue(value=num / den, degenerate=False)
