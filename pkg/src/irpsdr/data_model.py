"""Dataset container, CSV ingestion, and the shared sample covariance.

Downstream estimators assume centered predictors and one covariance
estimate computed with divisor n, so the between-slice / within-slice
variance split used by the inverse-regression kernel is exact.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError


@dataclass(frozen=True)
class Dataset:
    """Response vector plus predictor matrix, usually centered columnwise."""

    y: np.ndarray
    x: np.ndarray
    centered: bool
    column_means: np.ndarray
    column_sds: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise DataError("x must be a 2-d matrix")
        n, p = x.shape
        if y.shape != (n,):
            raise DataError(f"y has shape {y.shape}, expected ({n},)")
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise DataError("non-finite values in the data")
        if self.centered and np.abs(x.mean(axis=0)).max() > 1e-10:
            raise DataError("dataset marked centered but column means are not ~0")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]


def make_dataset(y, x, center=True, standardize=False):
    """Build a Dataset from arrays, centering (and optionally scaling) columns.

    Scaling divides by the root mean square of the centered column; a
    constant column cannot be scaled and is reported as an error.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DataError("x must be a 2-d matrix")
    means = x.mean(axis=0)
    sds = None
    if center or standardize:
        x = x - means
        x = x - x.mean(axis=0)  # second pass kills rounding residue
    if standardize:
        sds = np.sqrt((x**2).mean(axis=0))
        dead = np.flatnonzero(sds <= 1e-12 * max(1.0, np.abs(means).max()))
        if dead.size:
            raise DataError(f"column {dead[0] + 1} is constant, cannot standardize")
        x = x / sds
    return Dataset(
        y=y,
        x=x,
        centered=center or standardize,
        column_means=means,
        column_sds=sds,
    )


class CovarianceEstimate:
    """Sample covariance X'X/n with a cached symmetric square root."""

    def __init__(self, sigma_hat):
        sigma_hat = np.asarray(sigma_hat, dtype=float)
        if sigma_hat.ndim != 2 or sigma_hat.shape[0] != sigma_hat.shape[1]:
            raise ParameterError("covariance must be square")
        if np.abs(sigma_hat - sigma_hat.T).max() > 1e-10:
            raise ParameterError("covariance must be symmetric")
        if sigma_hat.diagonal().min() < -1e-12:
            raise ParameterError("covariance has a negative diagonal entry")
        self.sigma_hat = sigma_hat
        self._sqrt = None

    @property
    def p(self):
        return self.sigma_hat.shape[0]

    def sqrt_factor(self):
        """Symmetric PSD square root; eigenvalues clipped at zero first."""
        if self._sqrt is None:
            w, v = np.linalg.eigh(self.sigma_hat)
            w = np.clip(w, 0.0, None)
            self._sqrt = (v * np.sqrt(w)) @ v.T
        return self._sqrt


def sample_covariance(dataset):
    """Covariance of the centered predictors with divisor n."""
    if not dataset.centered:
        raise ParameterError("sample_covariance needs a centered dataset")
    x = dataset.x
    sigma = x.T @ x / x.shape[0]
    sigma = (sigma + sigma.T) / 2.0
    return CovarianceEstimate(sigma)


def _parse_cell(token, row_num, col_num, header):
    try:
        return float(token)
    except ValueError:
        name = f" ('{header[col_num - 1]}')" if header else ""
        raise DataError(
            f"row {row_num}, column {col_num}{name}: could not parse {token!r}"
        ) from None


def _is_numeric_row(fields):
    for tok in fields:
        try:
            float(tok)
        except ValueError:
            return False
    return True


def load_csv(path, response, center=True, standardize=False):
    """Read a numeric CSV and split off the response column.

    The first line is treated as a header when any of its fields fails
    to parse as a number.  `response` is a column name, or a 0-based
    index for headerless files.  Rows are numbered from 1 excluding the
    header in error messages.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: empty file")

    header = None
    if not _is_numeric_row(rows[0]):
        header = [tok.strip() for tok in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: header but no data rows")

    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"row {i + 1}: expected {width} fields, got {len(row)}")
        for j, tok in enumerate(row):
            data[i, j] = _parse_cell(tok.strip(), i + 1, j + 1, header)

    if isinstance(response, str):
        if header is None or response not in header:
            raise DataError(f"response column {response!r} not found")
        r_idx = header.index(response)
    else:
        r_idx = int(response)
        if not 0 <= r_idx < width:
            raise DataError(f"response index {r_idx} out of range for {width} columns")

    y = data[:, r_idx]
    x = np.delete(data, r_idx, axis=1)
    if x.shape[1] < 1:
        raise DataError("no predictor columns left after removing the response")
    return make_dataset(y, x, center=center, standardize=standardize)
