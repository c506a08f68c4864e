"""Structural-dimension selection from a kernel spectrum.

A BIC-type criterion trades a normalized goodness term against a
k(k-1) complexity penalty:

    G(k) = (n/2) * sum_{j<=k}(ln(l_j+1) - l_j) / sum_{j<=p}(ln(l_j+1) - l_j)
           - c_n * k * (k-1) / p

The default optimizes by maximizing G; minimizing is exposed as an
alternative but degenerates toward k = p for any useful penalty.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, ParameterError


@dataclass(frozen=True)
class DimensionChoice:
    d_hat: int
    criterion_values: np.ndarray
    c_n: float
    direction: str


def select_dimension(spectrum, n, c_n=None, direction="max"):
    """Pick the structural dimension from a nonincreasing eigenvalue sequence.

    Negative eigenvalues are clamped to zero first; exact ties go to the
    smallest k. `c_n` defaults to sqrt(n).
    """
    if direction not in ("max", "min"):
        raise ParameterError(f"direction must be 'max' or 'min', got {direction!r}")
    spectrum = np.clip(np.asarray(spectrum, dtype=float), 0.0, None)
    p = len(spectrum)
    if p < 1:
        raise ParameterError("empty spectrum")
    if c_n is None:
        c_n = float(np.sqrt(n))

    terms = np.log1p(spectrum) - spectrum
    partial = np.cumsum(terms)
    total = partial[-1]
    if total == 0.0:
        raise EstimationError("spectrum is identically zero: no signal to rank")

    k = np.arange(1, p + 1)
    # ratio first, so the goodness term is exactly n/2 at k = p
    values = (n / 2.0) * (partial / total) - c_n * k * (k - 1) / p

    pick = int(np.argmax(values)) if direction == "max" else int(np.argmin(values))
    return DimensionChoice(
        d_hat=pick + 1, criterion_values=values, c_n=float(c_n), direction=direction
    )
