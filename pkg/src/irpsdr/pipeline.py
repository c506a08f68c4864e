"""High-level fitting dispatch, EEG-style preprocessing, and LOO classification."""

from dataclasses import dataclass, field

import numpy as np

from .baselines import marginal_r1, pca_sdr
from .data_model import make_dataset
from .errors import NumericalError, ParameterError
from .kernel_integration import ensemble_kernel, integrate_sizes, leading_basis

FIT_METHODS = ("irp_sdr", "pca_sdr", "marginal_r1")


def fit_sdr(
    dataset,
    u_values,
    method="irp_sdr",
    d=None,
    n_partitions=50,
    seed=0,
    n_slices=5,
    c_n=None,
):
    """Fit a central-subspace basis by the chosen method.

    For irp_sdr a single envelope size integrates over its candidate
    block sizes; several sizes are combined into the trace-normalized
    ensemble.  The baselines take exactly one envelope size.  d=None
    selects the dimension from the kernel spectrum (pca_sdr has no
    integrated kernel, so it needs an explicit d).
    """
    us = sorted({int(u) for u in u_values})
    if not us:
        raise ParameterError("u_values is empty")
    if us[0] < 1:
        raise ParameterError("envelope sizes must be positive")
    if method not in FIT_METHODS:
        raise ParameterError(f"unknown method {method!r}; choose from {list(FIT_METHODS)}")

    if method == "irp_sdr":
        if len(us) == 1:
            kernel = integrate_sizes(
                dataset, us[0], n_partitions=n_partitions, seed=seed, n_slices=n_slices
            )
        else:
            kernel = ensemble_kernel(
                dataset, us, n_partitions=n_partitions, seed=seed, n_slices=n_slices
            )
        fit = leading_basis(kernel, d=d, c_n=c_n)
    elif method == "pca_sdr":
        if len(us) != 1:
            raise ParameterError("pca_sdr takes a single envelope size")
        if d is None:
            raise ParameterError("pca_sdr needs an explicit d")
        fit = pca_sdr(dataset, us[0], d, n_slices=n_slices)
    else:  # marginal_r1; d=None flows through to spectrum-based selection
        if len(us) != 1:
            raise ParameterError("marginal_r1 takes a single envelope size")
        fit = marginal_r1(dataset, us[0], d, seed=seed, n_slices=n_slices)

    fit.config_echo = {
        "method": method,
        "u_values": us,
        "d": d,
        "d_hat": fit.d_hat,
        "n_partitions": n_partitions,
        "seed": seed,
        "n_slices": n_slices,
        "c_n": c_n,
        "n": dataset.n,
        "p": dataset.p,
    }
    return fit


def eeg_preprocess(x):
    """Collapse (n, time, channels) recordings to (n, channels * 8) features.

    The time axis is split into 8 equal bands, each band reduced to its
    per-channel median; output columns are channel-major, so channel k
    band j lands in column k * 8 + j.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 3:
        raise ParameterError("expected a 3-d array (n, time, channels)")
    n, t, c = x.shape
    if t < 8 or t % 8:
        raise ParameterError(f"time axis of length {t} does not split into 8 bands")
    bands = np.median(x.reshape(n, 8, t // 8, c), axis=2)
    return bands.transpose(0, 2, 1).reshape(n, 8 * c)


@dataclass
class ClassificationResult:
    accuracy: float
    n_correct: int
    n_total: int
    classes: np.ndarray
    confusion: np.ndarray
    predictions: np.ndarray
    config_echo: dict = field(default_factory=dict)


def _lda_predict(z, labels, z_star, classes):
    """Equal-variance Gaussian discriminant on a 1-d projection."""
    n_tr = len(z)
    means = np.empty(2)
    ss = 0.0
    counts = np.empty(2)
    for c, cls in enumerate(classes):
        zc = z[labels == cls]
        counts[c] = len(zc)
        means[c] = zc.mean()
        ss += float(((zc - means[c]) ** 2).sum())
    s2 = ss / (n_tr - 2)
    if s2 <= 0.0:
        raise NumericalError("within-class variance of the projection is zero")
    scores = -((z_star - means) ** 2) / (2.0 * s2) + np.log(counts / n_tr)
    return classes[0] if scores[0] >= scores[1] else classes[1]


def loo_classify(
    y,
    x,
    u,
    d=1,
    method="irp_sdr",
    n_partitions=10,
    seed=0,
    n_slices=5,
    fixed_basis=False,
    standardize=True,
):
    """Leave-one-out classification through a 1-d reduced predictor.

    Each fold refits the basis on the training rows and standardizes
    the held-out row with training statistics.  fixed_basis=True fits
    once on the full data (cheaper; the basis sees the held-out rows).
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ParameterError("y and x disagree on the number of rows")
    classes = np.unique(y)
    if len(classes) != 2:
        raise ParameterError(f"need exactly two classes, found {len(classes)}")
    if int(d) != 1:
        raise ParameterError("the discriminant runs on a 1-d projection; d must be 1")
    for cls in classes:
        if (y == cls).sum() < 2:
            raise ParameterError(f"class {cls} has fewer than 2 rows")
    n = len(y)

    fit_kwargs = dict(
        method=method, d=1, n_partitions=n_partitions, seed=seed, n_slices=n_slices
    )
    predictions = np.empty(n)
    if fixed_basis:
        ds = make_dataset(y, x, center=True, standardize=standardize)
        basis = fit_sdr(ds, [u], **fit_kwargs).basis[:, 0]
        z_all = ds.x @ basis
        for i in range(n):
            mask = np.arange(n) != i
            predictions[i] = _lda_predict(z_all[mask], y[mask], z_all[i], classes)
    else:
        for i in range(n):
            mask = np.arange(n) != i
            ds = make_dataset(y[mask], x[mask], center=True, standardize=standardize)
            basis = fit_sdr(ds, [u], **fit_kwargs).basis[:, 0]
            x_star = x[i] - ds.column_means
            if standardize:
                x_star = x_star / ds.column_sds
            predictions[i] = _lda_predict(
                ds.x @ basis, y[mask], float(x_star @ basis), classes
            )

    confusion = np.zeros((2, 2), dtype=int)
    for c, cls in enumerate(classes):
        for k, pred_cls in enumerate(classes):
            confusion[c, k] = int(((y == cls) & (predictions == pred_cls)).sum())
    n_correct = int(confusion.trace())
    return ClassificationResult(
        accuracy=n_correct / n,
        n_correct=n_correct,
        n_total=n,
        classes=classes,
        confusion=confusion,
        predictions=predictions,
        config_echo={
            "u": int(u),
            "d": 1,
            "method": method,
            "n_partitions": n_partitions,
            "seed": seed,
            "n_slices": n_slices,
            "fixed_basis": bool(fixed_basis),
            "standardize": bool(standardize),
            "n": n,
            "p": x.shape[1],
        },
    )
