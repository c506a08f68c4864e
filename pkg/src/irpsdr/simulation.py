"""Benchmark regression models and the replicated experiment driver.

Four generators with known central subspaces:

- m1: uniform covariates, y = log|b'x - 4| + sigma0 * eps
- m2: AR(1) Gaussian covariates (rho 0.5), y = 1 + exp(b'x) + eps
- m3: equicorrelated Gaussian covariates, y = 0.5 * exp(0.75 b'x) * eps
- m4: inverse model x = b1 y + b2 y^2 + 0.5 e with uniform y

Coefficients follow the usual sparse layouts; when p is smaller than a
layout the active set is truncated to fit.
"""

import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .baselines import marginal_r1, pca_sdr
from .data_model import make_dataset, sample_covariance
from .errors import ParameterError
from .evaluation import trace_correlation
from .kernel_integration import ensemble_from_parts, integrate_sizes, leading_basis
from .seeding import child_seed, substream

FIRST_TEN = np.array([-0.5, 1.0, 0.5, 1.0, -1.0, -0.8, 0.8, 1.0, 0.5, 0.75])

_DEFAULTS = {
    "m1": (100, 300, 1),
    "m2": (200, 1000, 1),
    "m3": (100, 500, 1),
    "m4": (100, 500, 2),
}

# envelope sizes default to these fractions of n, clipped to p
_GRID_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5)

METHODS = ("irp_sdr_bu", "irp_sdr_ensemble", "marginal_r1", "pca_sdr")


@dataclass(frozen=True)
class ModelSpec:
    name: str
    n: int
    p: int
    d_true: int
    sigma0: float = 0.2


def model_spec(name, n=None, p=None, sigma0=None):
    """Spec for one of the benchmark models, with optional size overrides."""
    if name not in _DEFAULTS:
        raise ParameterError(f"unknown model {name!r}; choose from {sorted(_DEFAULTS)}")
    dn, dp, d_true = _DEFAULTS[name]
    n = dn if n is None else int(n)
    p = dp if p is None else int(p)
    if n < 2 or p < 1:
        raise ParameterError("model needs n >= 2 and p >= 1")
    if name == "m4" and p < 4:
        raise ParameterError("m4 needs p >= 4")
    return ModelSpec(
        name=name, n=n, p=p, d_true=d_true, sigma0=0.2 if sigma0 is None else sigma0
    )


def true_basis(spec):
    """Basis of the model's central subspace, shape (p, d_true)."""
    p = spec.p
    if spec.name in ("m1", "m3"):
        b = np.zeros((p, 1))
        k = min(10, p)
        b[:k, 0] = FIRST_TEN[:k]
        return b
    if spec.name == "m2":
        b = np.zeros((p, 1))
        b[p // 2 : min(p // 2 + 4, p), 0] = 1.0
        return b
    # m4: directions proportional to Sigma^{-1} beta_j; with Sigma
    # equicorrelated the inverse acts as 2 (I - 11'/(p+1))
    betas = _m4_betas(p)
    return 2.0 * (betas - np.ones((p, 1)) * (betas.sum(axis=0) / (p + 1)))


def _m4_betas(p):
    betas = np.zeros((p, 2))
    betas[0, 0], betas[1, 0] = 0.5, 0.75
    betas[2, 1], betas[3, 1] = 0.75, 0.5
    return betas


def _equicorr(p):
    return 0.5 * np.eye(p) + 0.5 * np.ones((p, p))


def population_sigma(spec):
    """Exact covariance of the covariates under the model."""
    p = spec.p
    if spec.name == "m1":
        return np.eye(p) / 12.0
    if spec.name == "m2":
        idx = np.arange(p)
        return 0.5 ** np.abs(idx[:, None] - idx[None, :])
    if spec.name == "m3":
        return _equicorr(p)
    betas = _m4_betas(p)
    c = np.array([[1.0 / 12.0, 1.0 / 12.0], [1.0 / 12.0, 4.0 / 45.0]])
    return betas @ c @ betas.T + 0.25 * _equicorr(p)


def generate(spec, rng):
    """Draw one dataset; covariates are centered empirically."""
    n, p = spec.n, spec.p
    if spec.name == "m1":
        x = rng.uniform(size=(n, p))
        eps = rng.standard_normal(n)
        y = np.log(np.abs(x @ true_basis(spec)[:, 0] - 4.0)) + spec.sigma0 * eps
    elif spec.name == "m2":
        z = rng.standard_normal((n, p))
        x = np.empty((n, p))
        x[:, 0] = z[:, 0]
        for j in range(1, p):  # stationary AR(1) with lag correlation 0.5
            x[:, j] = 0.5 * x[:, j - 1] + np.sqrt(0.75) * z[:, j]
        eps = rng.standard_normal(n)
        y = 1.0 + np.exp(x @ true_basis(spec)[:, 0]) + eps
    elif spec.name == "m3":
        z = rng.standard_normal((n, p))
        w = rng.standard_normal((n, 1))
        x = np.sqrt(0.5) * (z + w)
        eps = rng.standard_normal(n)
        y = 0.5 * np.exp(0.75 * (x @ true_basis(spec)[:, 0])) * eps
    else:  # m4, the inverse model
        y = rng.uniform(size=n)
        z = rng.standard_normal((n, p))
        w = rng.standard_normal((n, 1))
        e = np.sqrt(0.5) * (z + w)
        betas = _m4_betas(p)
        x = np.outer(y, betas[:, 0]) + np.outer(y**2, betas[:, 1]) + 0.5 * e
    return make_dataset(y, x)


def default_u_grid(spec):
    """Envelope grid: fractions of n rounded, clipped to p, deduplicated."""
    return sorted({min(spec.p, max(1, round(f * spec.n))) for f in _GRID_FRACTIONS})


@dataclass
class ExperimentReport:
    rows: list
    aggregates: list
    config_echo: dict = field(default_factory=dict)


def _replicate_rows(task):
    """All result rows of one (model, replicate) cell; order is canonical."""
    (spec, model_idx, rep, methods, u_grid, n_partitions, n_slices, seed, timing) = task
    data = generate(spec, substream(seed, model_idx, rep))
    part_seed = child_seed(seed, model_idx, rep)
    sigma = sample_covariance(data)
    pop = population_sigma(spec)
    truth = true_basis(spec)
    d = spec.d_true

    parts = {}
    if "irp_sdr_bu" in methods or "irp_sdr_ensemble" in methods:
        for u in u_grid:
            parts[u] = integrate_sizes(
                data, u, n_partitions=n_partitions, seed=part_seed,
                n_slices=n_slices, sigma=sigma,
            )

    def row(method, u, fit, elapsed):
        rho = trace_correlation(fit.basis, truth, pop).rho
        return {
            "model": spec.name,
            "method": method,
            "u": int(u),
            "replicate": int(rep),
            "rho": float(rho),
            "d_hat": int(d),
            "wall_time": float(elapsed) if timing else 0.0,
        }

    rows = []
    for method in methods:
        if method == "irp_sdr_ensemble":
            t0 = time.perf_counter()
            fit = leading_basis(ensemble_from_parts(list(parts.values())), d=d)
            rows.append(row(method, 0, fit, time.perf_counter() - t0))
            continue
        for u in u_grid:
            t0 = time.perf_counter()
            if method == "irp_sdr_bu":
                fit = leading_basis(parts[u], d=d)
            elif method == "marginal_r1":
                fit = marginal_r1(data, u, d, seed=part_seed, n_slices=n_slices,
                                  sigma=sigma)
            else:  # pca_sdr
                fit = pca_sdr(data, u, d, n_slices=n_slices)
            rows.append(row(method, u, fit, time.perf_counter() - t0))
    return rows


def _aggregate(rows):
    groups = {}
    for r in rows:
        groups.setdefault((r["model"], r["method"], r["u"]), []).append(r["rho"])
    out = []
    for (model, method, u), vals in groups.items():
        out.append(
            {
                "model": model,
                "method": method,
                "u": u,
                "rho_mean": float(statistics.fmean(vals)),
                "rho_median": float(statistics.median(vals)),
                "rho_sd": float(statistics.stdev(vals)) if len(vals) > 1 else 0.0,
                "count": len(vals),
            }
        )
    return out


def run_experiment(
    models,
    methods=METHODS,
    replicates=100,
    seed=0,
    u_grid=None,
    n_partitions=50,
    n_slices=5,
    workers=1,
    record_timing=False,
):
    """Replicated benchmark over models x methods x envelope sizes.

    Every (model, replicate) cell draws its data and partitions from
    seed-derived substreams, so results are identical for any worker
    count.  Timing is off by default to keep reports reproducible
    byte for byte; record_timing=True fills the wall_time column.
    """
    models = list(models)
    methods = tuple(methods)
    if not models:
        raise ParameterError("no models given")
    for m in methods:
        if m not in METHODS:
            raise ParameterError(f"unknown method {m!r}; choose from {list(METHODS)}")
    if not methods:
        raise ParameterError("no methods given")
    if replicates < 1:
        raise ParameterError("replicates must be at least 1")
    if workers < 1:
        raise ParameterError("workers must be at least 1")
    if u_grid is not None:
        u_grid = sorted({int(u) for u in u_grid})
        if not u_grid or u_grid[0] < 1:
            raise ParameterError("u_grid entries must be positive")

    grids = {i: (u_grid if u_grid is not None else default_u_grid(spec))
             for i, spec in enumerate(models)}
    tasks = [
        (spec, i, rep, methods, grids[i], n_partitions, n_slices, seed, record_timing)
        for i, spec in enumerate(models)
        for rep in range(replicates)
    ]

    if workers == 1:
        per_task = [_replicate_rows(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("fork")
        ) as pool:
            per_task = list(pool.map(_replicate_rows, tasks))

    rows = [r for chunk in per_task for r in chunk]
    config_echo = {
        "models": [
            {"name": s.name, "n": s.n, "p": s.p, "d_true": s.d_true,
             "sigma0": s.sigma0, "u_grid": grids[i]}
            for i, s in enumerate(models)
        ],
        "methods": list(methods),
        "replicates": replicates,
        "seed": seed,
        "n_partitions": n_partitions,
        "n_slices": n_slices,
        "record_timing": record_timing,
    }
    return ExperimentReport(rows=rows, aggregates=_aggregate(rows), config_echo=config_echo)
