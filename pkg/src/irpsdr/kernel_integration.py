"""Monte-Carlo integration of partition-sketch kernels.

One sketch = one random partition screened down to an envelope, inverse
regression inside it, and the rank-u kernel K = B Lambda B' Sigma_hat.
Sketches are averaged over partitions, summed over block sizes, and the
per-size kernels combined into a trace-normalized ensemble.

Because every sketch shares the one full-sample covariance, each
integrated kernel keeps the form G Sigma_hat with G symmetric PSD.  The
leading invariant subspace therefore comes from the symmetric problem
Sigma^{1/2} G Sigma^{1/2}, which stays exact even when Sigma_hat is
singular (p > n): an eigenvector w with eigenvalue > 0 maps to the
kernel eigenvector G Sigma^{1/2} w.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data_model import CovarianceEstimate, sample_covariance
from .errors import EstimationError, NumericalError, ParameterError
from .model_selection import select_dimension
from .partition_screen import (
    _block_score,
    _response_parts,
    _screen_scored,
    candidate_sizes,
    random_partition,
)
from .seeding import substream
from .sir_core import sir_directions

# an integrated kernel with trace at or below this is treated as signal-free
_DEGENERATE_TRACE = 1e-12
# relative eigenvalue cutoff for the numerical rank of a kernel
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class SketchKernel:
    """Factored kernel of a single (partition, envelope) sketch."""

    betas: np.ndarray
    lambdas: np.ndarray
    selection: object

    def dense(self, sigma):
        """Materialize B Lambda B' Sigma_hat (diagnostics; p x p)."""
        return (self.betas * self.lambdas) @ (self.betas.T @ sigma.sigma_hat)


@dataclass
class IntegratedKernel:
    """A p x p kernel k = g @ sigma_hat with its symmetric factor kept."""

    k_matrix: np.ndarray
    g_matrix: np.ndarray | None
    sigma: CovarianceEstimate | None
    provenance: dict
    trace_m: object  # float, or {u: float} for ensembles


@dataclass
class SdrFit:
    """An estimated basis for the central subspace plus its kernel spectrum."""

    basis: np.ndarray
    spectrum: np.ndarray
    d_hat: int
    u_values: list
    config_echo: dict = field(default_factory=dict)


def sketch_kernel(sir, selection, sigma):
    """Embed the envelope directions into p coordinates, eigenvalue-weighted."""
    idx = selection.indices
    betas = np.zeros((sigma.p, sir.gammas.shape[1]))
    betas[idx] = sir.gammas
    return SketchKernel(betas=betas, lambdas=sir.lambdas.copy(), selection=selection)


def _mean_sketch_factor(dataset, sigma, u, r, n_partitions, seed, n_slices, y_parts):
    """Mean over partitions of B Lambda B', accumulated as a dense factor."""
    p = dataset.p
    y_centered, y_sq_mean = y_parts
    count = 1 if r == 1 else n_partitions  # singleton partition is unique
    g = np.zeros((p, p))
    for l in range(count):
        part = random_partition(p, r, substream(seed, u, r, l))
        scores = [
            _block_score(dataset.x[:, blk], y_centered, y_sq_mean)
            for blk in part.blocks
        ]
        sel = _screen_scored(part, u, scores)
        idx = sel.indices
        sig_e = sigma.sigma_hat[np.ix_(idx, idx)]
        try:
            res = sir_directions(dataset.y, dataset.x[:, idx], n_slices, sigma_e=sig_e)
        except NumericalError as exc:
            raise NumericalError(f"sketch (u={u}, r={r}, partition {l}): {exc}") from exc
        g[np.ix_(idx, idx)] += (res.gammas * res.lambdas) @ res.gammas.T
    g /= count
    return (g + g.T) / 2.0, count


def _base_provenance(dataset, seed):
    return {"master_seed": int(seed), "n": dataset.n, "p": dataset.p}


def integrate_partitions(dataset, u, r, n_partitions=50, seed=0, n_slices=5, sigma=None):
    """Average the sketch kernels of `n_partitions` random size-r partitions.

    With r = 1 the partition is unique as a set, so a single sketch is
    computed no matter how many were requested.
    """
    if u < 1:
        raise ParameterError(f"envelope size u={u} must be positive")
    if n_partitions < 1:
        raise ParameterError("n_partitions must be at least 1")
    if sigma is None:
        sigma = sample_covariance(dataset)
    y_parts = _response_parts(dataset.y)
    g, count = _mean_sketch_factor(
        dataset, sigma, u, r, n_partitions, seed, n_slices, y_parts
    )
    k = g @ sigma.sigma_hat
    prov = _base_provenance(dataset, seed)
    prov.update(
        u_values=[int(u)],
        r_values=[int(r)],
        partition_counts=[{"u": int(u), "r": int(r), "count": count}],
        dropped=[],
    )
    return IntegratedKernel(
        k_matrix=k,
        g_matrix=g,
        sigma=sigma,
        provenance=prov,
        trace_m=float(np.trace(k)),
    )


def _factor_over_sizes(dataset, sigma, u, n_partitions, seed, n_slices, y_parts):
    sizes = candidate_sizes(u)
    g = np.zeros((dataset.p, dataset.p))
    counts = []
    for r in sizes:
        g_r, count = _mean_sketch_factor(
            dataset, sigma, u, r, n_partitions, seed, n_slices, y_parts
        )
        g += g_r
        counts.append({"u": int(u), "r": int(r), "count": count})
    return g, sizes, counts


def integrate_sizes(dataset, u, n_partitions=50, seed=0, n_slices=5, sigma=None):
    """Sum the partition-averaged kernels over every candidate block size of u."""
    if u < 1:
        raise ParameterError(f"envelope size u={u} must be positive")
    if sigma is None:
        sigma = sample_covariance(dataset)
    y_parts = _response_parts(dataset.y)
    g, sizes, counts = _factor_over_sizes(
        dataset, sigma, u, n_partitions, seed, n_slices, y_parts
    )
    k = g @ sigma.sigma_hat
    prov = _base_provenance(dataset, seed)
    prov.update(u_values=[int(u)], r_values=sizes, partition_counts=counts, dropped=[])
    return IntegratedKernel(
        k_matrix=k,
        g_matrix=g,
        sigma=sigma,
        provenance=prov,
        trace_m=float(np.trace(k)),
    )


def ensemble_from_parts(parts):
    """Trace-normalized sum of single-envelope integrated kernels.

    Each part must carry its symmetric factor and the shared covariance.
    Degenerate parts (trace <= 1e-12) are skipped with a warning and
    recorded under provenance["dropped"].
    """
    if not parts:
        raise ParameterError("no kernels to combine")
    parts = sorted(parts, key=lambda k: k.provenance["u_values"][0])
    sigma = parts[0].sigma
    if sigma is None:
        raise ParameterError("ensemble parts must carry their covariance")

    g_total = np.zeros_like(parts[0].g_matrix)
    traces = {}
    counts = []
    sizes_union = set()
    dropped = []
    for part in parts:
        u = int(part.provenance["u_values"][0])
        m_u = float(np.sum(part.g_matrix * sigma.sigma_hat))  # trace(G Sigma)
        counts.extend(part.provenance["partition_counts"])
        sizes_union.update(part.provenance["r_values"])
        if m_u <= _DEGENERATE_TRACE:
            warnings.warn(f"u={u}: kernel trace {m_u} is degenerate, skipping")
            dropped.append(u)
            continue
        traces[u] = m_u
        g_total += part.g_matrix / m_u
    if not traces:
        raise EstimationError("every envelope size produced a degenerate kernel")

    k = g_total @ sigma.sigma_hat
    prov = {
        "master_seed": parts[0].provenance["master_seed"],
        "n": parts[0].provenance["n"],
        "p": parts[0].provenance["p"],
        "u_values": [int(p.provenance["u_values"][0]) for p in parts],
        "r_values": sorted(sizes_union),
        "partition_counts": counts,
        "dropped": dropped,
    }
    return IntegratedKernel(
        k_matrix=k, g_matrix=g_total, sigma=sigma, provenance=prov, trace_m=traces
    )


def ensemble_kernel(dataset, u_grid, n_partitions=50, seed=0, n_slices=5, sigma=None):
    """Trace-normalized sum of the per-size kernels over an envelope grid."""
    grid = sorted({int(u) for u in u_grid})
    if not grid:
        raise ParameterError("u_grid is empty")
    if sigma is None:
        sigma = sample_covariance(dataset)
    parts = [
        integrate_sizes(dataset, u, n_partitions, seed, n_slices, sigma) for u in grid
    ]
    return ensemble_from_parts(parts)


def _spectrum_and_carriers(kernel):
    """Eigenvalues of the kernel plus the pieces needed to map eigenvectors."""
    if kernel.g_matrix is not None and kernel.sigma is not None:
        half = kernel.sigma.sqrt_factor()
        s = half @ kernel.g_matrix @ half
        s = (s + s.T) / 2.0
        w, vec = np.linalg.eigh(s)
        return w[::-1], vec[:, ::-1], half, True
    warnings.warn(
        "kernel carries no symmetric factor; falling back to euclidean symmetrization"
    )
    s = (kernel.k_matrix + kernel.k_matrix.T) / 2.0
    w, vec = np.linalg.eigh(s)
    return w[::-1], vec[:, ::-1], None, False


def leading_basis(kernel, d=None, c_n=None, direction="max"):
    """Orthonormal basis for the top-d invariant subspace of an integrated kernel.

    With d=None the dimension is chosen by the BIC-type criterion from
    the kernel spectrum.  If d exceeds the numerical rank, the basis is
    padded from the remaining eigenvectors with a warning.
    """
    p = kernel.k_matrix.shape[0]
    w, vec, half, exact = _spectrum_and_carriers(kernel)
    spectrum = w.copy()

    if d is None:
        n = kernel.provenance.get("n")
        if n is None:
            raise ParameterError("kernel provenance lacks n; pass d explicitly")
        # candidate dimensions stop at the envelope size: no sketch can
        # carry more directions than u, so eigenvalues past max(u) are
        # integration artifacts and would only dilute the penalty
        u_vals = kernel.provenance.get("u_values") or []
        cap = min(p, max(1, int(max(u_vals)))) if u_vals else p
        d = select_dimension(spectrum[:cap], n=n, c_n=c_n, direction=direction).d_hat
    d = int(d)
    if not 1 <= d <= p:
        raise ParameterError(f"d={d} out of range 1..{p}")

    if exact:
        rank = int(np.sum(w > _RANK_TOL * max(w[0], _RANK_TOL)))
        lead = min(d, rank)
        cols = kernel.g_matrix @ (half @ vec[:, :lead])
        if lead < d:
            warnings.warn(
                f"requested d={d} exceeds numerical rank {rank}; padding basis"
            )
            cols = np.column_stack([cols, vec[:, lead:d]]) if lead else vec[:, :d]
        basis = np.linalg.qr(cols)[0][:, :d]
    else:
        basis = vec[:, :d]

    u_values = list(kernel.provenance.get("u_values", []))
    return SdrFit(basis=basis, spectrum=spectrum, d_hat=d, u_values=u_values)


def kernel_to_dict(kernel):
    """JSON-ready dict; matrices as row-major nested lists."""
    trace = kernel.trace_m
    if isinstance(trace, dict):
        trace = {str(u): float(m) for u, m in trace.items()}
    out = {
        "kind": "integrated_kernel",
        "k_matrix": kernel.k_matrix.tolist(),
        "provenance": kernel.provenance,
        "trace_m": trace,
    }
    if kernel.g_matrix is not None:
        out["g_matrix"] = kernel.g_matrix.tolist()
    if kernel.sigma is not None:
        out["sigma_hat"] = kernel.sigma.sigma_hat.tolist()
    return out


def kernel_from_dict(blob):
    if blob.get("kind") != "integrated_kernel":
        raise ParameterError("not an integrated-kernel blob")
    trace = blob["trace_m"]
    if isinstance(trace, dict):
        trace = {int(u): float(m) for u, m in trace.items()}
    g = blob.get("g_matrix")
    sigma_hat = blob.get("sigma_hat")
    return IntegratedKernel(
        k_matrix=np.asarray(blob["k_matrix"], dtype=float),
        g_matrix=None if g is None else np.asarray(g, dtype=float),
        sigma=None if sigma_hat is None else CovarianceEstimate(np.asarray(sigma_hat)),
        provenance=blob["provenance"],
        trace_m=trace,
    )


def fit_to_dict(fit):
    """JSON-ready dict for an SdrFit."""
    return {
        "kind": "sdr_fit",
        "basis": fit.basis.tolist(),
        "spectrum": fit.spectrum.tolist(),
        "d_hat": int(fit.d_hat),
        "u_values": [int(u) for u in fit.u_values],
        "config_echo": fit.config_echo,
    }


def fit_from_dict(blob):
    if blob.get("kind") != "sdr_fit":
        raise ParameterError("not an sdr-fit blob")
    return SdrFit(
        basis=np.asarray(blob["basis"], dtype=float),
        spectrum=np.asarray(blob["spectrum"], dtype=float),
        d_hat=int(blob["d_hat"]),
        u_values=[int(u) for u in blob["u_values"]],
        config_echo=dict(blob.get("config_echo", {})),
    )
