"""Reference methods the integrated estimator is benchmarked against.

- pca_sdr: inverse regression restricted to the span of the top-u
  principal components (an unsupervised envelope).
- marginal_r1: one screening pass over singleton blocks, i.e. the
  integration pipeline degenerated to block size 1 and one partition.
"""

import numpy as np

from .data_model import sample_covariance
from .errors import ParameterError
from .kernel_integration import SdrFit, integrate_partitions, leading_basis
from .sir_core import sir_directions


def pca_sdr(dataset, u, d, n_slices=5):
    """Inverse-regression directions inside the top-u principal components."""
    if not 1 <= u <= dataset.p:
        raise ParameterError(f"u={u} out of range 1..{dataset.p}")
    if not 1 <= d <= u:
        raise ParameterError(f"d={d} out of range 1..{u}")
    sigma = sample_covariance(dataset)
    _, vec = np.linalg.eigh(sigma.sigma_hat)
    env = vec[:, ::-1][:, :u]
    z = dataset.x @ env
    sig_e = env.T @ (sigma.sigma_hat @ env)
    sig_e = (sig_e + sig_e.T) / 2.0
    res = sir_directions(dataset.y, z, n_slices, sigma_e=sig_e)
    basis = np.linalg.qr(env @ res.gammas[:, :d])[0]
    return SdrFit(
        basis=basis,
        spectrum=res.lambdas.copy(),
        d_hat=int(d),
        u_values=[int(u)],
    )


def marginal_r1(dataset, u, d, seed=0, n_slices=5, sigma=None):
    """One singleton-block screening pass followed by basis extraction."""
    kernel = integrate_partitions(
        dataset, u=u, r=1, n_partitions=1, seed=seed, n_slices=n_slices, sigma=sigma
    )
    return leading_basis(kernel, d=d)
