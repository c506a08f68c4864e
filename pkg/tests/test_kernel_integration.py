"""Sketch kernels, their Monte-Carlo integration, and basis extraction."""

import warnings

import numpy as np
import pytest

from irpsdr.data_model import CovarianceEstimate, make_dataset, sample_covariance
from irpsdr.errors import EstimationError, ParameterError
from irpsdr.kernel_integration import (
    IntegratedKernel,
    ensemble_kernel,
    integrate_partitions,
    integrate_sizes,
    kernel_from_dict,
    kernel_to_dict,
    leading_basis,
    sketch_kernel,
)
from irpsdr.model_selection import select_dimension
from irpsdr.partition_screen import candidate_sizes, random_partition, screen
from irpsdr.seeding import substream
from irpsdr.sir_core import sir_directions


def _toy(seed=0, n=60, p=10, signal=(0, 1)):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    y = x[:, signal[0]] + 0.5 * x[:, signal[1]] ** 2 + 0.2 * rng.normal(size=n)
    return make_dataset(y, x)


def test_sketch_kernel_matches_triple_product_oracle():
    d = _toy(1)
    sigma = sample_covariance(d)
    part = random_partition(d.p, 3, substream(3, 0))
    sel = screen(d, part, u=6)
    res = sir_directions(d.y, d.x[:, sel.indices], n_slices=5)
    sk = sketch_kernel(res, sel, sigma)

    # oracle: expand each rank-one term separately
    expect = np.zeros((d.p, d.p))
    for j in range(len(res.lambdas)):
        beta = np.zeros(d.p)
        beta[sel.indices] = res.gammas[:, j]
        expect += res.lambdas[j] * np.outer(beta, beta @ sigma.sigma_hat)
    np.testing.assert_allclose(sk.dense(sigma), expect, atol=1e-10)

    # rows outside the selection stay zero
    outside = np.setdiff1d(np.arange(d.p), sel.indices)
    assert np.all(sk.betas[outside] == 0.0)
    assert sk.betas.shape == (d.p, len(sel.indices))


def test_integrate_partitions_is_mean_of_sketches():
    d = _toy(2)
    sigma = sample_covariance(d)
    u, r, count, seed = 6, 2, 4, 11
    kernel = integrate_partitions(d, u=u, r=r, n_partitions=count, seed=seed)

    expect = np.zeros((d.p, d.p))
    for l in range(count):
        part = random_partition(d.p, r, substream(seed, u, r, l))
        sel = screen(d, part, u)
        res = sir_directions(d.y, d.x[:, sel.indices], n_slices=5)
        sk = sketch_kernel(res, sel, sigma)
        expect += sk.dense(sigma)
    expect /= count
    np.testing.assert_allclose(kernel.k_matrix, expect, atol=1e-10)


def test_integrate_partitions_factored_consistency():
    d = _toy(3)
    kernel = integrate_partitions(d, u=4, r=2, n_partitions=3, seed=0)
    sigma_hat = kernel.sigma.sigma_hat
    np.testing.assert_allclose(
        kernel.k_matrix, kernel.g_matrix @ sigma_hat, atol=1e-12
    )
    assert abs(kernel.trace_m - np.trace(kernel.k_matrix)) <= 1e-12
    # the symmetric factor is PSD
    assert np.linalg.eigvalsh(kernel.g_matrix).min() >= -1e-10


def test_integrate_partitions_deterministic():
    d = _toy(4)
    a = integrate_partitions(d, u=6, r=3, n_partitions=3, seed=5)
    b = integrate_partitions(d, u=6, r=3, n_partitions=3, seed=5)
    c = integrate_partitions(d, u=6, r=3, n_partitions=3, seed=6)
    assert np.array_equal(a.k_matrix, b.k_matrix)
    assert not np.array_equal(a.k_matrix, c.k_matrix)


def test_integrate_partitions_r1_forces_single_partition():
    d = _toy(5)
    a = integrate_partitions(d, u=5, r=1, n_partitions=1, seed=2)
    b = integrate_partitions(d, u=5, r=1, n_partitions=40, seed=2)
    assert np.array_equal(a.k_matrix, b.k_matrix)
    assert b.provenance["partition_counts"] == [{"u": 5, "r": 1, "count": 1}]


def test_integrate_sizes_sums_partition_kernels():
    d = _toy(6)
    u, count, seed = 6, 3, 7
    combined = integrate_sizes(d, u=u, n_partitions=count, seed=seed)
    expect = np.zeros((d.p, d.p))
    for r in candidate_sizes(u):
        expect += integrate_partitions(d, u=u, r=r, n_partitions=count, seed=seed).k_matrix
    np.testing.assert_allclose(combined.k_matrix, expect, atol=1e-10)
    assert combined.provenance["r_values"] == candidate_sizes(u)


def test_ensemble_kernel_trace_normalized_sum():
    d = _toy(7)
    grid = [4, 6]
    ens = ensemble_kernel(d, u_grid=grid, n_partitions=2, seed=3)
    expect = np.zeros((d.p, d.p))
    for u in grid:
        part = integrate_sizes(d, u=u, n_partitions=2, seed=3)
        expect += part.k_matrix / part.trace_m
    np.testing.assert_allclose(ens.k_matrix, expect, atol=1e-8)
    assert set(ens.trace_m) == set(grid)
    assert ens.provenance["u_values"] == grid


def _no_signal_dataset():
    # slice means vanish exactly for every covariate subset, so every
    # sketch kernel is identically zero
    y = np.repeat([0.0, 1.0], 4)
    base = np.array(
        [[1.0, 2.0, -1.0], [-1.0, -2.0, 1.0], [2.0, -1.0, 3.0], [-2.0, 1.0, -3.0]]
    )
    x = np.vstack([base, 1.5 * base])
    return make_dataset(y, x)


def test_ensemble_all_degenerate_is_estimation_error():
    d = _no_signal_dataset()
    with pytest.raises(EstimationError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ensemble_kernel(d, u_grid=[2, 3], n_partitions=2, seed=0)


def test_leading_basis_reduces_to_full_sir():
    # u = r = p and one partition: the kernel is exactly the full-data
    # inverse-regression operator, so spans must coincide
    d = _toy(8, n=120, p=8)
    sigma = sample_covariance(d)
    kernel = integrate_partitions(d, u=d.p, r=d.p, n_partitions=1, seed=0)
    full = sir_directions(d.y, d.x, n_slices=5)
    for dd in (1, 2):
        fit = leading_basis(kernel, d=dd)
        b1 = fit.basis
        b2 = full.gammas[:, :dd]
        p1 = b1 @ np.linalg.solve(b1.T @ b1, b1.T)
        p2 = b2 @ np.linalg.solve(b2.T @ b2, b2.T)
        assert np.linalg.norm(p1 - p2) <= 1e-7
        np.testing.assert_allclose(
            fit.spectrum[: len(full.lambdas)], full.lambdas, atol=1e-9
        )


def test_leading_basis_orthonormal_and_sorted():
    d = _toy(9)
    kernel = integrate_sizes(d, u=6, n_partitions=2, seed=1)
    fit = leading_basis(kernel, d=2)
    assert fit.basis.shape == (d.p, 2)
    np.testing.assert_allclose(fit.basis.T @ fit.basis, np.eye(2), atol=1e-8)
    assert np.all(np.diff(fit.spectrum) <= 1e-12)
    assert fit.d_hat == 2
    assert fit.u_values == [6]


def test_leading_basis_pads_past_numerical_rank():
    d = _toy(10)
    kernel = integrate_partitions(d, u=2, r=2, n_partitions=1, seed=0)
    with pytest.warns(UserWarning, match="rank"):
        fit = leading_basis(kernel, d=d.p)
    np.testing.assert_allclose(fit.basis.T @ fit.basis, np.eye(d.p), atol=1e-8)


def test_leading_basis_auto_dimension():
    d = _toy(11, n=200)
    kernel = integrate_sizes(d, u=6, n_partitions=3, seed=2)
    fit = leading_basis(kernel, d=None)
    assert 1 <= fit.d_hat <= d.p
    assert fit.basis.shape == (d.p, fit.d_hat)


def test_leading_basis_auto_dimension_caps_candidates_at_envelope():
    # synthetic factored kernel with sigma = I, so the kernel spectrum is g's
    rng = np.random.default_rng(30)
    p, u = 40, 4
    q = np.linalg.qr(rng.normal(size=(p, p)))[0]
    lam = np.full(p, 2.0)
    lam[:2] = [5.0, 4.0]
    g = (q * lam) @ q.T
    g = (g + g.T) / 2.0
    sigma = CovarianceEstimate(np.eye(p))
    kernel = IntegratedKernel(
        k_matrix=g @ sigma.sigma_hat,
        g_matrix=g,
        sigma=sigma,
        provenance={"n": 100, "p": p, "u_values": [u]},
        trace_m=float(np.trace(g)),
    )
    fit = leading_basis(kernel, d=None)
    spectrum = np.sort(lam)[::-1]
    capped = select_dimension(spectrum[:u], n=100).d_hat
    full = select_dimension(spectrum, n=100).d_hat
    assert capped != full  # the cap matters on this spectrum
    assert fit.d_hat == capped


def test_leading_basis_bad_d():
    d = _toy(12)
    kernel = integrate_partitions(d, u=4, r=2, n_partitions=1, seed=0)
    with pytest.raises(ParameterError):
        leading_basis(kernel, d=0)
    with pytest.raises(ParameterError):
        leading_basis(kernel, d=d.p + 1)


def test_kernel_json_round_trip():
    d = _toy(13)
    kernel = integrate_sizes(d, u=4, n_partitions=2, seed=9)
    blob = kernel_to_dict(kernel)
    back = kernel_from_dict(blob)
    assert np.array_equal(back.k_matrix, kernel.k_matrix)
    assert np.array_equal(back.g_matrix, kernel.g_matrix)
    assert back.provenance == kernel.provenance
    assert back.trace_m == kernel.trace_m
    # basis extraction still works after the round trip
    a = leading_basis(kernel, d=1)
    b = leading_basis(back, d=1)
    assert np.array_equal(a.basis, b.basis)


def test_ensemble_trace_map_round_trip():
    d = _toy(14)
    ens = ensemble_kernel(d, u_grid=[4, 6], n_partitions=2, seed=4)
    back = kernel_from_dict(kernel_to_dict(ens))
    assert back.trace_m == ens.trace_m
