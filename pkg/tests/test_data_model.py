"""Dataset construction, CSV ingestion, and the shared sample covariance."""

import numpy as np
import pytest

from irpsdr.data_model import Dataset, load_csv, make_dataset, sample_covariance
from irpsdr.errors import DataError, ParameterError


def _cov_bruteforce(x):
    # independent route: explicit outer-product sum, divisor n
    xc = x - x.mean(axis=0)
    n, p = x.shape
    s = np.zeros((p, p))
    for i in range(n):
        s += np.outer(xc[i], xc[i])
    return s / n


def test_make_dataset_centers_columns():
    rng = np.random.default_rng(0)
    d = make_dataset(rng.normal(size=30), rng.normal(loc=3.0, size=(30, 4)))
    assert d.centered
    assert np.abs(d.x.mean(axis=0)).max() <= 1e-10
    assert d.column_means.shape == (4,)


def test_make_dataset_standardize_unit_scale():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(50, 3)) * np.array([0.1, 5.0, 40.0])
    d = make_dataset(rng.normal(size=50), x, standardize=True)
    sds = np.sqrt((d.x**2).mean(axis=0))
    np.testing.assert_allclose(sds, 1.0, atol=1e-10)
    assert d.column_sds is not None


def test_standardize_constant_column_rejected():
    y = np.arange(10.0)
    x = np.ones((10, 2))
    x[:, 0] = np.arange(10.0)
    with pytest.raises(DataError, match="column 2"):
        make_dataset(y, x, standardize=True)


def test_nonfinite_rejected():
    y = np.arange(4.0)
    x = np.ones((4, 2))
    x[2, 1] = np.nan
    with pytest.raises(DataError):
        make_dataset(y, x)


def test_too_few_rows_rejected():
    with pytest.raises(DataError):
        make_dataset(np.array([1.0]), np.array([[1.0, 2.0]]))


def test_sample_covariance_frozen_value():
    # brute-force value for this matrix: [[6.5, -5.25], [-5.25, 16.5]]
    x = np.array([[1.0, 2.0], [3.0, -1.0], [-4.0, 5.0], [0.0, -6.0]])
    d = make_dataset(np.arange(4.0), x)
    est = sample_covariance(d)
    np.testing.assert_allclose(
        est.sigma_hat, np.array([[6.5, -5.25], [-5.25, 16.5]]), atol=1e-12
    )


def test_sample_covariance_matches_bruteforce():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(23, 6))
    d = make_dataset(rng.normal(size=23), x)
    est = sample_covariance(d)
    np.testing.assert_allclose(est.sigma_hat, _cov_bruteforce(x), atol=1e-12)
    # divisor is n, not n - 1
    assert not np.allclose(est.sigma_hat, np.cov(x.T))


def test_sample_covariance_symmetric_psd_diag():
    rng = np.random.default_rng(8)
    d = make_dataset(rng.normal(size=40), rng.normal(size=(40, 9)))
    est = sample_covariance(d)
    assert np.abs(est.sigma_hat - est.sigma_hat.T).max() <= 1e-10
    assert est.sigma_hat.diagonal().min() >= 0.0


def test_sample_covariance_requires_centered():
    y = np.arange(5.0)
    x = np.arange(10.0).reshape(5, 2) + 3.0
    d = Dataset(y=y, x=x, centered=False, column_means=np.zeros(2))
    with pytest.raises(ParameterError):
        sample_covariance(d)


def test_sqrt_factor_squares_back():
    rng = np.random.default_rng(9)
    d = make_dataset(rng.normal(size=60), rng.normal(size=(60, 5)))
    est = sample_covariance(d)
    h = est.sqrt_factor()
    np.testing.assert_allclose(h @ h, est.sigma_hat, atol=1e-10)
    assert np.abs(h - h.T).max() <= 1e-10


def _write(tmp_path, text, name="data.csv"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_load_csv_with_header_response_by_name(tmp_path):
    path = _write(tmp_path, "resp,a,b\n1.0,2.0,3.0\n4.0,5.0,6.0\n7.0,8.0,9.0\n")
    d = load_csv(path, response="resp")
    assert d.x.shape == (3, 2)
    np.testing.assert_allclose(d.y, [1.0, 4.0, 7.0])
    assert np.abs(d.x.mean(axis=0)).max() <= 1e-10


def test_load_csv_headerless_response_by_index(tmp_path):
    path = _write(tmp_path, "1.0,2.0,3.0\n4.0,5.0,6.0\n7.0,8.0,9.0\n")
    d = load_csv(path, response=2)
    np.testing.assert_allclose(d.y, [3.0, 6.0, 9.0])
    assert d.x.shape == (3, 2)


def test_load_csv_bad_cell_names_row_and_column(tmp_path):
    path = _write(tmp_path, "a,b\n1.0,2.0\n1.5,oops\n")
    with pytest.raises(DataError, match=r"row 2.*column 2"):
        load_csv(path, response="a")


def test_load_csv_ragged_row_rejected(tmp_path):
    path = _write(tmp_path, "a,b,c\n1.0,2.0,3.0\n4.0,5.0\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(path, response="a")


def test_load_csv_unknown_response(tmp_path):
    path = _write(tmp_path, "a,b\n1.0,2.0\n3.0,4.0\n")
    with pytest.raises(DataError):
        load_csv(path, response="zzz")
