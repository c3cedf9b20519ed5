"""Jacobi SVD oracle, cross-checked against an eigendecomposition route."""

import numpy as np
import pytest

from rqrcp import NonConvergenceError, jacobi_svd_oracle
from rqrcp.kernels import EPS


def test_diagonal():
    U, s, V = jacobi_svd_oracle(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(s, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(U), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-14)


def test_orthogonal_input_gives_unit_spectrum():
    rng = np.random.default_rng(0)
    Q = np.linalg.qr(rng.standard_normal((9, 9)))[0]
    _, s, _ = jacobi_svd_oracle(Q)
    np.testing.assert_allclose(s, np.ones(9), atol=100 * EPS)


def test_random_rectangular_reconstruction_and_eig_crosscheck():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((20, 15))
    U, s, V = jacobi_svd_oracle(A)
    np.testing.assert_allclose(U @ (s[:, None] * V.T), A, atol=1e3 * EPS * np.linalg.norm(A))
    assert np.linalg.norm(U.T @ U - np.eye(15)) <= 1e3 * EPS
    assert np.linalg.norm(V.T @ V - np.eye(15)) <= 1e3 * EPS
    assert np.all(np.diff(s) <= 0)
    # independent route: eigenvalues of the Gram matrix
    lam = np.linalg.eigvalsh(A.T @ A)[::-1]
    np.testing.assert_allclose(s, np.sqrt(np.maximum(lam, 0)), rtol=1e-8)


def test_matches_lapack_singular_values():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((12, 18))
    _, s, _ = jacobi_svd_oracle(A)
    np.testing.assert_allclose(s, np.linalg.svd(A, compute_uv=False), rtol=1e-10)


def test_wide_matrix_transposes():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 14))
    U, s, V = jacobi_svd_oracle(A)
    assert U.shape == (6, 6) and V.shape == (14, 6)
    np.testing.assert_allclose(U @ (s[:, None] * V.T), A, atol=1e-12)


def test_rank_deficient_zero_columns():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((10, 4)) @ rng.standard_normal((4, 8))
    U, s, V = jacobi_svd_oracle(A)
    assert np.sum(s > 1e-10) == 4
    np.testing.assert_allclose(U @ (s[:, None] * V.T), A, atol=1e-12)
    # numerically zero singular values come with zeroed U columns
    np.testing.assert_allclose(U[:, 4:], 0.0, atol=1e-12)


def test_sweep_cap_raises():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((16, 16))
    with pytest.raises(NonConvergenceError):
        jacobi_svd_oracle(A, max_sweeps=1)


def test_desk_scale_guard():
    with pytest.raises(ValueError):
        jacobi_svd_oracle(np.zeros((600, 600)))
