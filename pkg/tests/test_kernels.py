import numpy as np
import pytest

from psdsample.kernels import gaussian_kernel, kernel_matrix, project_psd


def test_kernel_at_identical_points_is_one():
    eta = np.array([0.7, 1.3])
    x = np.array([0.4, -2.1])
    assert gaussian_kernel(eta, x, x) == 1.0


def test_kernel_unit_example():
    # exp(-(1)(x-y)^2) with x-y offsets (1, 2) -> e^{-5}
    eta = np.array([1.0, 1.0])
    x = np.array([1.0, 2.0])
    y = np.array([0.0, 0.0])
    assert np.isclose(gaussian_kernel(eta, x, y), np.exp(-5.0), rtol=1e-15)


def test_kernel_anisotropic_weighting():
    eta = np.array([2.0, 0.5])
    x = np.array([1.0, 1.0])
    y = np.array([0.0, 0.0])
    assert np.isclose(gaussian_kernel(eta, x, y), np.exp(-2.5), rtol=1e-15)


def test_kernel_batch_matches_scalar_loop():
    rng = np.random.default_rng(0)
    eta = np.array([0.3, 1.7, 0.9])
    X = rng.normal(size=(11, 3))
    y = rng.normal(size=3)
    batch = gaussian_kernel(eta, X, y)
    scalar = np.array([gaussian_kernel(eta, row, y) for row in X])
    assert np.allclose(batch, scalar, rtol=1e-15)


def test_kernel_matrix_matches_elementwise_calls():
    rng = np.random.default_rng(1)
    eta = np.array([0.6, 1.1])
    X = rng.normal(size=(3, 2))
    Y = rng.normal(size=(4, 2))
    K = kernel_matrix(eta, X, Y)
    for i in range(3):
        for j in range(4):
            assert np.isclose(K[i, j], gaussian_kernel(eta, X[i], Y[j]), rtol=1e-12)


def test_kernel_matrix_single_center_is_one():
    K = kernel_matrix(np.array([1.0]), np.array([[0.3]]))
    assert K.shape == (1, 1) and K[0, 0] == 1.0


def test_kernel_matrix_symmetric_with_unit_diagonal():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(6, 2))
    K = kernel_matrix(np.array([0.8, 1.4]), X)
    assert np.array_equal(K, K.T)
    assert np.allclose(np.diag(K), 1.0)


def test_kernel_rejects_nonpositive_precision():
    with pytest.raises(ValueError):
        gaussian_kernel(np.array([0.0]), np.array([0.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        kernel_matrix(np.array([-1.0]), np.array([[0.0]]))


def test_project_psd_is_identity_on_psd_input():
    rng = np.random.default_rng(3)
    B = rng.normal(size=(5, 5))
    A = B @ B.T
    P = project_psd(A)
    assert np.allclose(P, A, rtol=1e-12, atol=1e-12)


def test_project_psd_clips_negative_eigenvalues():
    A = np.diag([2.0, -3.0, 0.5])
    P = project_psd(A)
    assert np.allclose(P, np.diag([2.0, 0.0, 0.5]), atol=1e-12)
    assert np.linalg.eigvalsh(P).min() >= -1e-12


def test_project_psd_rejects_asymmetric_input():
    with pytest.raises(ValueError):
        project_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))
