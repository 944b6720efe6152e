import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from carmarkov import linalg
from carmarkov.errors import DimensionMismatch, NegativeEigenvalue, NonHermitianInput

from conftest import random_hermitian, random_psd


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.diag([1.0, -1.0]), [-1.0, 1.0]),
        (np.array([[0.0, 1.0], [1.0, 0.0]]), [-1.0, 1.0]),
        (np.array([[2.0]]), [2.0]),
    ],
)
def test_small_spectra(m, expected, backend):
    eig = linalg.hermitian_eig(m, backend)
    np.testing.assert_allclose(eig.eigenvalues, expected, atol=1e-14)


def test_hopping_density_spectrum(backend):
    # 1 + K on two modes, K = (a1* a2 - a1 a2*)/2 written out in the number basis
    k = np.zeros((4, 4), dtype=complex)
    k[1, 2] = k[2, 1] = 0.5
    eig = linalg.hermitian_eig(np.eye(4) + k, backend)
    np.testing.assert_allclose(eig.eigenvalues, [0.5, 1.0, 1.0, 1.5], atol=1e-14)


@pytest.mark.parametrize("dim", [1, 2, 3, 8, 17, 32, 64])
def test_matches_numpy_oracle(dim, backend, rng):
    m = random_hermitian(rng, dim)
    eig = linalg.hermitian_eig(m, backend)
    np.testing.assert_allclose(eig.eigenvalues, np.linalg.eigvalsh(m), atol=1e-11 * dim)
    u = eig.eigenvectors
    assert np.linalg.norm(u.conj().T @ u - np.eye(dim)) <= 1e-12 * dim
    assert np.linalg.norm(eig.reconstruct() - m) <= dim * 1e-12 * np.linalg.norm(m)


@pytest.mark.slow
def test_reconstruction_dim_256(rng):
    m = random_hermitian(rng, 256)
    eig = linalg.hermitian_eig(m)
    assert np.linalg.norm(eig.reconstruct() - m) <= 256 * 1e-12 * np.linalg.norm(m)


def test_backends_agree(rng):
    if len(linalg.BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    m = random_hermitian(rng, 24)
    w_c = linalg.eigvalsh(m, "compiled")
    w_p = linalg.eigvalsh(m, "python")
    np.testing.assert_allclose(w_c, w_p, atol=1e-12)


def test_degenerate_and_diagonal(backend):
    m = np.diag([3.0, 1.0, 1.0, 1.0, -2.0]).astype(complex)
    eig = linalg.hermitian_eig(m, backend)
    np.testing.assert_allclose(eig.eigenvalues, [-2, 1, 1, 1, 3], atol=1e-15)
    np.testing.assert_allclose(eig.reconstruct(), m, atol=1e-14)


def test_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        linalg.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        linalg.hermitian_eig(np.zeros((2, 3)))


def test_set_backend_roundtrip():
    before = linalg.get_backend()
    try:
        linalg.set_backend("python")
        assert linalg.get_backend() == "python"
        with pytest.raises(ValueError):
            linalg.set_backend("fortran")
    finally:
        linalg.set_backend(before)


def test_matrix_function_examples():
    np.testing.assert_allclose(linalg.matrix_function(np.eye(3), "log"), 0, atol=1e-15)
    np.testing.assert_allclose(linalg.matrix_function(np.diag([4.0, 9.0]), "sqrt"),
                               np.diag([2.0, 3.0]), atol=1e-14)
    np.testing.assert_allclose(linalg.matrix_function(np.diag([0.0, 4.0]), "inv_sqrt"),
                               np.diag([0.0, 0.5]), atol=1e-15)
    np.testing.assert_allclose(linalg.matrix_function(np.diag([0.0, 4.0]), "power", power=1.5),
                               np.diag([0.0, 8.0]), atol=1e-14)


def test_matrix_function_errors():
    with pytest.raises(NegativeEigenvalue):
        linalg.matrix_function(np.diag([1.0, -0.5]), "sqrt")
    with pytest.raises(ValueError):
        linalg.matrix_function(np.eye(2), "exp")
    with pytest.raises(ValueError):
        linalg.matrix_function(np.eye(2), "power")


@pytest.mark.parametrize("dim", [2, 8, 32, 64])
def test_exp_log_roundtrip(dim, rng):
    m = random_psd(rng, dim) / dim
    shifted = m + np.eye(dim)
    back = scipy.linalg.expm(linalg.matrix_function(shifted, "log"))
    assert np.abs(back - shifted).max() <= 1e-9


@pytest.mark.parametrize("dim, rank", [(4, 4), (8, 3), (16, 16), (32, 5)])
def test_sqrt_squares_back(dim, rank, rng):
    m = random_psd(rng, dim, rank)
    r = linalg.matrix_function(m, "sqrt")
    assert np.abs(r @ r - m).max() <= 1e-10 * max(1.0, np.abs(m).max())
    # inv_sqrt is the pseudo-inverse square root on the support
    s = linalg.support_projector(m)
    inv = linalg.matrix_function(m, "inv_sqrt")
    np.testing.assert_allclose(inv @ r, s, atol=1e-8)
    np.testing.assert_allclose(s @ s, s, atol=1e-10)


@pytest.mark.parametrize(
    "a, b, norm, expected",
    [
        (np.diag([1.0, 0.0]), np.zeros((2, 2)), "trace", 1.0),
        (np.diag([1.0, -1.0]), 0.0, "operator", 1.0),
        (np.diag([3.0, 4.0]), 0.0, "frobenius", 5.0),
        (np.eye(3), np.eye(3), "trace", 0.0),
    ],
)
def test_distance(a, b, norm, expected):
    assert linalg.distance(a, b, norm) == pytest.approx(expected, abs=1e-14)


def test_distance_errors():
    with pytest.raises(DimensionMismatch):
        linalg.distance(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        linalg.distance(np.eye(2), np.eye(2), "nuclear")


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_trace_equals_eigenvalue_sum(dim, seed):
    m = random_hermitian(np.random.default_rng(seed), dim)
    w = linalg.eigvalsh(m)
    assert abs(w.sum() - np.trace(m).real) <= 1e-10 * max(1.0, np.abs(m).max() * dim)
    assert np.all(np.diff(w) >= 0)


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_python_backend_reconstructs(dim, seed):
    m = random_hermitian(np.random.default_rng(seed), dim)
    eig = linalg.hermitian_eig(m, "python")
    assert np.linalg.norm(eig.reconstruct() - m) <= dim * 1e-12 * max(np.linalg.norm(m), 1.0)


def test_python_fallback_selected_without_extension(monkeypatch):
    import importlib
    import sys

    import carmarkov

    monkeypatch.setitem(sys.modules, "carmarkov._jacobi_ext", None)
    monkeypatch.delattr(carmarkov, "_jacobi_ext", raising=False)
    fresh = importlib.reload(linalg)
    try:
        assert fresh.get_backend() == "python"
        assert set(fresh.BACKENDS) == {"python"}
        np.testing.assert_allclose(fresh.eigvalsh(np.diag([2.0, 1.0])), [1.0, 2.0])
    finally:
        monkeypatch.undo()
        importlib.reload(linalg)
