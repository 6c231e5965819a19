import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyicap.spectral import (
    SpectralError,
    eigh,
    frobenius_norm_sq,
    matrix_power,
    min_eigenvalue,
    psd_power,
    trace_product,
)


def random_psd(rng, d, shift=1e-3):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return g @ g.conj().T + shift * np.eye(d)


def test_eigh_diagonal():
    dec = eigh(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(dec.eigenvalues, [1, 4])
    np.testing.assert_allclose(np.abs(dec.eigenvectors), np.eye(2))


def test_eigh_identity():
    np.testing.assert_allclose(eigh(np.eye(3)).eigenvalues, [1, 1, 1])


def test_eigh_rejects_non_square():
    with pytest.raises(ValueError):
        eigh(np.ones((2, 3)))


@pytest.mark.parametrize("seed", range(5))
def test_eigh_reconstructs(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    a = g + g.conj().T
    dec = eigh(a)
    assert np.allclose(dec.reconstruct(), a, atol=1e-12)
    u = dec.eigenvectors
    assert np.allclose(u.conj().T @ u, np.eye(5), atol=1e-12)
    assert np.all(np.diff(dec.eigenvalues) >= 0)


def test_matrix_power_diag():
    np.testing.assert_allclose(matrix_power(np.diag([1.0, 4.0]), 2), np.diag([1, 16]))


@given(st.floats(min_value=-3, max_value=6))
def test_matrix_power_scalar_identity(beta):
    out = matrix_power(0.5 * np.eye(2), beta)
    np.testing.assert_allclose(out, 0.5**beta * np.eye(2), rtol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_power_composition(seed):
    a = random_psd(np.random.default_rng(seed), 4)
    back = matrix_power(matrix_power(a, 0.5), 2.0)
    assert np.linalg.norm(back - a) <= 1e-10 * np.linalg.norm(a)


def test_fractional_power_of_singular_raises():
    with pytest.raises(SpectralError, match="eigenvalue"):
        matrix_power(np.diag([1.0, 0.0]), 0.5)


def test_integer_power_of_singular_ok():
    np.testing.assert_allclose(matrix_power(np.diag([2.0, 0.0]), 2), np.diag([4, 0]))


def test_psd_power_allows_zero_eigenvalues():
    np.testing.assert_allclose(psd_power(np.diag([4.0, 0.0]), 0.5), np.diag([2, 0]))


def test_psd_power_rejects_negative():
    with pytest.raises(SpectralError):
        psd_power(np.diag([1.0, -0.1]), 0.5)


def test_trace_product():
    assert trace_product(np.eye(2), np.eye(2)) == pytest.approx(2)
    assert trace_product(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])) == pytest.approx(11)


def test_frobenius():
    assert frobenius_norm_sq(np.eye(3)) == pytest.approx(3)
    assert frobenius_norm_sq(np.zeros((2, 2))) == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_frobenius_matches_trace_product(seed, d):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    a = g + g.conj().T
    assert frobenius_norm_sq(a) == pytest.approx(trace_product(a, a), rel=1e-12)
    assert min_eigenvalue(a) == pytest.approx(np.linalg.eigvalsh(a)[0], abs=1e-12)
