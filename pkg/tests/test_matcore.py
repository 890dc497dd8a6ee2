import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr.fixtures import R_BELL
from qcorr.matcore import (
    PAULI,
    HermitianityError,
    herm_eig,
    herm_eigvals,
    kron,
    partial_transpose,
    psd_sqrt,
    svd_singular_values,
)
from qcorr.states import SINGLET, projector, random_density


def _random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_eigvals_match_lapack(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        m = _random_hermitian(rng, n)
        np.testing.assert_allclose(herm_eigvals(m), np.linalg.eigvalsh(m), atol=1e-10)


def test_eig_reconstructs_matrix():
    rng = np.random.default_rng(7)
    for _ in range(100):
        m = _random_hermitian(rng, 4)
        w, v = herm_eig(m)
        assert np.all(np.diff(w) >= 0)
        np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, m, atol=1e-10)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-10)


def test_real_symmetric_input_gives_real_vectors():
    w, v = herm_eig(np.array(R_BELL))
    assert not np.iscomplexobj(v)
    np.testing.assert_allclose(w, [0.89179604, 0.94465232, 1.04155163], atol=1e-8)


def test_min_eigenvalue_of_published_singlet_matrix():
    # the eigenvalue printed next to this matrix elsewhere (0.8955) does not survive recomputation
    assert herm_eigvals(R_BELL)[0] == pytest.approx(0.891796, abs=1e-6)


def test_degenerate_spectrum():
    np.testing.assert_allclose(herm_eigvals(np.eye(3) * 0.25), [0.25] * 3, atol=1e-14)
    w, v = herm_eig(np.eye(4))
    np.testing.assert_allclose(v, np.eye(4))


def test_zero_matrix():
    np.testing.assert_array_equal(herm_eigvals(np.zeros((3, 3))), np.zeros(3))


def test_rejects_non_hermitian():
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(HermitianityError) as info:
        herm_eigvals(m)
    assert info.value.deviation == pytest.approx(2.0)


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        herm_eigvals(np.eye(5))
    with pytest.raises(ValueError):
        herm_eigvals(np.ones((2, 3)))
    with pytest.raises(ValueError):
        herm_eigvals(np.array([[np.nan]]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_singular_values_match_numpy(vals):
    t = np.array(vals).reshape(3, 3)
    np.testing.assert_allclose(svd_singular_values(t), np.linalg.svd(t, compute_uv=False), atol=1e-7)


def test_singular_values_descending_and_nonnegative():
    s = svd_singular_values(np.diag([0.2, -3.0, 1.0]))
    np.testing.assert_allclose(s, [3.0, 1.0, 0.2], atol=1e-12)


def test_kron_multiple_factors():
    x, y, z = PAULI
    np.testing.assert_array_equal(kron(x, y, z), np.kron(np.kron(x, y), z))


def test_partial_transpose_of_singlet():
    pt = partial_transpose(projector(SINGLET))
    np.testing.assert_allclose(np.linalg.eigvalsh(pt), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)
    # transposing both parties is the full transpose
    rho = random_density(3)
    both = partial_transpose(partial_transpose(rho, "second"), "first")
    np.testing.assert_allclose(both, rho.T, atol=1e-15)


def test_partial_transpose_rejects_unknown_subsystem():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4), "third")


def test_psd_sqrt_squares_back():
    rho = random_density(11)
    r = psd_sqrt(rho)
    np.testing.assert_allclose(r @ r, rho, atol=1e-10)
