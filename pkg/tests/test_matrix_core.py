import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nested_simplex.errors import InvalidInputError
from nested_simplex.matrix_core import det4, eig_sym3, is_psd, qubit_state

from conftest import RHO1, RHO2_PT, random_rotation

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_eig_diagonal():
    es = eig_sym3(np.diag([1.0, 4.0, 0.0]))
    np.testing.assert_allclose(es.eigenvalues, [4, 1, 0])
    np.testing.assert_allclose(np.abs(es.eigenvectors), np.eye(3)[:, [1, 0, 2]], atol=1e-15)


def test_eig_identity():
    es = eig_sym3(np.eye(3))
    np.testing.assert_allclose(es.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(es.eigenvectors.T @ es.eigenvectors, np.eye(3), atol=1e-12)


def test_eig_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        eig_sym3(np.array([[np.nan, 0, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(InvalidInputError):
        eig_sym3(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=6, max_size=6))
def test_eig_matches_characteristic_polynomial(vals):
    a, b, c, d, e, f = vals
    m = np.array([[a, b, c], [b, d, e], [c, e, f]])
    es = eig_sym3(m)
    # independent route: roots of det(lambda I - m)
    coeffs = [
        1.0,
        -np.trace(m),
        0.5 * (np.trace(m) ** 2 - np.trace(m @ m)),
        -np.linalg.det(m),
    ]
    roots = np.sort(np.roots(coeffs).real)[::-1]
    scale = max(1.0, np.max(np.abs(m)))
    np.testing.assert_allclose(es.eigenvalues, roots, atol=1e-5 * scale)
    v = es.eigenvectors
    for i in range(3):
        lam = es.eigenvalues[i]
        assert np.linalg.norm(m @ v[:, i] - lam * v[:, i]) <= 1e-10 * max(1, abs(lam)) * scale
    np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-10)
    assert np.all(np.diff(es.eigenvalues) <= 0)


def test_eig_rotation_invariance(rng):
    for _ in range(100):
        a = rng.standard_normal((3, 3))
        m = a + a.T
        rot = random_rotation(rng)
        w1 = eig_sym3(m).eigenvalues
        w2 = eig_sym3(rot @ m @ rot.T).eigenvalues
        np.testing.assert_allclose(w1, w2, atol=1e-9)


def test_det4_examples():
    assert det4(np.eye(4) / 16) == pytest.approx(1 / 65536, abs=1e-20)
    assert det4(RHO2_PT) == pytest.approx(-1 / 16, abs=1e-15)
    m = np.arange(16, dtype=float).reshape(4, 4)
    m[3] = m[1]
    assert det4(m) == 0


def test_det4_matches_lu(rng):
    for _ in range(200):
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert abs(det4(m) - np.linalg.det(m)) <= 1e-10 * max(1, abs(np.linalg.det(m)))


def test_det4_multiplicative(rng):
    for _ in range(200):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) + 3 * np.eye(4)
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) + 3 * np.eye(4)
        lhs = det4(a @ b)
        rhs = det4(a) * det4(b)
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_det4_hermitian_is_real(rng):
    for _ in range(100):
        z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = z + z.conj().T
        assert abs(det4(h).imag) <= 1e-12 * max(1, abs(det4(h)))


def test_is_psd_examples():
    assert is_psd(np.diag([1.0, 0, 0, 0]))
    assert not is_psd(qubit_state([0, 0, 1.1]))
    assert is_psd(qubit_state([0, 0, 1.0]))
    assert is_psd(RHO1)


def test_is_psd_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        is_psd(np.array([[1, 1], [0, 1]], dtype=complex))


def test_is_psd_tolerance_is_caller_visible():
    m = np.diag([1.0, -1e-9, 0.5])
    assert not is_psd(m)
    assert is_psd(m, tol=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=6, max_size=6))
def test_is_psd_agrees_with_characteristic_polynomial(vals):
    a, b, c, d, e, f = vals
    m = np.array([[a, b, c], [b, d, e], [c, e, f]])
    coeffs = [1.0, -np.trace(m), 0.5 * (np.trace(m) ** 2 - np.trace(m @ m)), -np.linalg.det(m)]
    lam_min = np.min(np.roots(coeffs).real)
    # skip the band where the two routes can legitimately disagree
    if abs(lam_min) > 1e-6:
        assert is_psd(m) == (lam_min >= 0)
