"""Small fixed-size dense linear algebra.

Everything here works on plain numpy arrays of shape (2, 2), (3, 3) or (4, 4).
The helpers validate shape and finiteness up front so that the rest of the
package can assume well-formed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-10
PSD_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class EigenSystem3:
    """Eigenpairs of a real symmetric 3x3 matrix.

    ``eigenvalues`` are sorted descending and ``eigenvectors[:, i]`` belongs
    to ``eigenvalues[i]``; the eigenvector matrix is orthogonal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check(m, shape: tuple[int, int], dtype=float) -> np.ndarray:
    a = np.asarray(m, dtype=dtype)
    if a.shape != shape:
        raise InvalidInputError(f"expected shape {shape}, got {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInputError("matrix has non-finite entries")
    return a


def as_complex4(m) -> np.ndarray:
    return _check(m, (4, 4), complex)


def as_sym3(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a real 3x3 matrix as symmetric and return its exact symmetrization."""
    a = _check(m, (3, 3), float)
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > tol * scale:
        raise InvalidInputError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def eig_sym3(m) -> EigenSystem3:
    """Eigendecomposition of a real symmetric 3x3 matrix, eigenvalues descending."""
    return _eig_sym3(as_sym3(m))


def _eig_sym3(a: np.ndarray) -> EigenSystem3:
    w, v = np.linalg.eigh(a)
    # eigh sorts ascending
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    # make the basis right-handed so it is a proper rotation
    (a0, a1, a2), (b0, b1, b2), (c0, c1, c2) = v.T.tolist()
    if (a1 * b2 - a2 * b1) * c0 + (a2 * b0 - a0 * b2) * c1 + (a0 * b1 - a1 * b0) * c2 < 0:
        v[:, 2] = -v[:, 2]
    return EigenSystem3(eigenvalues=w, eigenvectors=v)


def _det2(a, b, c, d):
    return a * d - b * c


def det4(m) -> complex:
    """Determinant of a 4x4 matrix by Laplace expansion over 2x2 minors.

    Pairs every 2x2 minor of the top two rows with its complementary minor
    of the bottom two rows. For integer-valued or dyadic input this is exact.
    """
    a = as_complex4(m)
    top, bot = a[:2], a[2:]
    total = 0j
    # column pairs (j, k) and their complements, with the Laplace sign
    pairs = (
        ((0, 1), (2, 3), 1),
        ((0, 2), (1, 3), -1),
        ((0, 3), (1, 2), 1),
        ((1, 2), (0, 3), 1),
        ((1, 3), (0, 2), -1),
        ((2, 3), (0, 1), 1),
    )
    for (j, k), (p, q), sign in pairs:
        upper = _det2(top[0, j], top[0, k], top[1, j], top[1, k])
        lower = _det2(bot[0, p], bot[0, q], bot[1, p], bot[1, q])
        total += sign * upper * lower
    return complex(total)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def min_eigenvalue(m, herm_tol: float = HERMITIAN_TOL) -> float:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 3, 4):
        raise InvalidInputError(f"unsupported matrix shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    if not is_hermitian(a, herm_tol):
        raise InvalidInputError("matrix is not Hermitian within tolerance")
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0])


def is_psd(m, tol: float = PSD_TOL, herm_tol: float = HERMITIAN_TOL) -> bool:
    """True iff the smallest eigenvalue of the Hermitian matrix ``m`` is >= -tol."""
    return min_eigenvalue(m, herm_tol) >= -tol


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix (negative noise clipped)."""
    a = np.asarray(m)
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def qubit_state(bloch) -> np.ndarray:
    """Single-qubit density matrix (1 + r.sigma)/2 for Bloch vector ``r``."""
    r = np.asarray(bloch, dtype=float)
    return 0.5 * (IDENTITY2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)
