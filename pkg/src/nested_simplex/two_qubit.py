"""Canonical two-qubit states, partial transpose and the determinant separability test.

A canonical state has Bob's reduced state maximally mixed::

    rho = 1/4 (1x1 + d.sigma x 1 + sum_ij S_ij sigma_i x sigma_j)

with Alice's Bloch vector ``d`` and correlation matrix ``S``. Qubit A is the
first tensor factor throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidStateError
from .matrix_core import PAULI, PSD_TOL, as_complex4, det4, is_hermitian, is_psd

log = logging.getLogger(__name__)

TRACE_TOL = 1e-12
NONCANONICAL_TOL = 1e-10
IMAG_WARN_TOL = 1e-12
IMAG_ERROR_TOL = 1e-10

# PAULI_PRODUCTS[i, j] = sigma_i (x) sigma_j, sigma_0 = identity
PAULI_PRODUCTS = np.array([[np.kron(a, b) for b in PAULI] for a in PAULI])


@dataclass(frozen=True)
class CanonicalParams:
    """Alice's Bloch vector ``d`` and the 3x3 correlation matrix ``S``."""

    d: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).reshape(-1)
        S = np.asarray(self.S, dtype=float)
        if d.shape != (3,) or S.shape != (3, 3):
            raise InvalidInputError("canonical params need d of length 3 and S of shape 3x3")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(S))):
            raise InvalidInputError("canonical params must be finite")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "S", S)


@dataclass(frozen=True)
class TwoQubitState:
    """A Hermitian unit-trace 4x4 matrix; ``valid`` records whether it is PSD."""

    rho: np.ndarray
    valid: bool = field(default=None)  # type: ignore[assignment]
    psd_tol: float = PSD_TOL

    def __post_init__(self):
        rho = as_complex4(self.rho)
        if not is_hermitian(rho, 1e-12):
            raise InvalidInputError("rho is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidInputError(f"rho has trace {tr!r}, expected 1")
        object.__setattr__(self, "rho", rho)
        if self.valid is None:
            object.__setattr__(self, "valid", is_psd(rho, self.psd_tol))


@dataclass(frozen=True)
class PauliDecomposition:
    params: CanonicalParams
    bob_bloch: np.ndarray
    coefficients: np.ndarray  # c_ij = tr(rho sigma_i x sigma_j), i, j in 0..3
    canonical: bool


@dataclass(frozen=True)
class SeparabilityVerdict:
    det_pt: float
    separable: bool
    tol: float


def assemble_canonical(params: CanonicalParams, psd_tol: float = PSD_TOL) -> TwoQubitState:
    coeffs = np.zeros((4, 4))
    coeffs[0, 0] = 1.0
    coeffs[1:, 0] = params.d
    coeffs[1:, 1:] = params.S
    rho = np.einsum("ij,ijkl->kl", coeffs, PAULI_PRODUCTS) / 4
    # exact Hermitian symmetrization, the einsum is Hermitian up to rounding only
    rho = 0.5 * (rho + rho.conj().T)
    return TwoQubitState(rho, psd_tol=psd_tol)


def pauli_decompose(state: TwoQubitState) -> PauliDecomposition:
    coeffs = np.einsum("kl,ijlk->ij", state.rho, PAULI_PRODUCTS).real
    bob = coeffs[0, 1:].copy()
    canonical = bool(np.linalg.norm(bob) <= NONCANONICAL_TOL)
    params = CanonicalParams(d=coeffs[1:, 0].copy(), S=coeffs[1:, 1:].copy())
    return PauliDecomposition(params=params, bob_bloch=bob, coefficients=coeffs, canonical=canonical)


def partial_transpose_matrix(rho) -> np.ndarray:
    """Transpose each 2x2 block of a 4x4 matrix: [[A, B], [C, D]] -> [[A^T, B^T], [C^T, D^T]]."""
    a = np.asarray(rho)
    return a.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4).copy()


def partial_transpose(state: TwoQubitState) -> TwoQubitState:
    pt = partial_transpose_matrix(state.rho)
    return TwoQubitState(pt, psd_tol=state.psd_tol)


def separability(state: TwoQubitState, tol: float = PSD_TOL) -> SeparabilityVerdict:
    """Separable iff det of the partial transpose is >= -tol.

    Raises InvalidStateError when ``state`` is not PSD within ``tol``.
    """
    if not is_psd(state.rho, tol):
        raise InvalidStateError("not a quantum state: rho has a negative eigenvalue")
    det = det4(partial_transpose_matrix(state.rho))
    if abs(det.imag) > IMAG_ERROR_TOL:
        raise InvalidInputError(f"det of partial transpose has imaginary part {det.imag:.3g}")
    if abs(det.imag) > IMAG_WARN_TOL:
        log.warning("discarding imaginary residue %.3g of det(rho^Gamma)", det.imag)
    det_pt = float(det.real)
    return SeparabilityVerdict(det_pt=det_pt, separable=det_pt >= -tol, tol=tol)


def local_unitary(state: TwoQubitState, u, v) -> TwoQubitState:
    """Conjugate ``state`` by the product unitary u (x) v."""
    w = np.kron(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex))
    rho = w @ state.rho @ w.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return TwoQubitState(rho, psd_tol=state.psd_tol)
