"""Steering ellipsoids and Bob-to-Alice measurement steering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidStateError
from .matrix_core import IDENTITY2, PAULI, PSD_TOL, EigenSystem3, _eig_sym3, as_sym3, psd_sqrt
from .two_qubit import CanonicalParams, TwoQubitState, assemble_canonical

UNDEFINED_PROB = 1e-12
KRAUS_TOL = 1e-10
MEMBERSHIP_TOL = 1e-9
RANK_RTOL = 1e-12

# Samples are drawn in fixed-size blocks, each block from its own
# (seed, block index) stream, so any prefix of a run is reproducible and
# blocks can be generated independently.
SAMPLE_BLOCK = 1024
DEFAULT_WEAK_FRACTION = 0.3


@dataclass(frozen=True)
class Ellipsoid:
    """Ellipsoid {c + A u : |u| <= 1} with shape matrix q = A A^T.

    ``q`` may be rank deficient (ellipse, segment or point).
    """

    q: np.ndarray
    c: np.ndarray
    _eig: EigenSystem3 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = as_sym3(self.q, tol=1e-10)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if c.shape != (3,) or not np.isfinite(c).all():
            raise InvalidInputError("ellipsoid centre must be a finite length-3 vector")
        es = _eig_sym3(q)
        w = es.eigenvalues
        if w[-1] < -PSD_TOL * max(1.0, abs(w[0])):
            raise InvalidInputError("ellipsoid shape matrix is not PSD")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "_eig", es)

    @classmethod
    def sphere(cls, r: float, c=(0.0, 0.0, 0.0)) -> "Ellipsoid":
        return cls(q=r * r * np.eye(3), c=c)

    @classmethod
    def from_semiaxes(cls, semiaxes, axes=None, c=(0.0, 0.0, 0.0)) -> "Ellipsoid":
        """Ellipsoid with given semiaxis lengths along the columns of ``axes``."""
        s = np.asarray(semiaxes, dtype=float)
        v = np.eye(3) if axes is None else np.asarray(axes, dtype=float)
        return cls(q=(v * s**2) @ v.T, c=c)

    def eig(self) -> EigenSystem3:
        return self._eig

    @property
    def semiaxes(self) -> np.ndarray:
        return np.sqrt(np.clip(self.eig().eigenvalues, 0.0, None))

    @property
    def axes(self) -> np.ndarray:
        return self.eig().eigenvectors

    @property
    def rank(self) -> int:
        w = self.eig().eigenvalues
        top = w[0]
        if top <= 0.0:
            return 0
        return int(np.sum(w > RANK_RTOL * top))

    @property
    def degenerate(self) -> bool:
        return self.rank <= 2

    def sqrt_shape(self) -> np.ndarray:
        """Symmetric square root A of q, so the ellipsoid is {c + A u}."""
        return psd_sqrt(self.q).real

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        """Membership test that copes with degenerate q.

        The offset x - c is split into its part in range(q), which must satisfy
        the quadratic form with the pseudo-inverse, and its part in the null
        space, which must vanish.
        """
        return bool(np.all(self.membership(np.atleast_2d(x), tol)))

    def membership(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        es = self.eig()
        w, v = es.eigenvalues, es.eigenvectors
        top = max(w[0], 0.0)
        live = w > RANK_RTOL * top if top > 0 else np.zeros(3, dtype=bool)
        y = (np.asarray(points, dtype=float) - self.c) @ v
        form = np.sum(y[:, live] ** 2 / w[live], axis=1)
        off = np.linalg.norm(y[:, ~live], axis=1)
        return (form <= 1.0 + tol) & (off <= tol)


@dataclass(frozen=True)
class Measurement:
    """One POVM effect E and a Kraus operator M with M^dagger M = E."""

    effect: np.ndarray
    kraus: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.effect, dtype=complex)
        m = np.asarray(self.kraus, dtype=complex)
        if e.shape != (2, 2) or m.shape != (2, 2):
            raise InvalidInputError("effect and kraus must be 2x2")
        if np.max(np.abs(m.conj().T @ m - e)) > KRAUS_TOL:
            raise InvalidInputError("kraus operator does not reproduce the effect")
        w = np.linalg.eigvalsh(0.5 * (e + e.conj().T))
        if w[0] < -1e-12 or w[-1] > 1 + 1e-12:
            raise InvalidInputError("effect eigenvalues must lie in [0, 1]")
        object.__setattr__(self, "effect", e)
        object.__setattr__(self, "kraus", m)

    @classmethod
    def from_effect(cls, effect) -> "Measurement":
        return cls(effect=effect, kraus=psd_sqrt(effect))

    @classmethod
    def bloch_effect(cls, a: float, b: float, n) -> "Measurement":
        """Effect a*1 + b*(n.sigma) for a unit vector n."""
        n = np.asarray(n, dtype=float)
        e = a * IDENTITY2 + b * (n[0] * PAULI[1] + n[1] * PAULI[2] + n[2] * PAULI[3])
        return cls.from_effect(e)

    @classmethod
    def projector(cls, n) -> "Measurement":
        return cls.bloch_effect(0.5, 0.5, n)

    def complement(self) -> "Measurement":
        return Measurement.from_effect(IDENTITY2 - self.effect)


@dataclass(frozen=True)
class SteeredOutcome:
    alice_bloch: np.ndarray
    probability: float
    defined: bool = True


def ellipsoid_from_params(params: CanonicalParams) -> Ellipsoid:
    S = params.S
    return Ellipsoid(q=S @ S.T, c=params.d)


def _collapse(rho: np.ndarray, kraus: np.ndarray):
    """Apply (1 x M) rho (1 x M^dag) for a stack of Kraus operators.

    Returns Alice's unnormalised reduced matrices and the probabilities.
    """
    r = rho.reshape(2, 2, 2, 2)  # indices a, b, a', b'
    # (1 x M) rho (1 x M^dag), then trace out b
    post = np.einsum("nbc,acde,nfe->nabdf", kraus, r, kraus.conj())
    alice = np.einsum("nabdb->nad", post)
    prob = np.einsum("naa->n", alice).real
    return alice, prob


def _bloch_of(alice: np.ndarray, prob: np.ndarray) -> np.ndarray:
    # r_k = tr(rho_A sigma_k) / p
    raw = np.stack([np.einsum("nij,ji->n", alice, PAULI[k]).real for k in (1, 2, 3)], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return raw / prob[:, None]


def steer(state: TwoQubitState, m: Measurement) -> SteeredOutcome:
    if not state.valid:
        raise InvalidStateError("not a quantum state")
    alice, prob = _collapse(state.rho, m.kraus[None])
    p = float(prob[0])
    if p < UNDEFINED_PROB:
        return SteeredOutcome(alice_bloch=np.full(3, np.nan), probability=max(p, 0.0), defined=False)
    return SteeredOutcome(alice_bloch=_bloch_of(alice, prob)[0], probability=p)


def _draw_block(seed: int, block: int, weak_fraction: float):
    rng = np.random.default_rng([seed, block])
    n = rng.standard_normal((SAMPLE_BLOCK, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    weak = rng.random(SAMPLE_BLOCK) < weak_fraction
    # weak effects a*1 + b*n.sigma with 0 < b < a, a + b <= 1
    a = rng.uniform(0.05, 1.0, SAMPLE_BLOCK)
    ratio = rng.uniform(0.05, 0.95, SAMPLE_BLOCK)
    b = np.minimum(a, 1.0 - a) * ratio
    a = np.where(weak, a, 0.5)
    b = np.where(weak, b, 0.5)
    return n, a, b, weak


def measurement_batch(n: int, seed: int, weak_fraction: float = DEFAULT_WEAK_FRACTION):
    """Directions, (a, b) effect weights and weak flags for the first ``n`` samples."""
    if n < 0:
        raise InvalidInputError("sample count must be non-negative")
    nblocks = -(-n // SAMPLE_BLOCK)
    parts = [_draw_block(seed, k, weak_fraction) for k in range(nblocks)]
    if not parts:
        return np.zeros((0, 3)), np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool)
    dirs, a, b, weak = (np.concatenate(x)[:n] for x in zip(*parts))
    return dirs, a, b, weak


def _kraus_stack(dirs: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # sqrt(a + b n.sigma) = alpha*1 + beta*n.sigma with alpha/beta from the eigenvalues a +- b
    lp = np.sqrt(np.clip(a + b, 0.0, None))
    lm = np.sqrt(np.clip(a - b, 0.0, None))
    alpha = 0.5 * (lp + lm)
    beta = 0.5 * (lp - lm)
    nsig = np.einsum("nk,kij->nij", dirs, np.stack(PAULI[1:]))
    return alpha[:, None, None] * IDENTITY2 + beta[:, None, None] * nsig


def sample_steered(
    params: CanonicalParams,
    n: int,
    seed: int,
    weak_fraction: float = DEFAULT_WEAK_FRACTION,
    psd_tol: float = PSD_TOL,
) -> list[SteeredOutcome]:
    """Steer Alice with ``n`` random effects of Bob's.

    Rank-1 projectors (1 + n.sigma)/2 with n uniform on the sphere, mixed with
    a ``weak_fraction`` share of unsharp effects a*1 + b*n.sigma. Each outcome
    goes through the full 4x4 collapse.
    """
    state = assemble_canonical(params, psd_tol=psd_tol)
    if not state.valid:
        raise InvalidStateError("not a quantum state")
    dirs, a, b, _ = measurement_batch(n, seed, weak_fraction)
    if n == 0:
        return []
    alice, prob = _collapse(state.rho, _kraus_stack(dirs, a, b))
    bloch = _bloch_of(alice, prob)
    out = []
    for i in range(n):
        p = float(prob[i])
        if p < UNDEFINED_PROB:
            out.append(SteeredOutcome(np.full(3, np.nan), max(p, 0.0), defined=False))
        else:
            out.append(SteeredOutcome(bloch[i], p))
    return out
