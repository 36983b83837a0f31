import numpy as np
import pytest

# reference pair: rho1 separable, rho2 entangled
RHO1 = np.array([[1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 1]], dtype=complex) / 4
RHO2 = np.array([[0, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 0]], dtype=complex) / 2
RHO1_PT = np.array([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 1]], dtype=complex) / 4
RHO2_PT = np.array([[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]], dtype=complex) / 2


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_unitary2(rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_valid_canonical(rng: np.random.Generator, max_tries: int = 1000):
    """Rejection-sample canonical params whose assembled state is PSD.

    S is built from random rotations and singular values with a random sign
    of det S, so both entangled and separable states turn up.
    """
    from nested_simplex.two_qubit import CanonicalParams, assemble_canonical

    for _ in range(max_tries):
        sv = rng.uniform(0, 1, 3) * rng.uniform(0.3, 1.0)
        sign = rng.choice([-1.0, 1.0])
        S = random_rotation(rng) @ np.diag(sv * np.array([1, 1, sign])) @ random_rotation(rng).T
        d = rng.standard_normal(3)
        d *= rng.uniform(0, 1) ** 2 / np.linalg.norm(d)
        params = CanonicalParams(d=d, S=S)
        if assemble_canonical(params).valid:
            return params
    raise RuntimeError("no valid state found")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
