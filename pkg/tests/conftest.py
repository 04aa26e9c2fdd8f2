import numpy as np
import pytest

from invfilt import LtiSystem, invariant_zeros


def make_observable_square(seed: int, nmax: int = 4, max_zero: float = 8.0) -> LtiSystem:
    """Seeded random observable square system with bounded transmission zeros.

    Rejection sampling keeps the zero magnitudes moderate so eigenvalue
    comparisons at absolute tolerance stay meaningful.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, nmax + 1))
    m = int(rng.integers(1, 3))
    for _ in range(300):
        A = 0.6 * rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((m, n))
        D = rng.standard_normal((m, m))
        obs = np.vstack([C @ np.linalg.matrix_power(A, j) for j in range(n)])
        if np.linalg.matrix_rank(obs) < n:
            continue
        sys = LtiSystem(A=A, B=B, C=C, D=D)
        zs = invariant_zeros(sys).zeros
        if zs.size and np.abs(zs).max() > max_zero:
            continue
        return sys
    raise RuntimeError(f"no acceptable system for seed {seed}")


def make_zero_free_siso(seed: int, nmax: int = 3) -> LtiSystem:
    """Seeded random SISO system with constant numerator, hence no
    transmission zeros, hidden behind a random similarity transform."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, nmax + 1))
    den = np.poly(rng.uniform(-0.7, 0.7, size=n))
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = np.zeros((1, n))
    C[0, -1] = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    T = rng.standard_normal((n, n))
    while abs(np.linalg.det(T)) < 1e-2:
        T = rng.standard_normal((n, n))
    Ti = np.linalg.inv(T)
    return LtiSystem(A=T @ A @ Ti, B=T @ B, C=C @ Ti, D=np.zeros((1, 1)))


def make_observable_tall(seed: int, nmax: int = 4) -> LtiSystem:
    """Seeded random observable system with more outputs than inputs."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, nmax + 1))
    m = int(rng.integers(1, 3))
    l = m + int(rng.integers(1, 3))
    for _ in range(100):
        A = 0.6 * rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        C = rng.standard_normal((l, n))
        D = rng.standard_normal((l, m))
        obs = np.vstack([C @ np.linalg.matrix_power(A, j) for j in range(n)])
        if np.linalg.matrix_rank(obs) == n:
            return LtiSystem(A=A, B=B, C=C, D=D)
    raise RuntimeError(f"no acceptable system for seed {seed}")


@pytest.fixture
def rand_square():
    return make_observable_square


@pytest.fixture
def rand_zero_free():
    return make_zero_free_siso


@pytest.fixture
def rand_tall():
    return make_observable_tall
