"""Dense real-matrix kernels: pseudo-inverses, complements, projectors, rotations.

Everything operates on plain ``numpy.ndarray`` values and is pure, so all
functions are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, InvalidDimension, InvalidMatrix, RankDeficient


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used across the package.

    Attributes
    ----------
    rank_tol_factor : float
        Multiplier on ``eps * max(rows, cols) * sigma_max``; singular values
        below the product are treated as zero.
    eig_tol : float
        Absolute tolerance for eigenvalue multiset matching and for deciding
        whether a zero sits on the unit circle or at z = 1.
    obs_margin : float
        Minimum acceptable PBH singular value for a pair to count as
        observable.
    """

    rank_tol_factor: float = 1.0
    eig_tol: float = 1e-6
    obs_margin: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("rank_tol_factor", "eig_tol", "obs_margin"):
            if getattr(self, name) <= 0:
                raise InvalidDimension(f"{name} must be strictly positive")

    def rank_threshold(self, m: np.ndarray) -> float:
        """Singular-value cutoff for ``m``."""
        if m.size == 0:
            return 0.0
        smax = float(np.linalg.norm(m, 2)) if min(m.shape) else 0.0
        return self.rank_tol_factor * np.finfo(float).eps * max(m.shape) * smax


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array, raising :class:`InvalidMatrix`."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise InvalidMatrix(f"{name} must be two-dimensional, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    return m


def pinv(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below the rank threshold are treated as zero; the
    remaining ones are reciprocated.  Reduces to the ordinary inverse for
    nonsingular square input.
    """
    m = as_matrix(m)
    if m.size == 0:
        return np.zeros((m.shape[1], m.shape[0]))
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    cut = tol.rank_tol_factor * np.finfo(float).eps * max(m.shape) * (s[0] if s.size else 0.0)
    inv = np.where(s > cut, np.divide(1.0, s, where=s > 0), 0.0)
    return (vt.T * inv) @ u.T


def numerical_rank(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above the rank threshold."""
    m = as_matrix(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    cut = tol.rank_tol_factor * np.finfo(float).eps * max(m.shape) * s[0]
    return int(np.count_nonzero(s > cut))


def orth_complement_rows(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of ``col(m)``.

    Returns ``h`` with ``rows(m) - cols(m)`` rows satisfying ``h @ m = 0`` and
    ``h @ h.T = I``.  The row space is unique; the basis is not.

    Raises
    ------
    RankDeficient
        If ``m`` does not have full column rank or has no extra rows.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows <= cols or numerical_rank(m, tol) < cols:
        raise RankDeficient(
            f"need full column rank and rows > cols, got shape {m.shape} "
            f"rank {numerical_rank(m, tol)}"
        )
    u, _, _ = np.linalg.svd(m, full_matrices=True)
    return u[:, cols:].T


def projector_rowspace(h: np.ndarray) -> np.ndarray:
    """Symmetric idempotent projector onto the row space of ``h``."""
    h = as_matrix(h)
    gram = h @ h.T
    if numerical_rank(gram) < h.shape[0]:
        raise RankDeficient(f"rows of h are dependent, shape {h.shape}")
    return h.T @ np.linalg.solve(gram, h)


def projector_colspace(c: np.ndarray) -> np.ndarray:
    """Symmetric idempotent projector onto the column space of ``c``."""
    c = as_matrix(c)
    gram = c.T @ c
    if numerical_rank(gram) < c.shape[1]:
        raise RankDeficient(f"columns of c are dependent, shape {c.shape}")
    return c @ np.linalg.solve(gram, c.T)


def eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a square matrix with algebraic multiplicity."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"eigenvalues need a square matrix, got {m.shape}")
    return np.linalg.eigvals(m)


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue magnitude."""
    return float(np.max(np.abs(eigenvalues(m)))) if m.size else 0.0


def random_rotation(dim: int, seed: int) -> np.ndarray:
    """Seeded random orthogonal matrix with determinant +1.

    QR-orthonormalization of a Gaussian sample with the sign of the R diagonal
    absorbed (Haar-uniform over the orthogonal group); a final column flip
    restricts to the rotation group.
    """
    if dim < 2:
        raise InvalidDimension(f"rotation needs dim >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, -1] = -q[:, -1]
    return q


def plane_rotation(dim: int, i: int, j: int, theta: float) -> np.ndarray:
    """Identity except for the 2-D rotation by ``theta`` in the (i, j) plane."""
    if dim < 2:
        raise InvalidDimension(f"rotation needs dim >= 2, got {dim}")
    if i == j or not (0 <= i < dim) or not (0 <= j < dim):
        raise InvalidDimension(f"plane indices ({i}, {j}) invalid for dim {dim}")
    r = np.eye(dim)
    c, s = np.cos(theta), np.sin(theta)
    r[i, i] = c
    r[j, j] = c
    r[i, j] = -s
    r[j, i] = s
    return r


def multiset_match(a, b, tol: float) -> bool:
    """True when two complex multisets pair up within ``tol`` (optimal matching)."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    if a.size != b.size:
        return False
    if a.size == 0:
        return True
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return bool(np.all(cost[rows, cols] <= tol))
