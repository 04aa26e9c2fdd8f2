"""State-space records, assumption checks, window stacking, transmission zeros.

A window of ``2M`` consecutive samples relates to the state at the window
start through the extended observability matrix and a block-Toeplitz
input-to-output map.  The left annihilator of the observability stack plays
the central role in splitting measured output windows into an algebraically
reconstructible part and a residual driven by the zero dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, HorizonTooShort, NonSquare
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    eigenvalues,
    numerical_rank,
    orth_complement_rows,
    pinv,
)

# Candidate zeros of magnitude beyond this are treated as being at infinity.
_ZERO_MAGNITUDE_CAP = 1e8
# Confirmation: at a genuine zero the pencil's smallest singular value is a
# tiny fraction of its value a short probe step away.
_ZERO_CONFIRM_RATIO = 1e-2
_ZERO_PROBE_STEP = 1e-4
_COMPRESSION_SEED = 0x5EED


@dataclass(frozen=True)
class LtiSystem:
    """Discrete-time LTI system x(k+1) = A x + B u, y = C x + D u."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", as_matrix(self.A, "A"))
        object.__setattr__(self, "B", as_matrix(self.B, "B"))
        object.__setattr__(self, "C", as_matrix(self.C, "C"))
        object.__setattr__(self, "D", as_matrix(self.D, "D"))
        n, m, l = self.A.shape[0], self.B.shape[1], self.C.shape[0]
        if self.A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.shape != (n, m):
            raise DimensionMismatch(f"B must be {n}x{m}, got {self.B.shape}")
        if self.C.shape != (l, n):
            raise DimensionMismatch(f"C must be {l}x{n}, got {self.C.shape}")
        if self.D.shape != (l, m):
            raise DimensionMismatch(f"D must be {l}x{m}, got {self.D.shape}")
        if n < 1 or m < 1 or l < 1:
            raise DimensionMismatch("state, input, and output counts must be >= 1")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def l(self) -> int:
        return self.C.shape[0]

    @property
    def square(self) -> bool:
        return self.l == self.m


@dataclass(frozen=True)
class FaultLtiSystem:
    """LTI system with an additive fault channel: x(k+1) = A x + B u + L f,
    y = C x + D u + E f."""

    base: LtiSystem
    L: np.ndarray
    E: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "L", as_matrix(self.L, "L"))
        object.__setattr__(self, "E", as_matrix(self.E, "E"))
        p = self.L.shape[1]
        if self.L.shape != (self.base.n, p):
            raise DimensionMismatch(f"L must be {self.base.n}x{p}, got {self.L.shape}")
        if self.E.shape != (self.base.l, p):
            raise DimensionMismatch(f"E must be {self.base.l}x{p}, got {self.E.shape}")
        if p < 1:
            raise DimensionMismatch("fault count must be >= 1")

    @property
    def A(self) -> np.ndarray:
        return self.base.A

    @property
    def B(self) -> np.ndarray:
        return self.base.B

    @property
    def C(self) -> np.ndarray:
        return self.base.C

    @property
    def D(self) -> np.ndarray:
        return self.base.D

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def l(self) -> int:
        return self.base.l

    @property
    def p(self) -> int:
        return self.L.shape[1]

    @property
    def square(self) -> bool:
        return self.l == self.p


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the standing assumptions check."""

    ok: bool
    observability_rank: int
    state_count: int
    channel_full_rank: bool
    output_count_ok: bool
    violations: tuple[str, ...]

    @property
    def observable(self) -> bool:
        return self.observability_rank == self.state_count


def observability_matrix(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Stack C, CA, ..., CA^(n-1)."""
    n = A.shape[0]
    blocks, cur = [], C
    for _ in range(n):
        blocks.append(cur)
        cur = cur @ A
    return np.vstack(blocks)


def validate(sys, tol: ToleranceConfig = DEFAULT_TOL) -> ValidationReport:
    """Check observability plus the full-rank channel assumption.

    For a plain system at least one of B, D must have full column rank and
    l >= m; for a fault system the same applies to L, E with l >= p.
    """
    violations: list[str] = []
    obs_rank = numerical_rank(observability_matrix(sys.A, sys.C), tol)
    if obs_rank < sys.n:
        violations.append(
            f"unobservable: observability rank {obs_rank} < state count {sys.n}"
        )
    if isinstance(sys, FaultLtiSystem):
        first, second, width, label = sys.L, sys.E, sys.p, "L/E"
        count_ok = sys.l >= sys.p
    else:
        first, second, width, label = sys.B, sys.D, sys.m, "B/D"
        count_ok = sys.l >= sys.m
    full = (
        numerical_rank(first, tol) == width or numerical_rank(second, tol) == width
    )
    if not full:
        violations.append(f"neither of {label} has full column rank {width}")
    if not count_ok:
        violations.append("need at least as many outputs as estimated channels")
    return ValidationReport(
        ok=not violations,
        observability_rank=obs_rank,
        state_count=sys.n,
        channel_full_rank=full,
        output_count_ok=count_ok,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class StackedOperators:
    """Block operators relating a state and an input window to an output window.

    Attributes
    ----------
    M : int
        Half the window length; the window holds ``2M`` samples.
    obs_mat : (2Ml, n) extended observability matrix (rows C A^j).
    io_toeplitz : (2Ml, 2Mm) block-lower-triangular Toeplitz input-to-output map.
    annihilator : (2Ml - n, 2Ml) orthonormal left annihilator of ``obs_mat``.
    input_selector : (m, 2Mm) picks the first input sample of a window.
    fault_toeplitz : optional (2Ml, 2Mp) fault-to-output Toeplitz map.
    fault_selector : optional (p, 2Mp) picks the first fault sample.
    """

    M: int
    obs_mat: np.ndarray
    io_toeplitz: np.ndarray
    annihilator: np.ndarray
    input_selector: np.ndarray
    fault_toeplitz: np.ndarray | None = None
    fault_selector: np.ndarray | None = None

    @property
    def window(self) -> int:
        return 2 * self.M

    @property
    def is_fault(self) -> bool:
        return self.fault_toeplitz is not None


def _toeplitz_stack(A, C, Bx, Dx, window: int) -> np.ndarray:
    n, width = A.shape[0], Bx.shape[1]
    l = C.shape[0]
    powers = [np.linalg.matrix_power(A, j) for j in range(window)]
    out = np.zeros((window * l, window * width))
    for i in range(window):
        for j in range(window):
            if i == j:
                out[i * l:(i + 1) * l, j * width:(j + 1) * width] = Dx
            elif j < i:
                out[i * l:(i + 1) * l, j * width:(j + 1) * width] = C @ powers[i - j - 1] @ Bx
    return out


def _selector(width: int, window: int) -> np.ndarray:
    return np.hstack([np.eye(width), np.zeros((width, (window - 1) * width))])


def build_stacked(
    sys: LtiSystem, M: int | None = None, tol: ToleranceConfig = DEFAULT_TOL
) -> StackedOperators:
    """Construct all window operators for a plain system.  Default M = n."""
    M = sys.n if M is None else int(M)
    if M < sys.n:
        raise HorizonTooShort(f"M={M} is below the state count {sys.n}")
    window = 2 * M
    obs = np.vstack(
        [sys.C @ np.linalg.matrix_power(sys.A, j) for j in range(window)]
    )
    return StackedOperators(
        M=M,
        obs_mat=obs,
        io_toeplitz=_toeplitz_stack(sys.A, sys.C, sys.B, sys.D, window),
        annihilator=orth_complement_rows(obs, tol),
        input_selector=_selector(sys.m, window),
    )


def build_fault_stacked(
    sysf: FaultLtiSystem, M: int | None = None, tol: ToleranceConfig = DEFAULT_TOL
) -> StackedOperators:
    """As :func:`build_stacked`, adding the fault-to-output Toeplitz map."""
    st = build_stacked(sysf.base, M, tol)
    window = st.window
    return StackedOperators(
        M=st.M,
        obs_mat=st.obs_mat,
        io_toeplitz=st.io_toeplitz,
        annihilator=st.annihilator,
        input_selector=st.input_selector,
        fault_toeplitz=_toeplitz_stack(sysf.A, sysf.C, sysf.L, sysf.E, window),
        fault_selector=_selector(sysf.p, window),
    )


class Classification(Enum):
    NO_ZEROS = "no-zeros"
    MINIMUM_PHASE = "minimum-phase"
    NON_MINIMUM_PHASE = "non-minimum-phase"
    UNIT_CIRCLE_ZEROS = "unit-circle-zeros"


@dataclass(frozen=True)
class ZeroReport:
    """Transmission zeros of a channel plus their unit-circle classification."""

    zeros: np.ndarray
    on_unit_circle: np.ndarray
    at_one: bool
    classification: Classification

    def __str__(self) -> str:
        zs = ", ".join(f"{z:.6g}" for z in np.sort_complex(self.zeros)) or "none"
        return f"zeros: [{zs}]  classification: {self.classification.value}"


def _pencil_min_sv(A, Bx, C, Dx, z: complex) -> float:
    n = A.shape[0]
    block = np.block([[z * np.eye(n) - A, Bx], [-C, Dx]])
    return float(np.linalg.svd(block, compute_uv=False)[-1])


def _pencil_zeros(A, Bx, C, Dx, tol: ToleranceConfig) -> np.ndarray:
    """Finite rank-drop points of the system pencil.

    Generalized eigenvalues of ([A, -Bx; C, -Dx], diag(I, 0)) give the
    candidates; non-square channels are first squared up by a seeded random
    left compression.  Each candidate is confirmed by a probe: the pencil's
    smallest singular value at a genuine zero is a vanishing fraction of its
    value one probe step away, which discards the spurious large-magnitude
    eigenvalues the QZ iteration produces for singular pencils.
    """
    n, width = A.shape[0], Bx.shape[1]
    l = C.shape[0]
    lhs = np.block([[A, -Bx], [C, -Dx]])
    rhs = np.block(
        [[np.eye(n), np.zeros((n, width))], [np.zeros((l, n)), np.zeros((l, width))]]
    )
    if l != width:
        rng = np.random.default_rng(_COMPRESSION_SEED)
        w = rng.standard_normal((n + width, n + l))
        lhs, rhs = w @ lhs, w @ rhs
    alpha, beta = scipy.linalg.eig(lhs, rhs, right=False, homogeneous_eigvals=True)
    confirmed: list[complex] = []
    for a, b in zip(alpha, beta):
        if abs(b) <= 1e-12 * max(abs(a), 1.0):
            continue
        z = a / b
        if abs(z) > _ZERO_MAGNITUDE_CAP:
            continue
        h = _ZERO_PROBE_STEP * max(1.0, abs(z))
        s0 = _pencil_min_sv(A, Bx, C, Dx, z)
        probe = max(
            _pencil_min_sv(A, Bx, C, Dx, z + h),
            _pencil_min_sv(A, Bx, C, Dx, z + 1j * h),
        )
        if s0 <= _ZERO_CONFIRM_RATIO * probe:
            confirmed.append(z)
    zs = np.array(confirmed, dtype=complex)
    # scrub rounding dust off real zeros so reports read cleanly
    real = np.abs(zs.imag) <= tol.eig_tol * np.maximum(1.0, np.abs(zs.real))
    zs[real] = zs[real].real
    return np.sort_complex(zs)


def _classify(zeros: np.ndarray, tol: ToleranceConfig) -> ZeroReport:
    if zeros.size == 0:
        return ZeroReport(zeros, zeros, False, Classification.NO_ZEROS)
    on_circle = zeros[np.abs(np.abs(zeros) - 1.0) <= tol.eig_tol]
    at_one = bool(np.any(np.abs(zeros - 1.0) <= tol.eig_tol))
    if on_circle.size:
        cls = Classification.UNIT_CIRCLE_ZEROS
    elif np.any(np.abs(zeros) > 1.0):
        cls = Classification.NON_MINIMUM_PHASE
    else:
        cls = Classification.MINIMUM_PHASE
    return ZeroReport(zeros, on_circle, at_one, cls)


def invariant_zeros(sys: LtiSystem, tol: ToleranceConfig = DEFAULT_TOL) -> ZeroReport:
    """Transmission zeros of the input-to-output channel."""
    return _classify(_pencil_zeros(sys.A, sys.B, sys.C, sys.D, tol), tol)


def fault_zeros(sysf: FaultLtiSystem, tol: ToleranceConfig = DEFAULT_TOL) -> ZeroReport:
    """Transmission zeros of the fault-to-output channel."""
    return _classify(_pencil_zeros(sysf.A, sysf.L, sysf.C, sysf.E, tol), tol)


def zero_dynamics_eigs(
    sys: LtiSystem, st: StackedOperators, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Eigenvalues of A - B S D2M^+ Cobs, S the first-input selector.

    For square observable systems this spectrum equals the invariant zeros
    padded with zeros at the origin, which makes it a standing cross-check on
    both the stacking and the zero computation.
    """
    if not sys.square:
        raise NonSquare(f"needs l == m, got l={sys.l} m={sys.m}")
    closed = sys.A - sys.B @ st.input_selector @ pinv(st.io_toeplitz, tol) @ st.obs_mat
    return eigenvalues(closed)


def hankel_stack_alt(
    sys: LtiSystem, M: int | None = None, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Alternative annihilator from the past/future window split.

    Returns ``[-Cm A^M Cm^+, I]`` where Cm stacks the first M observability
    blocks.  Its rows annihilate the full observability stack; for
    single-output square systems with M = n its row space coincides with the
    orthonormal annihilator's, otherwise it spans a strict subspace.
    """
    if not sys.square:
        raise NonSquare(f"needs l == m, got l={sys.l} m={sys.m}")
    M = sys.n if M is None else int(M)
    if M < sys.n:
        raise HorizonTooShort(f"M={M} is below the state count {sys.n}")
    cm = np.vstack([sys.C @ np.linalg.matrix_power(sys.A, j) for j in range(M)])
    am = np.linalg.matrix_power(sys.A, M)
    return np.hstack([-cm @ am @ pinv(cm, tol), np.eye(M * sys.l)])
