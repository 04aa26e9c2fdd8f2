"""Filter synthesis: auxiliary gain, residual dynamics, rotation screening,
output-injection pole placement, and assembly of the full filter record.

The estimator reconstructs the unknown channel from two projections of the
output window: the component in the annihilator row space comes algebraically
from the auxiliary gain, while the component in the observability column
space is produced by a residual recursion whose open-loop poles sit at the
channel's transmission zeros.  Rotating the two subspaces and injecting the
annihilator projection of the residual makes that recursion stabilizable by
pole placement whenever no transmission zero sits exactly at z = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.signal

from .errors import (
    AssumptionViolated,
    BadPoleSet,
    DesignError,
    MinPhaseScope,
    NonOrthogonal,
    RetriesExhausted,
    Unobservable,
    ZeroAtOne,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    eigenvalues,
    multiset_match,
    pinv,
    plane_rotation,
    projector_colspace,
    projector_rowspace,
    random_rotation,
    spectral_radius,
)
from .sysmodel import (
    Classification,
    FaultLtiSystem,
    LtiSystem,
    StackedOperators,
    build_fault_stacked,
    build_stacked,
    fault_zeros,
    invariant_zeros,
    validate,
)


class FilterKind(Enum):
    MIN_PHASE = "min-phase"
    STEP = "step"
    RAMP = "ramp"
    FAULT_STEP = "fault-step"
    FAULT_RAMP = "fault-ramp"

    @property
    def is_fault(self) -> bool:
        return self in (FilterKind.FAULT_STEP, FilterKind.FAULT_RAMP)

    @property
    def is_ramp(self) -> bool:
        return self in (FilterKind.RAMP, FilterKind.FAULT_RAMP)


@dataclass(frozen=True)
class PlaneAngle:
    """Rotate the (i, j) coordinate plane by ``theta`` radians."""

    i: int
    j: int
    theta: float
    obs_margin: float = 1e-6


@dataclass(frozen=True)
class RandomSeeded:
    """Draw seeded random rotations until one passes the observability screen."""

    seed: int
    retry_budget: int = 50
    obs_margin: float = 1e-6

    def __post_init__(self) -> None:
        if self.retry_budget < 1:
            raise DesignError("retry_budget must be >= 1")


RotationStrategy = PlaneAngle | RandomSeeded


@dataclass(frozen=True)
class ObservabilityReport:
    """PBH screen result: smallest stacked singular value over the spectrum."""

    margin: float
    observable: bool
    worst_eigenvalue: complex


@dataclass(frozen=True)
class FilterDesign:
    """Everything the runtime needs to execute one estimator.

    ``closed_loop`` drives the residual recursion (or the state-error
    recursion for the direct minimum-phase inverse); ``drive_map`` multiplies
    the composite drive vector of implied states and auxiliary inputs.
    """

    kind: FilterKind
    M: int
    stacked: StackedOperators
    aux_gain: np.ndarray
    rotation: np.ndarray | None
    proj_ann: np.ndarray
    proj_obs: np.ndarray
    proj_ann_rot: np.ndarray | None
    proj_obs_rot: np.ndarray | None
    residual_dynamics: np.ndarray
    drive_map: np.ndarray
    injection_gain: np.ndarray | None
    placed_poles: np.ndarray
    closed_loop: np.ndarray

    @property
    def window(self) -> int:
        return 2 * self.M

    @property
    def estimate_delay(self) -> int:
        """Samples between a signal value and the push that emits its estimate."""
        return self.window + (1 if self.kind.is_ramp else 0)


def compute_K1(st: StackedOperators, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Auxiliary gain mapping an output window to the window's least-squares
    input (fault stacks: fault) in the annihilator row space."""
    toeplitz = st.fault_toeplitz if st.is_fault else st.io_toeplitz
    return pinv(st.annihilator @ toeplitz, tol) @ st.annihilator


def compute_atilde(
    sys: LtiSystem | FaultLtiSystem,
    st: StackedOperators,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> np.ndarray:
    """Residual dynamics matrix on the observability column space."""
    if isinstance(sys, FaultLtiSystem):
        inner = sys.A - sys.L @ st.fault_selector @ pinv(st.fault_toeplitz, tol) @ st.obs_mat
    else:
        inner = sys.A - sys.B @ st.input_selector @ pinv(st.io_toeplitz, tol) @ st.obs_mat
    return st.obs_mat @ inner @ pinv(st.obs_mat, tol)


def compute_bf(sys: LtiSystem | FaultLtiSystem, M: int) -> np.ndarray:
    """Input map applied to the composite drive vector.

    Plain systems: ``[I, -A, -B S]``; fault systems additionally carry the
    known-input block: ``[I, -A, -L Sf, -B S]`` (S picks the first window
    sample of the respective channel).
    """
    n, window = sys.n, 2 * M
    sel_in = np.hstack([np.eye(sys.m), np.zeros((sys.m, (window - 1) * sys.m))])
    blocks = [np.eye(n), -sys.A]
    if isinstance(sys, FaultLtiSystem):
        sel_f = np.hstack([np.eye(sys.p), np.zeros((sys.p, (window - 1) * sys.p))])
        blocks.append(-sys.L @ sel_f)
    blocks.append(-sys.B @ sel_in)
    return np.hstack(blocks)


def rotated_projectors(
    st: StackedOperators, R: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the rotated annihilator row space and observability
    column space; the two always sum to the identity."""
    R = as_matrix(R, "R")
    dim = st.obs_mat.shape[0]
    if R.shape != (dim, dim) or np.abs(R @ R.T - np.eye(dim)).max() > 1e-8:
        raise NonOrthogonal(f"R must be {dim}x{dim} orthogonal")
    proj_ann = projector_rowspace(st.annihilator)
    proj_obs = projector_colspace(st.obs_mat)
    return R @ proj_ann @ R.T, R @ proj_obs @ R.T


def check_pair_observability(
    Aop: np.ndarray, Cop: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL
) -> ObservabilityReport:
    """PBH test: smallest singular value of [Aop - lam I; Cop] over eigenvalues."""
    Aop = as_matrix(Aop, "Aop")
    Cop = as_matrix(Cop, "Cop")
    dim = Aop.shape[0]
    margin, worst = math.inf, complex(0)
    for lam in eigenvalues(Aop):
        stackv = np.vstack([Aop - lam * np.eye(dim), Cop])
        s = np.linalg.svd(stackv, compute_uv=False)[-1]
        if s < margin:
            margin, worst = float(s), complex(lam)
    return ObservabilityReport(margin, margin > tol.obs_margin, worst)


def _pair_matrix(kind: FilterKind, atilde, proj_ann_rot, proj_obs_rot) -> np.ndarray:
    """Open-loop recursion matrix screened for observability against the
    annihilator projector."""
    if kind.is_ramp:
        pa = proj_ann_rot @ atilde
        return pa @ atilde - 2.0 * pa + atilde + proj_ann_rot
    return proj_obs_rot @ atilde + proj_ann_rot


def select_rotation(
    st: StackedOperators,
    sys: LtiSystem | FaultLtiSystem,
    strategy: RotationStrategy,
    kind: FilterKind,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> tuple[np.ndarray, ObservabilityReport]:
    """First rotation whose recursion pair passes the PBH screen.

    A square channel with a transmission zero at z = 1 admits no such
    rotation, so that case fails immediately.
    """
    report = fault_zeros(sys, tol) if isinstance(sys, FaultLtiSystem) else invariant_zeros(sys, tol)
    if sys.square and report.at_one:
        raise ZeroAtOne(
            "transmission zero at z=1: recursion pair is unobservable for every rotation"
        )
    dim = st.obs_mat.shape[0]
    atilde = compute_atilde(sys, st, tol)
    margin_floor = max(tol.obs_margin, strategy.obs_margin)
    if isinstance(strategy, PlaneAngle):
        candidates = [plane_rotation(dim, strategy.i, strategy.j, strategy.theta)]
    else:
        candidates = (
            random_rotation(dim, strategy.seed + attempt)
            for attempt in range(strategy.retry_budget)
        )
    best = -math.inf
    for R in candidates:
        proj_ann_rot, proj_obs_rot = rotated_projectors(st, R, tol)
        pair = _pair_matrix(kind, atilde, proj_ann_rot, proj_obs_rot)
        obs = check_pair_observability(pair, -projector_rowspace(st.annihilator), tol)
        if obs.margin > margin_floor:
            return R, obs
        best = max(best, obs.margin)
    raise RetriesExhausted(
        f"no rotation reached PBH margin {margin_floor:g}; best was {best:g}"
    )


def place_poles(
    Aop: np.ndarray,
    Cop: np.ndarray,
    poles,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> np.ndarray:
    """Output-injection gain K2 with eigenvalues(Aop + K2 @ Cop) = poles.

    Cop may be rank deficient (projectors are); placement runs on an
    orthonormal basis of its row space, so only the product K2 @ Cop is
    pinned.  The contract is the closed-loop spectrum, not the K2 entries.
    """
    Aop = as_matrix(Aop, "Aop")
    Cop = as_matrix(Cop, "Cop")
    dim = Aop.shape[0]
    poles = np.atleast_1d(np.asarray(poles, dtype=complex))
    if poles.size != dim:
        raise BadPoleSet(f"need {dim} poles, got {poles.size}")
    if not multiset_match(poles, np.conj(poles), tol.eig_tol):
        raise BadPoleSet("pole set is not closed under conjugation")
    if np.any(np.abs(poles) >= 1.0):
        raise BadPoleSet("all poles must lie strictly inside the unit circle")
    obs = check_pair_observability(Aop, Cop, tol)
    if not obs.observable:
        raise Unobservable(
            f"PBH margin {obs.margin:g} at eigenvalue {obs.worst_eigenvalue:.4g}"
        )
    # orthonormal row basis of Cop
    u, s, vt = np.linalg.svd(Cop)
    rank = int(np.count_nonzero(s > tol.rank_threshold(Cop)))
    basis = vt[:rank]
    if np.all(np.abs(poles.imag) <= tol.eig_tol):
        poles = poles.real.astype(float)
    try:
        fsf = scipy.signal.place_poles(Aop.T, basis.T, poles)
    except ValueError as exc:
        raise DesignError(f"pole placement failed: {exc}") from exc
    gain = -fsf.gain_matrix.T  # eig(Aop + gain @ basis) = poles
    K2 = gain @ basis @ pinv(Cop, tol)
    achieved = eigenvalues(Aop + K2 @ Cop)
    if not multiset_match(achieved, poles, 1e-6):
        raise DesignError(
            f"placement verification failed: requested {np.sort_complex(poles)}, "
            f"achieved {np.sort_complex(achieved)}"
        )
    return K2


def default_poles(dim: int) -> np.ndarray:
    """Evenly spaced real poles in [-0.1, 0.1]."""
    return np.linspace(-0.1, 0.1, dim)


def design(
    sys: LtiSystem | FaultLtiSystem,
    kind: FilterKind,
    strategy: RotationStrategy | None = None,
    poles=None,
    M: int | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> FilterDesign:
    """Assemble the full filter record for the requested kind.

    Fault kinds require a :class:`FaultLtiSystem`.  The direct minimum-phase
    inverse additionally requires a square minimum-phase channel and uses no
    rotation or injection gain; every other kind screens a rotation and
    places the closed-loop poles by output injection.
    """
    report = validate(sys, tol)
    if not report.ok:
        raise AssumptionViolated("; ".join(report.violations))
    if kind.is_fault != isinstance(sys, FaultLtiSystem):
        need = "a fault system" if kind.is_fault else "a plain system"
        raise DesignError(f"{kind.value} filter needs {need}")
    M = sys.n if M is None else int(M)
    st = build_fault_stacked(sys, M, tol) if kind.is_fault else build_stacked(sys, M, tol)
    aux_gain = compute_K1(st, tol)
    proj_ann = projector_rowspace(st.annihilator)
    proj_obs = projector_colspace(st.obs_mat)
    bf = compute_bf(sys, M)

    if kind is FilterKind.MIN_PHASE:
        if not sys.square:
            raise MinPhaseScope(f"needs l == m, got l={sys.l} m={sys.m}")
        zrep = invariant_zeros(sys, tol)
        if zrep.classification not in (Classification.MINIMUM_PHASE, Classification.NO_ZEROS):
            raise MinPhaseScope(f"system is {zrep.classification.value}")
        closed = sys.A - sys.B @ st.input_selector @ pinv(st.io_toeplitz, tol) @ st.obs_mat
        if spectral_radius(closed) >= 1.0:
            raise MinPhaseScope("direct inverse recursion is not contractive")
        return FilterDesign(
            kind=kind,
            M=M,
            stacked=st,
            aux_gain=aux_gain,
            rotation=None,
            proj_ann=proj_ann,
            proj_obs=proj_obs,
            proj_ann_rot=None,
            proj_obs_rot=None,
            residual_dynamics=compute_atilde(sys, st, tol),
            drive_map=bf,
            injection_gain=None,
            placed_poles=eigenvalues(closed),
            closed_loop=closed,
        )

    strategy = strategy if strategy is not None else RandomSeeded(seed=0)
    dim = st.obs_mat.shape[0]
    poles = default_poles(dim) if poles is None else np.asarray(poles)
    R, _ = select_rotation(st, sys, strategy, kind, tol)
    proj_ann_rot, proj_obs_rot = rotated_projectors(st, R, tol)
    atilde = compute_atilde(sys, st, tol)
    pair = _pair_matrix(kind, atilde, proj_ann_rot, proj_obs_rot)
    K2 = place_poles(pair, proj_ann, poles, tol)
    closed = pair + K2 @ proj_ann
    if spectral_radius(closed) >= 1.0 - 1e-9:
        raise DesignError("closed loop is not strictly inside the unit circle")
    return FilterDesign(
        kind=kind,
        M=M,
        stacked=st,
        aux_gain=aux_gain,
        rotation=R,
        proj_ann=proj_ann,
        proj_obs=proj_obs,
        proj_ann_rot=proj_ann_rot,
        proj_obs_rot=proj_obs_rot,
        residual_dynamics=atilde,
        drive_map=bf,
        injection_gain=K2,
        placed_poles=np.asarray(poles, dtype=complex),
        closed_loop=closed,
    )
