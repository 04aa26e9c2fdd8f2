"""Unbiased inversion-based unknown-input and fault estimation for
discrete-time LTI systems, including channels with transmission zeros
outside or on the unit circle."""

from .design import (
    FilterDesign,
    FilterKind,
    ObservabilityReport,
    PlaneAngle,
    RandomSeeded,
    check_pair_observability,
    compute_K1,
    compute_atilde,
    compute_bf,
    default_poles,
    design,
    place_poles,
    rotated_projectors,
    select_rotation,
)
from .harness import (
    CaseResult,
    Signal,
    SimTrace,
    SimulationResult,
    case1_system,
    case2_system,
    case3_system,
    case4_system,
    metrics,
    realize_tf,
    run_case,
    run_filter,
    simulate,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    eigenvalues,
    multiset_match,
    numerical_rank,
    orth_complement_rows,
    pinv,
    plane_rotation,
    projector_colspace,
    projector_rowspace,
    random_rotation,
    spectral_radius,
)
from .runtime import EstimateSample, FilterState
from .sysmodel import (
    Classification,
    FaultLtiSystem,
    LtiSystem,
    StackedOperators,
    ValidationReport,
    ZeroReport,
    build_fault_stacked,
    build_stacked,
    fault_zeros,
    hankel_stack_alt,
    invariant_zeros,
    zero_dynamics_eigs,
    validate,
)

__version__ = "0.1.0"
