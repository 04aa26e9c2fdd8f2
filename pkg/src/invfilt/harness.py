"""Plant simulation, signal generation, transfer-function realization, and
the four built-in demonstration cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import FilterDesign, FilterKind, PlaneAngle, RandomSeeded, design
from .errors import DimensionMismatch, ImproperTransferFunction, InvFiltError
from .linalg import DEFAULT_TOL, ToleranceConfig
from .runtime import FilterState
from .sysmodel import FaultLtiSystem, LtiSystem

CASE3_POLES = (0.5, -0.5, 0.3571, -0.3571, 0.2143, -0.2143, 0.0714, -0.0714)
_CASE_SEEDS = {2: 7, 3: 11, 4: 3}


@dataclass(frozen=True)
class Signal:
    """One scalar signal on one channel of a multichannel sequence."""

    kind: str  # "step" | "ramp" | "zero" | "samples"
    channel: int = 0
    amplitude: float = 1.0
    slope: float = 0.0
    start_k: int = 0
    values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("step", "ramp", "zero", "samples"):
            raise DimensionMismatch(f"unknown signal kind {self.kind!r}")
        if self.start_k < 0:
            raise DimensionMismatch("start_k must be >= 0")
        if self.kind == "samples":
            if self.values is None or not np.all(np.isfinite(self.values)):
                raise DimensionMismatch("samples signal needs finite values")

    @staticmethod
    def step(channel: int, amplitude: float = 1.0, start_k: int = 0) -> "Signal":
        return Signal("step", channel, amplitude=amplitude, start_k=start_k)

    @staticmethod
    def ramp(channel: int, slope: float, start_k: int = 0) -> "Signal":
        return Signal("ramp", channel, slope=slope, start_k=start_k)

    @staticmethod
    def zero(channel: int = 0) -> "Signal":
        return Signal("zero", channel)

    @staticmethod
    def samples(channel: int, values) -> "Signal":
        return Signal("samples", channel, values=tuple(float(v) for v in values))

    def value_at(self, k: int) -> float:
        if self.kind == "step":
            return self.amplitude if k >= self.start_k else 0.0
        if self.kind == "ramp":
            return self.slope * max(0, k - self.start_k)
        if self.kind == "samples":
            return self.values[k] if k < len(self.values) else 0.0
        return 0.0


def signals_to_array(signals, channels: int, steps: int) -> np.ndarray:
    """Superpose signals into a (steps, channels) array."""
    out = np.zeros((steps, channels))
    for sig in signals:
        if not 0 <= sig.channel < channels:
            raise DimensionMismatch(
                f"signal channel {sig.channel} outside 0..{channels - 1}"
            )
        out[:, sig.channel] += [sig.value_at(k) for k in range(steps)]
    return out


@dataclass(frozen=True)
class SimulationResult:
    """Exact trajectories of one simulation run."""

    y: np.ndarray
    x: np.ndarray
    u: np.ndarray
    f: np.ndarray | None = None


def simulate(
    sys: LtiSystem | FaultLtiSystem,
    x0=None,
    inputs=(),
    faults=(),
    steps: int = 100,
) -> SimulationResult:
    """Run the exact state recursion and return outputs plus true states."""
    is_fault = isinstance(sys, FaultLtiSystem)
    x = np.zeros(sys.n) if x0 is None else np.asarray(x0, dtype=float).reshape(-1)
    if x.shape != (sys.n,):
        raise DimensionMismatch(f"x0 must have length {sys.n}")
    u_seq = signals_to_array(inputs, sys.m, steps)
    f_seq = signals_to_array(faults, sys.p, steps) if is_fault else None
    if faults and not is_fault:
        raise DimensionMismatch("fault signals supplied for a system without faults")
    ys = np.zeros((steps, sys.l))
    xs = np.zeros((steps, sys.n))
    for k in range(steps):
        xs[k] = x
        y = sys.C @ x + sys.D @ u_seq[k]
        step = sys.A @ x + sys.B @ u_seq[k]
        if is_fault:
            y = y + sys.E @ f_seq[k]
            step = step + sys.L @ f_seq[k]
        ys[k] = y
        x = step
    return SimulationResult(y=ys, x=xs, u=u_seq, f=f_seq)


def _impulse_series(num: np.ndarray, den: np.ndarray, count: int) -> np.ndarray:
    """Leading coefficients of num/den expanded in negative powers (long division)."""
    n = len(den) - 1
    rem = np.concatenate([np.zeros(n + 1 - len(num)), num]).astype(float)
    out = np.zeros(count)
    for j in range(count):
        out[j] = rem[0] / den[0]
        rem = np.append(rem - out[j] * den, 0.0)[1:]
    return out


def realize_tf(num_coeffs, den_coeffs, tol: ToleranceConfig = DEFAULT_TOL) -> LtiSystem:
    """Controllable-canonical SISO realization of a proper rational function.

    Coefficients are in descending powers of z.  A nonzero direct term is
    split off by one long-division step.  The realization is self-checked:
    its impulse response must match the series expansion of the ratio over
    the first ``3n + 1`` samples.
    """
    num_in = np.trim_zeros(np.atleast_1d(np.asarray(num_coeffs, dtype=float)), "f")
    den_in = np.trim_zeros(np.atleast_1d(np.asarray(den_coeffs, dtype=float)), "f")
    if den_in.size == 0:
        raise ImproperTransferFunction("denominator is zero")
    if num_in.size == 0:
        num_in = np.zeros(1)
    if num_in.size > den_in.size:
        raise ImproperTransferFunction(
            f"numerator degree {num_in.size - 1} exceeds denominator degree {den_in.size - 1}"
        )
    num = num_in / den_in[0]
    den = den_in / den_in[0]
    n = den.size - 1
    if n == 0:
        raise ImproperTransferFunction("static ratios have no state-space realization")
    if num.size == den.size:
        d = num[0]
        num = num - d * den
    else:
        d = 0.0
    strict = np.concatenate([np.zeros(den.size - num.size), num])[1:]  # length n
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    sys = LtiSystem(A=A, B=B, C=strict.reshape(1, n), D=np.array([[d]]))
    # self-check against the long-division series of the original ratio
    want = _impulse_series(num_in, den_in, 3 * n + 1)
    got = simulate(sys, inputs=[Signal.samples(0, [1.0])], steps=3 * n + 1).y[:, 0]
    if np.abs(want - got).max() > 1e-10:
        raise InvFiltError("realization self-check failed against series expansion")
    return sys


@dataclass
class SimTrace:
    """Time-aligned record of truth, estimate, and error for one run.

    ``truth[i]`` is the true signal value at ``k[i] - delay``, i.e. exactly
    what ``estimate[i]`` claims to reconstruct.
    """

    label: str
    k: np.ndarray
    y: np.ndarray
    truth: np.ndarray
    estimate: np.ndarray
    abs_err: np.ndarray
    delay: int
    tolerance: float = 1e-6
    steady_state_err: float = field(default=math.nan)
    convergence_step: int | None = field(default=None)


def metrics(trace: SimTrace, tolerance: float) -> tuple[float, int | None]:
    """Steady-state error over the final 10% of samples, and the first push
    index after which the error stays below ``tolerance`` (None if never)."""
    count = len(trace.k)
    if count == 0:
        raise DimensionMismatch("empty trace")
    tail = max(1, count // 10)
    sse = float(trace.abs_err[-tail:].max())
    below = np.all(trace.abs_err <= tolerance, axis=1)
    conv = None
    for i in range(count):
        if below[i:].all():
            conv = int(trace.k[i])
            break
    return sse, conv


def run_filter(
    sys: LtiSystem | FaultLtiSystem,
    dsgn: FilterDesign,
    inputs=(),
    faults=(),
    steps: int = 120,
    x0=None,
    tolerance: float = 1e-6,
    label: str = "",
) -> SimTrace:
    """Simulate the plant, stream samples through the filter, align truth."""
    sim = simulate(sys, x0=x0, inputs=inputs, faults=faults, steps=steps)
    truth_seq = sim.f if dsgn.kind.is_fault else sim.u
    state = FilterState(dsgn)
    delay = dsgn.estimate_delay
    rows_k, rows_y, rows_truth, rows_est = [], [], [], []
    for k in range(steps):
        est = state.push_sample(sim.y[k], sim.u[k] if dsgn.kind.is_fault else None)
        if est is None:
            continue
        rows_k.append(k)
        rows_y.append(sim.y[k])
        rows_truth.append(truth_seq[est.k_estimated])
        rows_est.append(est.value)
    truth = np.asarray(rows_truth)
    estimate = np.asarray(rows_est)
    trace = SimTrace(
        label=label,
        k=np.asarray(rows_k, dtype=int),
        y=np.asarray(rows_y),
        truth=truth,
        estimate=estimate,
        abs_err=np.abs(estimate - truth),
        delay=delay,
        tolerance=tolerance,
    )
    trace.steady_state_err, trace.convergence_step = metrics(trace, tolerance)
    return trace


# -- built-in case studies --------------------------------------------------


def case1_system() -> LtiSystem:
    """First-order SISO plant with one zero outside the unit circle."""
    return LtiSystem(A=[[0.5]], B=[[1.0]], C=[[-1.0]], D=[[1.0]])


def case2_system() -> FaultLtiSystem:
    """Fourth-order two-output plant with two fault channels and zeros on
    both sides of the unit circle; the known input is identically zero."""
    A = [[0, 0, 0, 0.10], [1, 0, 0, -0.09], [0, 1, 0, 0.28], [0, 0, 1, 0.07]]
    L = [[1, -0.80], [0, -2.05], [0, 5.13], [0, 1.78]]
    C = [[-0.46, -0.35, -0.1, 0.14], [0.59, -0.52, -0.01, 0.04]]
    base = LtiSystem(A=A, B=np.zeros((4, 2)), C=C, D=np.zeros((2, 2)))
    return FaultLtiSystem(base=base, L=L, E=np.zeros((2, 2)))


def case3_system() -> FaultLtiSystem:
    """Fault channel realized from (z^3 + z^2 + z + 1) / z^4: all three
    zeros on the unit circle, none at +1."""
    tf = realize_tf([1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0, 0.0])
    base = LtiSystem(A=tf.A, B=np.zeros((4, 1)), C=tf.C, D=np.zeros((1, 1)))
    return FaultLtiSystem(base=base, L=tf.B, E=tf.D)


def case4_system() -> LtiSystem:
    """Fourth-order square MIMO plant with zeros at 0.6072 and 1.9928."""
    A = [[0.6, -0.3, 0, 0], [0.1, 1, 0, 0], [-0.4, -1.5, 0.4, -0.3], [0.3, 1.1, 0.2, 0.9]]
    B = [[0, 0.4], [0, 0], [0, -0.1], [0.1, 0.1]]
    C = [[1, 2, 3, 4], [2, 1, 5, 6]]
    return LtiSystem(A=A, B=B, C=C, D=np.zeros((2, 2)))


@dataclass
class CaseResult:
    case_id: int
    designs: dict[str, FilterDesign]
    traces: dict[str, SimTrace]


def run_case(
    case_id: int,
    steps: int | None = None,
    seed: int | None = None,
    tolerance: float = 1e-6,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CaseResult:
    """Design, simulate, and evaluate one of the four built-in cases.

    Case 1: step-input estimation with two plane rotations (5 and 45 deg),
    poles at +/-0.1.  Case 2: step + ramp fault estimation with a seeded
    random rotation and 16 poles in [-0.1, 0.1].  Case 3: step fault
    estimation of the unit-circle-zero channel with the fixed 8-pole set.
    Case 4: square MIMO step-input estimation at delay 8.
    """
    if case_id not in (1, 2, 3, 4):
        raise DimensionMismatch(f"case_id must be 1..4, got {case_id}")
    designs: dict[str, FilterDesign] = {}
    traces: dict[str, SimTrace] = {}
    if case_id == 1:
        sys = case1_system()
        steps = 120 if steps is None else steps
        inputs = [Signal.step(0, 1.0, start_k=10)]
        for label, deg in (("theta05", 5.0), ("theta45", 45.0)):
            dsgn = design(
                sys,
                FilterKind.STEP,
                strategy=PlaneAngle(0, 1, math.radians(deg)),
                poles=[0.1, -0.1],
                tol=tol,
            )
            designs[label] = dsgn
            traces[label] = run_filter(
                sys, dsgn, inputs=inputs, steps=steps, tolerance=tolerance, label=label
            )
    elif case_id == 2:
        sysf = case2_system()
        steps = 160 if steps is None else steps
        strategy = RandomSeeded(seed=_CASE_SEEDS[2] if seed is None else seed)
        dsgn = design(
            sysf, FilterKind.FAULT_RAMP, strategy=strategy,
            poles=np.linspace(-0.1, 0.1, 16), tol=tol,
        )
        designs["fault_ramp"] = dsgn
        traces["fault_ramp"] = run_filter(
            sysf,
            dsgn,
            faults=[Signal.step(0, 1.0, start_k=20), Signal.ramp(1, 0.02, start_k=20)],
            steps=steps,
            tolerance=tolerance,
            label="fault_ramp",
        )
    elif case_id == 3:
        sysf = case3_system()
        steps = 160 if steps is None else steps
        strategy = RandomSeeded(seed=_CASE_SEEDS[3] if seed is None else seed)
        dsgn = design(sysf, FilterKind.FAULT_STEP, strategy=strategy,
                      poles=CASE3_POLES, tol=tol)
        designs["fault_step"] = dsgn
        traces["fault_step"] = run_filter(
            sysf,
            dsgn,
            faults=[Signal.step(0, 1.0, start_k=20)],
            steps=steps,
            tolerance=tolerance,
            label="fault_step",
        )
    else:
        sys = case4_system()
        steps = 200 if steps is None else steps
        strategy = RandomSeeded(seed=_CASE_SEEDS[4] if seed is None else seed)
        dsgn = design(sys, FilterKind.STEP, strategy=strategy, tol=tol)
        designs["step"] = dsgn
        traces["step"] = run_filter(
            sys,
            dsgn,
            inputs=[Signal.step(0, 1.0, start_k=20), Signal.step(1, 1.0, start_k=60)],
            steps=steps,
            tolerance=tolerance,
            label="step",
        )
    return CaseResult(case_id=case_id, designs=designs, traces=traces)
