"""Streaming execution of a filter design.

A :class:`FilterState` consumes one output sample per push (plus the known
input for fault estimators), maintains rolling sample windows, and emits the
delayed estimate once enough history is buffered.  Step-family filters emit
the estimate of the signal ``2M`` samples back; ramp-family filters need one
extra sample of lookahead in their drive term and therefore run one push
behind, emitting at delay ``2M + 1``.

One state is single-writer: ``push_sample`` mutates it.  Distinct states are
independent and may run on different threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .design import FilterDesign, FilterKind
from .errors import DimensionMismatch, Diverged, WindowNotReady
from .linalg import DEFAULT_TOL, ToleranceConfig, pinv

DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True)
class EstimateSample:
    """One emitted estimate.

    ``k_estimated`` is the time index of the input or fault sample being
    estimated (current push index minus the filter delay).  ``aux_component``
    is the algebraic share of the estimate, i.e. the selector applied to the
    auxiliary least-squares reconstruction alone.
    """

    k_estimated: int
    value: np.ndarray
    aux_component: np.ndarray
    eta_norm: float


class FilterState:
    """Mutable runtime for one :class:`~invfilt.design.FilterDesign`."""

    def __init__(self, design: FilterDesign, tol: ToleranceConfig = DEFAULT_TOL):
        self.design = design
        st = design.stacked
        self._window = st.window
        self._tol = tol
        self._is_fault = design.kind.is_fault
        self._is_ramp = design.kind.is_ramp
        self._l = st.obs_mat.shape[0] // st.window
        self._m = st.input_selector.shape[0]
        self._obs_pinv = pinv(st.obs_mat, tol)
        self._io_pinv = pinv(st.io_toeplitz, tol)
        if self._is_fault:
            self._target_toeplitz = st.fault_toeplitz
            self._target_pinv = pinv(st.fault_toeplitz, tol)
            self._selector = st.fault_selector
        else:
            self._target_toeplitz = st.io_toeplitz
            self._target_pinv = self._io_pinv
            self._selector = st.input_selector
        # recursion matrices
        cb = st.obs_mat @ design.drive_map
        if design.kind is FilterKind.MIN_PHASE:
            self._drive0 = -design.drive_map
            self._drive1 = None
            self._out_gain = -self._io_pinv @ st.obs_mat
        elif self._is_ramp:
            pa = design.proj_ann_rot
            at = design.residual_dynamics
            self._drive1 = pa @ cb
            self._drive0 = (pa @ at - 2.0 * pa + np.eye(pa.shape[0])) @ cb
            self._out_gain = self._target_pinv
        else:
            self._drive0 = design.proj_obs_rot @ cb
            self._drive1 = None
            self._out_gain = self._target_pinv
        self._loop = design.closed_loop
        cap = self._window + 2
        self._y: deque[np.ndarray] = deque(maxlen=cap)
        self._u: deque[np.ndarray] = deque(maxlen=cap)
        self.step_index = -1
        self._state = np.zeros(self._loop.shape[0])
        self._prev_drive: np.ndarray | None = None

    @property
    def warmup(self) -> int:
        """Samples that must be pushed before the first estimate."""
        return self._window + (2 if self._is_ramp else 1)

    @property
    def eta_hat(self) -> np.ndarray:
        """Current recursion state (residual estimate, or state error for the
        direct minimum-phase inverse)."""
        return self._state.copy()

    def reset(self) -> "FilterState":
        """Clear windows and state; the design is untouched."""
        self._y.clear()
        self._u.clear()
        self.step_index = -1
        self._state = np.zeros_like(self._state)
        self._prev_drive = None
        return self

    # -- window access -----------------------------------------------------

    def _stack(self, buf: deque, start: int) -> np.ndarray:
        """Concatenate samples with absolute indices start..start+2M-1."""
        oldest = self.step_index - len(buf) + 1
        lo = start - oldest
        if start < 0 or lo < 0 or lo + self._window > len(buf):
            raise WindowNotReady(
                f"window starting at {start} not buffered at push {self.step_index}"
            )
        return np.concatenate([buf[i] for i in range(lo, lo + self._window)])

    def compute_uaux(self, shift: int = 0) -> np.ndarray:
        """Auxiliary vector for the window starting at ``k - 2M + shift``.

        Plain kinds map the raw output window through the auxiliary gain;
        fault kinds first subtract the known-input contribution.
        """
        start = self.step_index - self._window + shift
        y = self._stack(self._y, start)
        if self._is_fault:
            u = self._stack(self._u, start)
            return self.design.aux_gain @ (y - self.design.stacked.io_toeplitz @ u)
        return self.design.aux_gain @ y

    def compute_z(self, shift: int = 0) -> np.ndarray:
        """Implied state explaining the window after removing the auxiliary
        (and, for fault kinds, known-input) contributions."""
        start = self.step_index - self._window + shift
        y = self._stack(self._y, start)
        aux = self.compute_uaux(shift)
        resid = y - self._target_toeplitz @ aux
        if self._is_fault:
            resid = resid - self.design.stacked.io_toeplitz @ self._stack(self._u, start)
        return self._obs_pinv @ resid

    def build_composite(self, shift: int = 0) -> np.ndarray:
        """Drive vector: implied states at two consecutive offsets, the
        auxiliary vector, and (fault kinds) the known-input window."""
        parts = [self.compute_z(shift + 1), self.compute_z(shift), self.compute_uaux(shift)]
        if self._is_fault:
            start = self.step_index - self._window + shift
            parts.append(self._stack(self._u, start))
        return np.concatenate(parts)

    # -- streaming ---------------------------------------------------------

    def push_sample(self, y, u=None) -> EstimateSample | None:
        """Append one sample; return the delayed estimate once warm.

        Fault kinds require the known input ``u`` alongside every output
        sample.  Returns ``None`` while the windows are still filling.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.shape != (self._l,):
            raise DimensionMismatch(f"output sample must have length {self._l}")
        if self._is_fault:
            if u is None:
                raise DimensionMismatch("fault filters need the known input u each push")
            u = np.atleast_1d(np.asarray(u, dtype=float))
            if u.shape != (self._m,):
                raise DimensionMismatch(f"known input sample must have length {self._m}")
            self._u.append(u)
        self._y.append(y)
        self.step_index += 1
        k, window = self.step_index, self._window

        est: EstimateSample | None = None
        if self._is_ramp:
            if k >= window + 1:
                est = self._emit(shift=-1)
            if k >= window:
                drive = self.build_composite(0)
                if self._prev_drive is not None:
                    self._state = (
                        self._loop @ self._state
                        + self._drive1 @ drive
                        + self._drive0 @ self._prev_drive
                    )
                self._prev_drive = drive
        else:
            if k >= window:
                est = self._emit(shift=0)
                drive = self.build_composite(0)
                self._state = self._loop @ self._state + self._drive0 @ drive
        norm = float(np.linalg.norm(self._state))
        if not np.isfinite(norm) or norm > DIVERGENCE_GUARD:
            raise Diverged(f"state norm {norm:g} at push {k}")
        return est

    def _emit(self, shift: int) -> EstimateSample:
        aux = self.compute_uaux(shift)
        full = self._out_gain @ self._state + aux
        return EstimateSample(
            k_estimated=self.step_index - self._window + shift,
            value=self._selector @ full,
            aux_component=self._selector @ aux,
            eta_norm=float(np.linalg.norm(self._state)),
        )
