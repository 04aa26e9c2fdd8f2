"""JSON configuration: system matrices, filter choice, signals, run length."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .design import (
    FilterDesign,
    FilterKind,
    PlaneAngle,
    RandomSeeded,
    RotationStrategy,
    design,
)
from .errors import DimensionMismatch, ParseError, SemanticError
from .harness import Signal
from .linalg import DEFAULT_TOL, ToleranceConfig
from .sysmodel import FaultLtiSystem, LtiSystem


@dataclass(frozen=True)
class SystemConfig:
    """Parsed configuration; ``system`` is already a validated record."""

    system: LtiSystem | FaultLtiSystem
    M: int | None = None
    filter_kind: FilterKind | None = None
    rotation: RotationStrategy | None = None
    poles: tuple[float, ...] | None = None
    seed: int | None = None
    inputs: tuple[Signal, ...] = ()
    faults: tuple[Signal, ...] = ()
    x0: tuple[float, ...] | None = None
    steps: int = 120


def _matrix(raw, path: str) -> np.ndarray:
    try:
        m = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SemanticError(f"{path}: not a numeric matrix ({exc})") from exc
    if m.ndim != 2 or not np.all(np.isfinite(m)):
        raise SemanticError(f"{path}: must be a finite 2-D array")
    return m


def _parse_signal(raw, path: str) -> Signal:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise SemanticError(f"{path}: signal needs a 'kind' field")
    kind = raw["kind"]
    channel = int(raw.get("channel", 0))
    try:
        if kind == "step":
            return Signal.step(channel, float(raw.get("amplitude", 1.0)),
                               int(raw.get("start", 0)))
        if kind == "ramp":
            return Signal.ramp(channel, float(raw.get("slope", 0.0)),
                               int(raw.get("start", 0)))
        if kind == "zero":
            return Signal.zero(channel)
        if kind == "samples":
            return Signal.samples(channel, raw.get("values", ()))
    except (TypeError, ValueError, DimensionMismatch) as exc:
        raise SemanticError(f"{path}: {exc}") from exc
    raise SemanticError(f"{path}: unknown signal kind {kind!r}")


def _parse_rotation(raw, path: str) -> RotationStrategy:
    mode = raw.get("mode")
    if mode == "plane":
        theta = raw.get("theta_deg")
        theta = math.radians(float(theta)) if theta is not None else float(raw.get("theta", 0.0))
        return PlaneAngle(int(raw.get("i", 0)), int(raw.get("j", 1)), theta,
                          obs_margin=float(raw.get("obs_margin", 1e-6)))
    if mode == "random":
        return RandomSeeded(int(raw.get("seed", 0)),
                            retry_budget=int(raw.get("retry_budget", 50)),
                            obs_margin=float(raw.get("obs_margin", 1e-6)))
    raise SemanticError(f"{path}.mode: expected 'plane' or 'random', got {mode!r}")


_KIND_NAMES = {k.value: k for k in FilterKind}


def parse_config(text: str) -> SystemConfig:
    """Parse JSON configuration text.

    Raises :class:`ParseError` with line/column for malformed JSON and
    :class:`SemanticError` with the offending field path for anything that
    parses but does not describe a consistent setup.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SemanticError("top level: expected a JSON object")
    if "system" not in raw:
        raise SemanticError("system: required")
    sysraw = raw["system"]
    if not isinstance(sysraw, dict):
        raise SemanticError("system: expected an object of matrices")
    mats = {}
    for name in ("A", "B", "C", "D"):
        if name not in sysraw:
            raise SemanticError(f"system.{name}: required")
        mats[name] = _matrix(sysraw[name], f"system.{name}")
    n = mats["A"].shape[0]
    if mats["A"].shape != (n, n):
        raise SemanticError("system.A: must be square")
    if mats["B"].shape[0] != n:
        raise SemanticError("system.B: row count must match A")
    if mats["C"].shape[1] != n:
        raise SemanticError("system.C: column count must match A")
    if mats["D"].shape != (mats["C"].shape[0], mats["B"].shape[1]):
        raise SemanticError("system.D: shape must be outputs x inputs")
    try:
        base = LtiSystem(A=mats["A"], B=mats["B"], C=mats["C"], D=mats["D"])
    except DimensionMismatch as exc:
        raise SemanticError(f"system: {exc}") from exc
    has_l, has_e = "L" in sysraw, "E" in sysraw
    if has_l != has_e:
        raise SemanticError("system.L/system.E: both or neither must be given")
    if has_l:
        L = _matrix(sysraw["L"], "system.L")
        E = _matrix(sysraw["E"], "system.E")
        if L.shape[0] != n:
            raise SemanticError("system.L: row count must match A")
        if E.shape != (base.l, L.shape[1]):
            raise SemanticError("system.E: shape must be outputs x faults")
        try:
            system: LtiSystem | FaultLtiSystem = FaultLtiSystem(base=base, L=L, E=E)
        except DimensionMismatch as exc:
            raise SemanticError(f"system: {exc}") from exc
    else:
        system = base

    filt = raw.get("filter", {})
    if not isinstance(filt, dict):
        raise SemanticError("filter: expected an object")
    kind = None
    if "kind" in filt:
        if filt["kind"] not in _KIND_NAMES:
            raise SemanticError(
                f"filter.kind: expected one of {sorted(_KIND_NAMES)}, got {filt['kind']!r}"
            )
        kind = _KIND_NAMES[filt["kind"]]
    rotation = _parse_rotation(filt["rotation"], "filter.rotation") if "rotation" in filt else None
    poles = tuple(float(p) for p in filt["poles"]) if "poles" in filt else None
    seed = int(filt["seed"]) if "seed" in filt else None

    sigraw = raw.get("signals", {})
    if not isinstance(sigraw, dict):
        raise SemanticError("signals: expected an object")
    inputs = tuple(
        _parse_signal(s, f"signals.inputs[{i}]") for i, s in enumerate(sigraw.get("inputs", []))
    )
    faults = tuple(
        _parse_signal(s, f"signals.faults[{i}]") for i, s in enumerate(sigraw.get("faults", []))
    )
    if faults and not has_l:
        raise SemanticError("signals.faults: system has no fault channel (L/E missing)")

    x0 = None
    if "x0" in raw:
        x0 = tuple(float(v) for v in raw["x0"])
        if len(x0) != n:
            raise SemanticError(f"x0: need {n} entries, got {len(x0)}")
    M = int(raw["M"]) if "M" in raw else None
    if M is not None and M < n:
        raise SemanticError(f"M: must be >= state count {n}")
    steps = int(raw.get("steps", 120))
    if steps < 1:
        raise SemanticError("steps: must be >= 1")
    return SystemConfig(
        system=system,
        M=M,
        filter_kind=kind,
        rotation=rotation,
        poles=poles,
        seed=seed,
        inputs=inputs,
        faults=faults,
        x0=x0,
        steps=steps,
    )


def _signal_to_dict(sig: Signal) -> dict:
    out: dict = {"kind": sig.kind, "channel": sig.channel}
    if sig.kind == "step":
        out.update(amplitude=sig.amplitude, start=sig.start_k)
    elif sig.kind == "ramp":
        out.update(slope=sig.slope, start=sig.start_k)
    elif sig.kind == "samples":
        out.update(values=list(sig.values))
    return out


def serialize_config(cfg: SystemConfig) -> str:
    """Inverse of :func:`parse_config` for valid configurations."""
    sys = cfg.system
    sysdict = {
        "A": sys.A.tolist(),
        "B": sys.B.tolist(),
        "C": sys.C.tolist(),
        "D": sys.D.tolist(),
    }
    if isinstance(sys, FaultLtiSystem):
        sysdict["L"] = sys.L.tolist()
        sysdict["E"] = sys.E.tolist()
    out: dict = {"system": sysdict, "steps": cfg.steps}
    if cfg.M is not None:
        out["M"] = cfg.M
    filt: dict = {}
    if cfg.filter_kind is not None:
        filt["kind"] = cfg.filter_kind.value
    if isinstance(cfg.rotation, PlaneAngle):
        filt["rotation"] = {
            "mode": "plane",
            "i": cfg.rotation.i,
            "j": cfg.rotation.j,
            "theta_deg": math.degrees(cfg.rotation.theta),
            "obs_margin": cfg.rotation.obs_margin,
        }
    elif isinstance(cfg.rotation, RandomSeeded):
        filt["rotation"] = {
            "mode": "random",
            "seed": cfg.rotation.seed,
            "retry_budget": cfg.rotation.retry_budget,
            "obs_margin": cfg.rotation.obs_margin,
        }
    if cfg.poles is not None:
        filt["poles"] = list(cfg.poles)
    if cfg.seed is not None:
        filt["seed"] = cfg.seed
    if filt:
        out["filter"] = filt
    sigs: dict = {}
    if cfg.inputs:
        sigs["inputs"] = [_signal_to_dict(s) for s in cfg.inputs]
    if cfg.faults:
        sigs["faults"] = [_signal_to_dict(s) for s in cfg.faults]
    if sigs:
        out["signals"] = sigs
    if cfg.x0 is not None:
        out["x0"] = list(cfg.x0)
    return json.dumps(out, indent=2)


def design_from_config(
    cfg: SystemConfig,
    rotation_override: RotationStrategy | None = None,
    poles_override=None,
    seed_override: int | None = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> FilterDesign:
    """Build the configured filter, applying CLI/environment overrides."""
    kind = cfg.filter_kind
    if kind is None:
        raise SemanticError("filter.kind: required for this operation")
    strategy = rotation_override or cfg.rotation
    if strategy is None:
        seed = seed_override if seed_override is not None else (cfg.seed or 0)
        strategy = RandomSeeded(seed=seed)
    elif seed_override is not None and isinstance(strategy, RandomSeeded):
        strategy = RandomSeeded(
            seed=seed_override,
            retry_budget=strategy.retry_budget,
            obs_margin=strategy.obs_margin,
        )
    poles = poles_override if poles_override is not None else cfg.poles
    return design(cfg.system, kind, strategy=strategy, poles=poles, M=cfg.M, tol=tol)
