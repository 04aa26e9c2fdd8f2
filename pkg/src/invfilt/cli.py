"""Command-line surface.

Exit codes: 0 success, 2 configuration parse/semantic error, 3 design
failure, 4 runtime or I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import design_from_config, parse_config
from .design import PlaneAngle, RandomSeeded, check_pair_observability, default_poles
from .errors import ConfigError, DesignError, InvFiltError
from .harness import run_case, run_filter
from .linalg import DEFAULT_TOL, ToleranceConfig
from .reporting import render_trace_figure, write_case_outputs, write_trace_csv
from .sysmodel import FaultLtiSystem, fault_zeros, invariant_zeros, validate

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DESIGN = 3
EXIT_RUNTIME = 4


def _load_config(path: str):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _tol_from(args) -> ToleranceConfig:
    if getattr(args, "tol", None) is None:
        return DEFAULT_TOL
    return ToleranceConfig(eig_tol=args.tol, obs_margin=args.tol)


def _effective_seed(args) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("INVFILT_SEED")
    return int(env) if env else None


def _fmt_matrix(name: str, m: np.ndarray) -> str:
    body = np.array2string(np.asarray(m), precision=6, suppress_small=True)
    return f"{name} =\n{body}"


def _cmd_zeros(args) -> int:
    cfg = _load_config(args.config)
    tol = _tol_from(args)
    sys = cfg.system
    if isinstance(sys, FaultLtiSystem):
        print("fault-to-output", fault_zeros(sys, tol))
        if np.any(sys.B) or np.any(sys.D):
            print("input-to-output", invariant_zeros(sys.base, tol))
    else:
        print("input-to-output", invariant_zeros(sys, tol))
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    report = validate(cfg.system, _tol_from(args))
    print(f"observability rank: {report.observability_rank}/{report.state_count}")
    print(f"channel full column rank: {report.channel_full_rank}")
    print(f"output count sufficient: {report.output_count_ok}")
    if report.ok:
        print("all assumptions hold")
        return EXIT_OK
    for v in report.violations:
        print(f"violated: {v}")
    return EXIT_DESIGN


def _cmd_design(args) -> int:
    cfg = _load_config(args.config)
    tol = _tol_from(args)
    rotation = None
    if args.theta is not None:
        rotation = PlaneAngle(0, 1, math.radians(args.theta))
    dsgn = design_from_config(
        cfg,
        rotation_override=rotation,
        poles_override=args.poles,
        seed_override=_effective_seed(args),
        tol=tol,
    )
    print(f"kind: {dsgn.kind.value}   M: {dsgn.M}   window: {dsgn.window}")
    print(_fmt_matrix("aux gain K1", dsgn.aux_gain))
    print(_fmt_matrix("residual dynamics", dsgn.residual_dynamics))
    print(_fmt_matrix("closed loop", dsgn.closed_loop))
    spec = np.sort_complex(np.linalg.eigvals(dsgn.closed_loop))
    print("closed-loop spectrum:", np.array2string(spec, precision=6))
    if dsgn.injection_gain is not None:
        gain = dsgn.injection_gain @ dsgn.proj_ann
        print(f"injection gain norm |K2 P_h|: {np.linalg.norm(gain):.6g}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    tol = _tol_from(args)
    dsgn = design_from_config(cfg, seed_override=_effective_seed(args), tol=tol)
    steps = args.steps if args.steps is not None else cfg.steps
    trace = run_filter(
        cfg.system,
        dsgn,
        inputs=cfg.inputs,
        faults=cfg.faults,
        steps=steps,
        x0=cfg.x0,
        label=dsgn.kind.value,
    )
    out = Path(args.out)
    write_trace_csv(trace, out)
    fig = out.with_suffix(".png")
    render_trace_figure(trace, fig)
    print(f"wrote {out} and {fig}")
    print(f"steady-state error: {trace.steady_state_err:.3e}")
    print(f"convergence step: {trace.convergence_step}")
    return EXIT_OK


def _cmd_case(args) -> int:
    result = run_case(
        args.case_id,
        steps=args.steps,
        seed=_effective_seed(args),
        tol=_tol_from(args),
    )
    out_dir = Path(args.out_dir) if args.out_dir else Path(f"case{args.case_id}_out")
    written = write_case_outputs(result, out_dir)
    for label, trace in result.traces.items():
        print(
            f"case {args.case_id} [{label}]: delay={trace.delay} "
            f"steady_state_err={trace.steady_state_err:.3e} "
            f"convergence_step={trace.convergence_step}"
        )
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_sweep_theta(args) -> int:
    from .design import FilterKind, place_poles, rotated_projectors, _pair_matrix
    from .linalg import plane_rotation, projector_rowspace
    from .sysmodel import build_fault_stacked, build_stacked
    from .design import compute_atilde

    cfg = _load_config(args.config)
    tol = _tol_from(args)
    sys = cfg.system
    kind = cfg.filter_kind or FilterKind.STEP
    st = (
        build_fault_stacked(sys, cfg.M, tol)
        if isinstance(sys, FaultLtiSystem)
        else build_stacked(sys, cfg.M, tol)
    )
    dim = st.obs_mat.shape[0]
    atilde = compute_atilde(sys, st, tol)
    proj_ann = projector_rowspace(st.annihilator)
    poles = np.asarray(cfg.poles) if cfg.poles is not None else default_poles(dim)
    print(f"{'theta_deg':>10} {'pbh_margin':>12} {'|K2 P_h|':>12}")
    for theta in np.linspace(args.frm, args.to, args.steps):
        R = plane_rotation(dim, 0, 1, math.radians(theta))
        pa, po = rotated_projectors(st, R, tol)
        pair = _pair_matrix(kind, atilde, pa, po)
        obs = check_pair_observability(pair, -proj_ann, tol)
        if not obs.observable:
            print(f"{theta:10.3f} {obs.margin:12.3e} {'unobservable':>12}")
            continue
        K2 = place_poles(pair, proj_ann, poles, tol)
        print(f"{theta:10.3f} {obs.margin:12.3e} {np.linalg.norm(K2 @ proj_ann):12.5g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invfilt",
        description="Inversion-based unknown-input and fault estimation "
        "for discrete-time LTI systems.",
    )
    parser.add_argument("--version", action="version", version=f"invfilt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None,
                       help="eigenvalue/observability tolerance override")
        p.add_argument("--seed", type=int, default=None,
                       help="rotation seed override (INVFILT_SEED also honored)")

    p = sub.add_parser("zeros", help="print transmission zeros and classification")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=_cmd_zeros)

    p = sub.add_parser("check", help="check observability and rank assumptions")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("design", help="synthesize the configured filter and print it")
    p.add_argument("config")
    p.add_argument("--theta", type=float, default=None,
                   help="use a plane rotation of this angle in degrees")
    p.add_argument("--poles", type=float, nargs="+", default=None)
    common(p)
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("simulate", help="run the configured filter on simulated data")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output CSV path (PNG written alongside)")
    p.add_argument("--steps", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("case", help="run one of the four built-in case studies")
    p.add_argument("case_id", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--out-dir", default=None)
    p.add_argument("--steps", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_case)

    p = sub.add_parser("sweep-theta", help="tabulate PBH margin and gain vs angle")
    p.add_argument("config")
    p.add_argument("--from", dest="frm", type=float, required=True)
    p.add_argument("--to", dest="to", type=float, required=True)
    p.add_argument("--steps", type=int, default=19)
    p.add_argument("--poles", type=float, nargs="+", default=None)
    common(p)
    p.set_defaults(func=_cmd_sweep_theta)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_PARSE
    except DesignError as exc:
        print(f"design error: {exc}", file=_sys.stderr)
        return EXIT_DESIGN
    except (InvFiltError, OSError) as exc:
        print(f"runtime error: {exc}", file=_sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
