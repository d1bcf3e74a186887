"""fockgate command line: dimensions, invariants, verdicts, lifts, the adjoint test and demos.

Exit codes: 0 success or inconclusive, 1 forbidden (or not in the image),
2 usage/input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import demos
from .algebra import dump_frame, get_frame, load_frame
from .errors import (
    CompletionCountMismatch,
    FockgateError,
    FrameCacheError,
    LogBranchFailure,
    RankDeficient,
)
from .fock_space import (
    DEFAULT_CAP,
    DensityMatrix,
    PureState,
    dimension,
    enumerate_basis,
    state_from_json,
)
from .invariants import DEFAULT_TOLERANCE, invariants_closed, invariants_projection, transition_verdict
from .lift import (
    haar_unitary,
    is_optical_realization,
    lift_by_permanents,
    matrix_from_json,
    matrix_to_json,
    photonic_lift,
)
from .state_parser import parse_mixture, parse_state_expression

EXIT_OK = 0
EXIT_FORBIDDEN = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_INTERNAL_ERRORS = (RankDeficient, CompletionCountMismatch, LogBranchFailure)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    tolerance: float = DEFAULT_TOLERANCE
    cap: int = DEFAULT_CAP
    output: str = "text"
    seed: int = 42
    frame_cache: Path | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        if self.cap < 2:
            raise UsageError("--cap must be at least 2")


def _emit(cfg: RunConfig, payload, text: str):
    if cfg.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if x is None:
        return "n/a"
    return f"{x:.10f}"


def load_state_arg(text: str, cap: int = DEFAULT_CAP):
    """A grammar string, a ``p: expr; ...`` mixture, or ``@file.json`` (pure or mixture)."""
    if text.startswith("@"):
        data = json.loads(Path(text[1:]).read_text())
        if isinstance(data, dict) and "mixture" in data:
            return parse_mixture(data, cap=cap)
        return state_from_json(data)
    if ":" in text:
        return parse_mixture(text, cap=cap)
    parsed = parse_state_expression(text)
    if parsed.renormalized:
        print(f"warning: input norm {parsed.input_norm:.6g} renormalized to 1", file=sys.stderr)
    return parsed.state


def _is_mixed(state) -> bool:
    return isinstance(state, DensityMatrix) and state.pure_component() is None


def _density(state, cap) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    return DensityMatrix.from_pure(state, enumerate_basis(state.m, state.n, cap))


def frame_for(cfg: RunConfig, m: int, n: int):
    """Frame for (m, n), reusing a validated on-disk copy when --frame-cache is set."""
    if cfg.frame_cache is None:
        return get_frame(m, n, cfg.cap)
    enumerate_basis(m, n, cfg.cap)  # enforce the cap before touching disk
    path = Path(cfg.frame_cache) / f"frame_m{m}_n{n}.fgf"
    if path.exists():
        try:
            frame = load_frame(path, m, n)
            if frame.complete:
                return frame
        except FrameCacheError as exc:
            print(f"warning: rebuilding frame cache ({exc})", file=sys.stderr)
    frame = get_frame(m, n, cfg.cap)
    path.parent.mkdir(parents=True, exist_ok=True)
    dump_frame(frame, path)
    return frame


def _read_matrix(path) -> np.ndarray:
    return matrix_from_json(json.loads(Path(path).read_text()))


def cmd_dim(args, cfg: RunConfig) -> int:
    M = dimension(args.m, args.n)
    _emit(cfg, {"m": args.m, "n": args.n, "M": M}, str(M))
    return EXIT_OK


def cmd_basis(args, cfg: RunConfig) -> int:
    basis = enumerate_basis(args.m, args.n, cfg.cap)
    kets = [list(k) for k in basis.states]
    _emit(cfg, {"m": args.m, "n": args.n, "M": basis.dim, "states": kets},
          "\n".join("|" + ",".join(map(str, k)) + ">" for k in kets))
    return EXIT_OK


def _report_text(rep) -> str:
    return "\n".join([
        f"method      {rep.method}",
        f"I_t         {_fmt(rep.I_t)}",
        f"I_p         {_fmt(rep.I_p)}",
        f"purity      {_fmt(rep.purity)}",
        f"reduced_sum {_fmt(rep.reduced_sum)}",
    ])


def cmd_invariant(args, cfg: RunConfig) -> int:
    state = load_state_arg(args.state, cfg.cap)
    mode = args.mode
    mixed = _is_mixed(state)
    if mode is None:
        mode = "projection" if mixed else "closed"
    if mixed and mode != "projection":
        raise UsageError("the closed formula needs a pure state; use --projection for mixtures")
    pure = state if isinstance(state, PureState) else state.pure_component()
    reports = []
    if mode in ("closed", "both"):
        reports.append(invariants_closed(pure))
    if mode in ("projection", "both"):
        rho = _density(state, cfg.cap)
        reports.append(invariants_projection(rho, frame_for(cfg, rho.m, rho.n)))
    payload = reports[0].to_json() if len(reports) == 1 else {"reports": [r.to_json() for r in reports]}
    text = "\n\n".join(_report_text(r) for r in reports)
    status = EXIT_OK
    if mode == "both":
        a, b = reports
        gap = max(abs(a.I_t - b.I_t), abs(a.I_p - b.I_p))
        agree = gap <= cfg.tolerance
        payload["agree"] = agree
        payload["max_gap"] = gap
        text += f"\n\npaths {'agree' if agree else 'DISAGREE'} (max gap {gap:.3e})"
        if not agree:
            status = EXIT_INTERNAL
    _emit(cfg, payload, text)
    return status


def cmd_check(args, cfg: RunConfig) -> int:
    a = load_state_arg(args.input, cfg.cap)
    b = load_state_arg(args.output_state, cfg.cap)
    frame = None
    if _is_mixed(a) or _is_mixed(b):
        if (a.m, a.n) == (b.m, b.n):
            frame = frame_for(cfg, a.m, a.n)
    v = transition_verdict(a, b, cfg.tolerance, frame=frame, cap=cfg.cap)
    lines = [v.verdict]
    for w in v.violations:
        extra = f" (exact gap {w.exact_gap})" if w.exact_gap is not None else ""
        lines.append(f"  {w.quantity}: {w.lhs:.10f} vs {w.rhs:.10f}, gap {w.gap:.3e}{extra}")
    _emit(cfg, v.to_json(), "\n".join(lines))
    return EXIT_FORBIDDEN if v.forbidden else EXIT_OK


def cmd_lift(args, cfg: RunConfig) -> int:
    if (args.matrix is None) == (args.random is None):
        raise UsageError("give either a matrix file or --random MODES")
    if args.random is not None:
        S = haar_unitary(args.random, np.random.default_rng(cfg.seed))
    else:
        S = _read_matrix(args.matrix)
    basis = enumerate_basis(S.shape[0], args.n, cfg.cap)
    U = photonic_lift(S, args.n, basis=basis)
    payload = {"m": basis.m, "n": basis.n, "states": [list(k) for k in basis.states], "U": matrix_to_json(U)}
    status = EXIT_OK
    text_lines = []
    if args.check_oracle:
        dev = float(np.max(np.abs(U - lift_by_permanents(S, basis))))
        payload["oracle_max_deviation"] = dev
        text_lines.append(f"oracle max deviation {dev:.3e}")
        if dev > 1e-8:
            status = EXIT_INTERNAL
    if args.out:
        Path(args.out).write_text(json.dumps(matrix_to_json(U)))
        text_lines.insert(0, f"wrote {basis.dim}x{basis.dim} unitary to {args.out}")
    else:
        text_lines.insert(0, json.dumps(matrix_to_json(U)))
    _emit(cfg, payload, "\n".join(text_lines))
    return status


def cmd_in_image(args, cfg: RunConfig) -> int:
    U = _read_matrix(args.matrix)
    frame = frame_for(cfg, args.m, args.n)
    member, residual = is_optical_realization(U, frame)
    _emit(cfg, {"in_image": bool(member), "residual": residual},
          f"{'true' if member else 'false'} (residual {residual:.3e})")
    return EXIT_OK if member else EXIT_FORBIDDEN


def _demo_text(res) -> str:
    lines = [f"== {res.name} =="]
    for r in res.rows:
        val = r["value"]
        val = f"{val:.5f}" if isinstance(val, float) else str(val)
        exp = r["expected"]
        exp = f"{exp:.5f}" if isinstance(exp, float) else str(exp)
        tail = f"  [{r['detail']}]" if r["detail"] else ""
        lines.append(f"{r['status']}  {r['label']}: expected {exp}, got {val}{tail}")
    return "\n".join(lines)


def cmd_demo(args, cfg: RunConfig) -> int:
    names = list(demos.DEMOS) if args.name == "all" else [args.name]
    results = [demos.DEMOS[name]() for name in names]
    payload = results[0].to_json() if len(results) == 1 else {"demos": [r.to_json() for r in results]}
    _emit(cfg, payload, "\n\n".join(_demo_text(r) for r in results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum Fock-space dimension M")
    common.add_argument("--output", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--frame-cache", type=Path, default=None, metavar="DIR")

    parser = argparse.ArgumentParser(prog="fockgate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="number of Fock basis states")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("basis", parents=[common], help="list the Fock basis in canonical order")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("invariant", parents=[common], help="tangent/perpendicular invariants of a state")
    p.add_argument("state")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--closed", dest="mode", action="store_const", const="closed")
    g.add_argument("--projection", dest="mode", action="store_const", const="projection")
    g.add_argument("--both", dest="mode", action="store_const", const="both")
    p.set_defaults(func=cmd_invariant, mode=None)

    p = sub.add_parser("check", parents=[common], help="is state_in -> state_out ruled out by linear optics?")
    p.add_argument("input")
    p.add_argument("output_state", metavar="output")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lift", parents=[common], help="lift an m x m unitary to the n-photon space")
    p.add_argument("matrix", nargs="?", help="JSON matrix file")
    p.add_argument("n", type=int)
    p.add_argument("--random", type=int, metavar="MODES", help="use a seeded Haar-random S instead of a file")
    p.add_argument("--check-oracle", action="store_true")
    p.add_argument("--out", "-o", help="write U here instead of stdout")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("in-image", parents=[common], help="adjoint test for an M x M unitary")
    p.add_argument("matrix")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_in_image)

    p = sub.add_parser("demo", parents=[common], help="reproduce a worked example")
    p.add_argument("name", choices=list(demos.DEMOS) + ["all"])
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = RunConfig(args.tolerance, args.cap, args.output, args.seed, args.frame_cache)
        return args.func(args, cfg)
    except _INTERNAL_ERRORS as exc:
        print(f"fockgate: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, FockgateError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"fockgate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
