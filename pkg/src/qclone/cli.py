"""Command-line interface: ``qclone clone|sweep|compile|prep``.

Exit codes: 0 success, 1 pulse-program parse error, 2 verification or
invariant failure, 3 invalid arguments (including unreadable files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cloner
from .cloner import InputState
from .experiment import (
    InvariantViolation,
    SweepConfig,
    load_config,
    rows_to_csv,
    run_point,
    summarize,
    sweep,
)
from .linalg import TOL_CHAIN, global_phase_distance
from .nmr import (
    CrusherNotUnitary,
    NoiseMode,
    PrepVerificationFailure,
    SpinSystem,
    compile_unitary,
    prepare_pseudo_pure,
)
from .pulses import BUILTIN_NAMES, ParseError, builtin, parse, parse_angle

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VERIFY = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def angle_arg(text: str) -> float:
    try:
        return parse_angle(text).radians
    except ParseError as exc:
        raise argparse.ArgumentTypeError(f"bad angle {text!r}: {exc.reason}") from None


def _spin_system(path: str | None) -> SpinSystem:
    if path is None:
        return SpinSystem()
    try:
        return SpinSystem.from_mapping(load_config(path))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"bad config {path}: {exc}") from None


def _fmt_matrix(m: np.ndarray, digits: int = 6) -> str:
    def cell(z):
        z = complex(z)
        re = round(z.real, digits) + 0.0
        im = round(z.imag, digits) + 0.0
        return f"{re:+.{digits}f}{im:+.{digits}f}j"

    return "\n".join("  [" + "  ".join(cell(z) for z in row) + "]" for row in m)


def _bloch_list(r) -> list[float]:
    return [r.rx, r.ry, r.rz]


# --- subcommands ---------------------------------------------------------------


def cmd_clone(args) -> int:
    system = _spin_system(args.config)
    try:
        s = InputState(args.theta, args.phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    point = run_point(s.theta, s.phi, args.level, NoiseMode(args.noise), system)
    base = cloner.baseline_constants()
    report = {
        "theta": s.theta,
        "phi": s.phi,
        "hemisphere": s.hemisphere.value,
        "entropy": point["entropy"],
        "fid_theory": point["fid_theory"],
        "baselines": base,
    }
    for level in ("gate", "pulse"):
        res = point.get(level)
        if res is None:
            continue
        report[level] = {
            "fidelity_a": res.fidelity_a,
            "fidelity_b": res.fidelity_b,
            "bloch_a": _bloch_list(cloner.bloch_of(res.clone_a)),
            "bloch_b": _bloch_list(cloner.bloch_of(res.clone_b)),
            "clone_a": [[[z.real, z.imag] for z in row] for row in res.clone_a.tolist()],
            "clone_b": [[[z.real, z.imag] for z in row] for row in res.clone_b.tolist()],
        }
    if args.json:
        print(json.dumps(report, indent=2))
        return EXIT_OK

    print(f"input      theta={s.theta:.12g} phi={s.phi:.12g} ({s.hemisphere.value}ern hemisphere)")
    print(f"entropy    {point['entropy']:.12g}")
    print(f"fidelity   {point['fid_theory']:.12g} (theory)")
    for level in ("gate", "pulse"):
        res = point.get(level)
        if res is None:
            continue
        print(f"[{level} level]")
        for label, rho, fid in (("a", res.clone_a, res.fidelity_a), ("b", res.clone_b, res.fidelity_b)):
            r = cloner.bloch_of(rho)
            print(f"clone {label}    fidelity={fid:.12g} bloch=({r.rx:.9f}, {r.ry:.9f}, {r.rz:.9f})")
            print(_fmt_matrix(rho))
    print(f"baselines  uqcm={base['uqcm']:.12g} qpccm={base['qpccm']:.12g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    system = _spin_system(args.config)
    try:
        cfg = SweepConfig(args.theta_steps, args.phi_steps, args.level, NoiseMode(args.noise), args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = sweep(cfg, system)
    text = rows_to_csv(rows)
    if args.out == "-":
        sys.stdout.write(text)
        log = sys.stderr
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
        log = sys.stdout
    summary = summarize(rows)
    parts = [f"rows={summary['rows']}"]
    for key in ("min_fidelity", "max_fidelity", "max_gate_residual", "max_pulse_residual"):
        if summary[key] is not None:
            parts.append(f"{key}={summary[key]:.6g}")
    print("sweep " + " ".join(parts), file=log)
    return EXIT_OK


def _load_program(source: str):
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in BUILTIN_NAMES:
            raise UsageError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
        return builtin(name)
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    try:
        return parse(text, name=source)
    except ParseError as exc:
        exc.source = source
        raise


def cmd_compile(args) -> int:
    system = _spin_system(args.config)
    program = _load_program(args.source)
    if args.check and args.frame == "auto":
        program = builtin(f"frame_{args.check}") + program
    try:
        U = compile_unitary(program, system)
    except CrusherNotUnitary as exc:
        raise UsageError(f"{args.source}: {exc}") from None
    print(f"unitary of {args.source} ({len(program)} events):")
    print(_fmt_matrix(U))
    if not args.check:
        return EXIT_OK
    target = cloner.build_cloner(cloner.Hemisphere(args.check))
    dist = global_phase_distance(U, target)
    passed = dist < TOL_CHAIN
    print(
        f"verify target={args.check} frame={args.frame} distance={dist:.3e} "
        f"tolerance={TOL_CHAIN:.0e} {'PASS' if passed else 'FAIL'}"
    )
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_prep(args) -> int:
    system = _spin_system(args.config)
    try:
        pp = prepare_pseudo_pure(system)
    except PrepVerificationFailure as exc:
        print(f"prep FAIL: {exc}")
        return EXIT_VERIFY
    pops = pp.populations
    ratios = pops / abs(pops[1])
    print("deviation populations " + " ".join(f"{p:+.9f}" for p in pops))
    print("relative to |01>      " + " ".join(f"{p:+.6f}" for p in ratios))
    print(f"epsilon {pp.epsilon:.6e}")
    print("prep PASS")
    return EXIT_OK


# --- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qclone", description="State-dependent quantum cloning simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="key=value file overriding spin-system constants")

    def level_noise(p, default_level):
        p.add_argument("--level", choices=("gate", "pulse", "both"), default=default_level)
        p.add_argument("--noise", choices=[m.value for m in NoiseMode], default="off")

    p = sub.add_parser("clone", help="clone a single input state")
    p.add_argument("--theta", type=angle_arg, required=True, help="polar angle, e.g. pi/2 or 1.2")
    p.add_argument("--phi", type=angle_arg, default=0.0, help="azimuthal angle")
    level_noise(p, "gate")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    common(p)
    p.set_defaults(func=cmd_clone)

    p = sub.add_parser("sweep", help="fidelity/entropy sweep over the theta-phi grid")
    p.add_argument("--theta-steps", type=int, default=12)
    p.add_argument("--phi-steps", type=int, default=8)
    level_noise(p, "both")
    p.add_argument("--out", default="sweep.csv", help="CSV path, or - for stdout")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compile", help="compile a pulse program to a unitary")
    p.add_argument("source", help="pulse-program file or builtin:NAME")
    p.add_argument("--check", choices=("north", "south"))
    p.add_argument("--frame", choices=("auto", "none"), default="auto")
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("prep", help="verify pseudo-pure state preparation")
    common(p)
    p.set_defaults(func=cmd_prep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qclone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        source = getattr(exc, "source", "<input>")
        print(f"qclone: {source}:{exc.line}:{exc.column}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvariantViolation, PrepVerificationFailure) as exc:
        print(f"qclone: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
