"""Fidelity-versus-entropy sweep over the (theta, phi) grid."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cloner
from .cloner import InputState
from .linalg import TOL_CHAIN, TOL_EXACT, is_hermitian, is_psd
from .nmr import NoiseMode, SpinSystem, prepare_pseudo_pure, run_cloning_pulse_level

CSV_HEADER = (
    "n", "m", "theta", "phi", "entropy", "fid_theory",
    "fid_gate_a", "fid_gate_b", "fid_pulse_a", "fid_pulse_b",
)
LEVELS = ("gate", "pulse", "both")


class InvariantViolation(RuntimeError):
    """An internal consistency check failed during a run."""


@dataclass(frozen=True)
class SweepConfig:
    theta_steps: int = 12
    phi_steps: int = 8
    level: str = "both"
    noise: NoiseMode = NoiseMode.OFF
    out: str | None = None

    def __post_init__(self):
        if self.theta_steps < 1 or self.phi_steps < 1:
            raise ValueError("theta_steps and phi_steps must be >= 1")
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}, got {self.level!r}")


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    theta: float
    phi: float
    entropy: float
    fid_theory: float
    fid_gate_a: float | None = None
    fid_gate_b: float | None = None
    fid_pulse_a: float | None = None
    fid_pulse_b: float | None = None

    def values(self) -> tuple:
        return tuple(getattr(self, k) for k in CSV_HEADER)


def grid(cfg: SweepConfig):
    for n in range(cfg.theta_steps + 1):
        for m in range(cfg.phi_steps):
            yield n, m, n * math.pi / cfg.theta_steps, m * 2 * math.pi / cfg.phi_steps


def _check(cond: bool, what: str):
    if not cond:
        raise InvariantViolation(what)


def check_clone(res: cloner.CloneResult, where: str, tol: float = TOL_EXACT, symmetric: bool = True):
    for name, rho in (("clone_a", res.clone_a), ("clone_b", res.clone_b)):
        _check(abs(np.trace(rho) - 1) <= tol, f"{where}: {name} trace != 1")
        _check(is_hermitian(rho, tol), f"{where}: {name} not Hermitian")
        _check(is_psd(rho), f"{where}: {name} not PSD")
    if symmetric:
        _check(np.max(np.abs(res.clone_a - res.clone_b)) <= tol, f"{where}: clones differ")
    for f in (res.fidelity_a, res.fidelity_b):
        _check(-tol <= f <= 1 + tol, f"{where}: fidelity {f} outside [0, 1]")


def run_point(
    theta: float,
    phi: float,
    level: str = "gate",
    noise: NoiseMode = NoiseMode.OFF,
    sys: SpinSystem | None = None,
    pp=None,
) -> dict:
    """Everything known about one input state, with invariant checks."""
    s = InputState(theta, phi)
    where = f"theta={s.theta:.6g}, phi={s.phi:.6g}"
    out = {
        "state": s,
        "entropy": cloner.entropy_theory(s.theta),
        "fid_theory": cloner.fidelity_theory(s.theta),
    }
    gate = None
    if level in ("gate", "both"):
        gate = cloner.clone(s)
        check_clone(gate, where)
        closed = cloner.clone_closed_form(s)
        _check(np.max(np.abs(gate.clone_a - closed)) <= TOL_EXACT, f"{where}: closed form mismatch")
        _check(abs(gate.fidelity_a - out["fid_theory"]) <= TOL_EXACT, f"{where}: fidelity law mismatch")
        out["gate"] = gate
    if level in ("pulse", "both"):
        pulse = run_cloning_pulse_level(s, sys, noise, pp)
        check_clone(pulse, where, TOL_CHAIN, symmetric=noise is NoiseMode.OFF)
        if noise is NoiseMode.OFF:
            for f in (pulse.fidelity_a, pulse.fidelity_b):
                _check(abs(f - out["fid_theory"]) <= TOL_CHAIN, f"{where}: pulse level disagrees")
        out["pulse"] = pulse
    return out


def sweep(cfg: SweepConfig, sys: SpinSystem | None = None) -> list[SweepRow]:
    sys = sys or SpinSystem()
    pp = prepare_pseudo_pure(sys) if cfg.level in ("pulse", "both") else None
    rows = []
    for n, m, theta, phi in grid(cfg):
        r = run_point(theta, phi, cfg.level, cfg.noise, sys, pp)
        gate, pulse = r.get("gate"), r.get("pulse")
        rows.append(
            SweepRow(
                n, m, theta, phi, r["entropy"], r["fid_theory"],
                gate.fidelity_a if gate else None,
                gate.fidelity_b if gate else None,
                pulse.fidelity_a if pulse else None,
                pulse.fidelity_b if pulse else None,
            )
        )
    for row in rows:
        _check(0.0 <= row.entropy <= 1.0 + TOL_EXACT, f"row {row.n},{row.m}: entropy out of range")
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x + 0.0:.12g}"


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row.values()) + "\n")
    return buf.getvalue()


def summarize(rows: list[SweepRow]) -> dict:
    fids = [f for r in rows for f in (r.fid_gate_a, r.fid_gate_b, r.fid_pulse_a, r.fid_pulse_b) if f is not None]
    gate_res = [abs(r.fid_gate_a - r.fid_theory) for r in rows if r.fid_gate_a is not None]
    pulse_res = [
        abs(f - r.fid_theory) for r in rows for f in (r.fid_pulse_a, r.fid_pulse_b) if f is not None
    ]
    return {
        "rows": len(rows),
        "min_fidelity": min(fids) if fids else None,
        "max_fidelity": max(fids) if fids else None,
        "max_gate_residual": max(gate_res) if gate_res else None,
        "max_pulse_residual": max(pulse_res) if pulse_res else None,
    }


def load_config(path: str | Path) -> dict[str, float]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            values[key] = float(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: {key} needs a number, got {value!r}") from None
    return values
