"""Two-spin NMR semantics for pulse programs.

Pulses are instantaneous single-spin rotations.  Delays evolve only the
scalar coupling term, since chemical shifts are removed by the doubly
rotating frame.  The gradient crusher is modelled as its ensemble average:
every density-matrix element whose total coherence order is non-zero is
destroyed, zero-quantum terms survive.

The default spin system is 13C (spin a) / 1H (spin b) in chloroform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import constants

from .cloner import (
    BlochVector,
    CloneResult,
    Hemisphere,
    InputState,
    bloch_fidelity,
    input_bloch,
)
from .linalg import (
    PAULI,
    SIGMA_0,
    TOL_CHAIN,
    TOL_EXACT,
    dagger,
    is_hermitian,
    is_psd,
    ket,
    on_spin,
    rotation,
    zz_evolution,
)
from .pulses import Angle, Crusher, Delay, PulseProgram, RfPulse, builtin


class CrusherNotUnitary(ValueError):
    """A program containing Gz was given where a unitary is required."""


class PrepVerificationFailure(RuntimeError):
    """The preparation sequence did not produce a pseudo-pure |00> state."""


class NoiseMode(enum.Enum):
    OFF = "off"
    PHENOMENOLOGICAL = "phenomenological"


@dataclass(frozen=True)
class SpinSystem:
    """Physical constants of the spin pair.

    Frequencies in Hz, times in seconds, temperature in kelvin.  When
    ``polarization_ratio`` is not given it follows ``omega_b / omega_a``.
    """

    omega_a: float = 100e6
    omega_b: float = 400e6
    J: float = 214.5
    t1_a: float = 17.2
    t2_a: float = 0.35
    t1_b: float = 4.8
    t2_b: float = 3.3
    polarization_ratio: float | None = None
    temperature: float = 298.15

    def __post_init__(self):
        if self.polarization_ratio is None:
            object.__setattr__(self, "polarization_ratio", self.omega_b / self.omega_a)
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"{f.name} must be positive, got {value}")
        for spin in ("a", "b"):
            t1, t2 = self.t1(spin), self.t2(spin)
            if t2 > 2 * t1:
                raise ValueError(f"spin {spin}: T2={t2} exceeds 2*T1={2 * t1}")

    def t1(self, spin: str) -> float:
        return self.t1_a if spin == "a" else self.t1_b

    def t2(self, spin: str) -> float:
        return self.t2_a if spin == "a" else self.t2_b

    @classmethod
    def from_mapping(cls, values: dict[str, float]) -> "SpinSystem":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown spin-system keys: {', '.join(sorted(unknown))}")
        return cls(**values)


@dataclass(frozen=True)
class TwoQubitDensity:
    m: np.ndarray

    def validate(self, tol: float = TOL_EXACT) -> "TwoQubitDensity":
        if self.m.shape != (4, 4):
            raise ValueError(f"density must be 4x4, got {self.m.shape}")
        if not is_hermitian(self.m, tol):
            raise ValueError("density is not Hermitian")
        if abs(np.trace(self.m) - 1.0) > tol:
            raise ValueError(f"density trace is {np.trace(self.m)}, not 1")
        if not is_psd(self.m, 1e-10):
            raise ValueError("density has a negative eigenvalue")
        return self


@dataclass(frozen=True)
class DeviationState:
    """Traceless part of a high-temperature ensemble state."""

    m: np.ndarray

    def validate(self, tol: float = TOL_EXACT) -> "DeviationState":
        if abs(np.trace(self.m)) > tol or not is_hermitian(self.m, tol):
            raise ValueError("deviation must be traceless and Hermitian")
        return self


# --- unitaries -------------------------------------------------------------


def event_unitary(ev, sys: SpinSystem) -> np.ndarray:
    if isinstance(ev, RfPulse):
        return on_spin(ev.spin, rotation(ev.axis, ev.angle.radians))
    if isinstance(ev, Delay):
        return zz_evolution(ev.duration(sys.J), sys.J)
    raise CrusherNotUnitary("Gz is not unitary; use apply_channel")


def compile_unitary(p: PulseProgram, sys: SpinSystem | None = None) -> np.ndarray:
    """Product of the event propagators, first event rightmost."""
    sys = sys or SpinSystem()
    if p.has_crusher:
        raise CrusherNotUnitary("program contains Gz; it has no unitary form")
    U = np.eye(4, dtype=complex)
    for ev in p.events:
        U = event_unitary(ev, sys) @ U
    return U


# --- channels --------------------------------------------------------------

_MZ = np.array([1.0, 0.0, 0.0, -1.0])  # total magnetic quantum number per basis state
_CRUSH_MASK = (_MZ[:, None] == _MZ[None, :]).astype(float)


def coherence_order(i: int, j: int) -> int:
    return int(_MZ[i] - _MZ[j])


def crusher(rho: np.ndarray) -> np.ndarray:
    """Keep populations and zero-quantum coherences, zero the rest."""
    return np.asarray(rho, dtype=complex) * _CRUSH_MASK


_PAULI4 = (SIGMA_0, PAULI["x"], PAULI["y"], PAULI["z"])
_PAULI_PAIRS = [[np.kron(s, t) for t in _PAULI4] for s in _PAULI4]


def _damping_factors(sys: SpinSystem, spin: str, tau: float) -> np.ndarray:
    t2 = math.exp(-tau / sys.t2(spin))
    t1 = math.exp(-tau / sys.t1(spin))
    return np.array([1.0, t2, t2, t1])


def relaxation_channel(rho: np.ndarray, tau: float, sys: SpinSystem) -> np.ndarray:
    """Pure damping for ``tau`` seconds, without the coupling evolution.

    Per spin this is the unital map diag(1, e^-t/T2, e^-t/T2, e^-t/T1) on
    the Pauli basis, which is completely positive whenever T2 <= 2 T1.
    """
    la = _damping_factors(sys, "a", tau)
    lb = _damping_factors(sys, "b", tau)
    out = np.zeros((4, 4), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            P = _PAULI_PAIRS[mu][nu]
            coeff = np.trace(P @ rho) / 4.0
            out += la[mu] * lb[nu] * coeff * P
    return out


def relax_delay(rho: np.ndarray, tau: float, sys: SpinSystem) -> np.ndarray:
    """Free evolution with phenomenological relaxation.

    Half the damping is applied before the coupling propagator and half
    after.  Transverse components of spin k shrink by exp(-tau/T2_k),
    longitudinal ones by exp(-tau/T1_k), towards the identity.
    """
    if tau < 0:
        raise ValueError(f"delay must be non-negative, got {tau}")
    U = zz_evolution(tau, sys.J)
    half = relaxation_channel(np.asarray(rho, dtype=complex), tau / 2, sys)
    return relaxation_channel(U @ half @ dagger(U), tau / 2, sys)


def apply_channel(p: PulseProgram, state, sys: SpinSystem | None = None,
                  noise: NoiseMode = NoiseMode.OFF):
    """Run ``p`` on a density or deviation matrix and return the same kind."""
    sys = sys or SpinSystem()
    kind = type(state) if isinstance(state, (TwoQubitDensity, DeviationState)) else None
    rho = np.asarray(state.m if kind else state, dtype=complex)
    for ev in p.events:
        if isinstance(ev, Crusher):
            rho = crusher(rho)
        elif isinstance(ev, Delay) and noise is NoiseMode.PHENOMENOLOGICAL:
            rho = relax_delay(rho, ev.duration(sys.J), sys)
        else:
            U = event_unitary(ev, sys)
            rho = U @ rho @ dagger(U)
    return kind(rho) if kind else rho


# --- pseudo-pure preparation -------------------------------------------------

_PP_TARGET = np.diag([0.75, -0.25, -0.25, -0.25]).astype(complex)  # |00><00| - I/4


@dataclass(frozen=True)
class PseudoPure:
    rho_pp: TwoQubitDensity
    epsilon: float
    deviation: DeviationState
    scale: float

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.deviation.m))


def thermal_deviation(sys: SpinSystem) -> DeviationState:
    """Deviation sz_a/2 + ratio * sz_b/2, in units of h nu_a / (4 k T)."""
    sz = PAULI["z"]
    return DeviationState(0.5 * on_spin("a", sz) + sys.polarization_ratio * 0.5 * on_spin("b", sz))


def thermal_scale(sys: SpinSystem) -> float:
    """High-temperature prefactor h nu_a / (4 k T) of the deviation."""
    return constants.h * sys.omega_a / (4.0 * constants.k * sys.temperature)


def prepare_pseudo_pure(sys: SpinSystem | None = None) -> PseudoPure:
    """Run the preparation sequence on the thermal state and check the result.

    Raises
    ------
    PrepVerificationFailure
        If the resulting deviation is not a positive multiple of
        |00><00| - I/4 to within 1e-9.
    """
    sys = sys or SpinSystem()
    dev = apply_channel(builtin("prep_pp"), thermal_deviation(sys), sys, NoiseMode.OFF)
    m = dev.m
    c = float(np.real(np.trace(m @ _PP_TARGET)) / 0.75)
    residual = float(np.max(np.abs(m - c * _PP_TARGET)))
    if c <= 0 or residual > TOL_CHAIN:
        pops = np.real(np.diag(m))
        raise PrepVerificationFailure(
            f"deviation populations {np.round(pops, 6).tolist()} are not proportional "
            f"to (3, -1, -1, -1) (residual {residual:.3g})"
        )
    eps = c * thermal_scale(sys)
    rho = (1 - eps) * np.eye(4) / 4 + eps * np.outer(ket("00"), ket("00"))
    return PseudoPure(TwoQubitDensity(rho.astype(complex)), eps, dev, c)


# --- readout ---------------------------------------------------------------


def readout_bloch(rho: np.ndarray | TwoQubitDensity, spin: str) -> BlochVector:
    """Expectation values of sigma_x, sigma_y, sigma_z on one spin."""
    m = rho.m if isinstance(rho, TwoQubitDensity) else np.asarray(rho)
    return BlochVector(
        *(float(np.real(np.trace(m @ on_spin(spin, PAULI[mu])))) for mu in "xyz")
    )


def readout_z_via_pulse(rho: np.ndarray | TwoQubitDensity, spin: str) -> float:
    """z component measured the spectrometer way: Gz, then a y pulse of pi/2,
    then the x signal of the same spin."""
    m = rho.m if isinstance(rho, TwoQubitDensity) else np.asarray(rho)
    m = crusher(m)
    U = on_spin(spin, rotation("y", math.pi / 2))
    m = U @ m @ dagger(U)
    return float(np.real(np.trace(m @ on_spin(spin, PAULI["x"]))))


# --- end-to-end pulse-level cloning -------------------------------------------


def encoding_program(s: InputState) -> PulseProgram:
    """Rotate spin a from |0> to the input state: R_y(theta), then R_z(phi)."""
    return PulseProgram(
        (
            RfPulse("a", "y", Angle.rad(s.theta)),
            RfPulse("a", "z", Angle.rad(s.phi)),
        ),
        name="encode",
    )


def cloning_program(h: Hemisphere) -> PulseProgram:
    """Frame correction followed by the hemisphere sequence."""
    if h is Hemisphere.NORTH:
        return builtin("frame_north") + builtin("north")
    return builtin("frame_south") + builtin("south")


def run_cloning_pulse_level(
    s: InputState,
    sys: SpinSystem | None = None,
    noise: NoiseMode = NoiseMode.OFF,
    pp: PseudoPure | None = None,
) -> CloneResult:
    """Simulate the full NMR experiment for one input state.

    Bloch vectors are read from the pseudo-pure ensemble and divided by its
    polarisation ``epsilon``, the normalisation a reference |00> spectrum
    provides.
    """
    sys = sys or SpinSystem()
    pp = pp or prepare_pseudo_pure(sys)
    rho = apply_channel(encoding_program(s), pp.rho_pp, sys, NoiseMode.OFF)
    rho = apply_channel(cloning_program(s.hemisphere), rho, sys, noise)
    r0 = input_bloch(s)
    clones, fids = [], []
    for spin in ("a", "b"):
        raw = readout_bloch(rho, spin)
        r = BlochVector(raw.rx / pp.epsilon, raw.ry / pp.epsilon, raw.rz / pp.epsilon)
        clones.append(r.density())
        fids.append(bloch_fidelity(r0, r))
    return CloneResult(rho.m, clones[0], clones[1], fids[0], fids[1])
