"""Optimal 1 -> 2 cloner for qubits with a known polar angle.

The machine uses one of two fixed two-qubit unitaries depending on which
hemisphere of the Bloch sphere the input lies in.  Qubit ``a`` carries the
input, qubit ``b`` starts blank in |0>, and both come out as identical
imperfect copies whose fidelity depends only on the polar angle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    PAULI,
    SIGMA_0,
    TOL_EXACT,
    is_unitary,
    ket,
    partial_trace,
)

TWO_PI = 2.0 * math.pi
UQCM_FIDELITY = 5.0 / 6.0
QPCCM_FIDELITY = 0.5 + math.sqrt(2.0) / 4.0


class Hemisphere(enum.Enum):
    NORTH = "north"
    SOUTH = "south"


def classify(theta: float) -> Hemisphere:
    """North for theta <= pi/2 (the equator goes North), South otherwise."""
    return Hemisphere.NORTH if theta <= math.pi / 2 else Hemisphere.SOUTH


def _check_theta(theta: float) -> float:
    if not math.isfinite(theta) or theta < -TOL_EXACT or theta > math.pi + TOL_EXACT:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    return min(max(theta, 0.0), math.pi)


@dataclass(frozen=True)
class InputState:
    """Pure qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.

    ``theta`` is clamped into [0, pi] (with 1e-12 slack) and ``phi`` is
    reduced modulo 2 pi.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", _check_theta(float(self.theta)))
        phi = float(self.phi)
        if not math.isfinite(phi):
            raise ValueError(f"phi must be finite, got {phi!r}")
        phi = phi % TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def hemisphere(self) -> Hemisphere:
        return classify(self.theta)


@dataclass(frozen=True)
class BlochVector:
    rx: float
    ry: float
    rz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def dot(self, other: "BlochVector") -> float:
        return float(self.as_array() @ other.as_array())

    def density(self) -> np.ndarray:
        """The single-qubit matrix (I + r.sigma) / 2."""
        return 0.5 * (
            SIGMA_0 + self.rx * PAULI["x"] + self.ry * PAULI["y"] + self.rz * PAULI["z"]
        )


@dataclass(frozen=True)
class CloneResult:
    joint: np.ndarray
    clone_a: np.ndarray
    clone_b: np.ndarray
    fidelity_a: float
    fidelity_b: float


def input_ket(s: InputState) -> np.ndarray:
    return np.array(
        [math.cos(s.theta / 2), np.exp(1j * s.phi) * math.sin(s.theta / 2)],
        dtype=complex,
    )


def input_bloch(s: InputState) -> BlochVector:
    st = math.sin(s.theta)
    return BlochVector(st * math.cos(s.phi), st * math.sin(s.phi), math.cos(s.theta))


def _outer(i: str, j: str) -> np.ndarray:
    return np.outer(ket(i), ket(j).conj())


def build_cloner(h: Hemisphere) -> np.ndarray:
    """The cloning unitary for the given hemisphere, term by term."""
    r = 1.0 / math.sqrt(2.0)
    if h is Hemisphere.NORTH:
        U = (
            _outer("00", "00")
            + _outer("11", "11")
            + r * (_outer("01", "01") + _outer("10", "10") + _outer("01", "10") - _outer("10", "01"))
        )
    elif h is Hemisphere.SOUTH:
        U = (
            _outer("00", "01")
            + _outer("11", "10")
            + r * (_outer("01", "00") + _outer("10", "00") + _outer("10", "11") - _outer("01", "11"))
        )
    else:
        raise ValueError(f"unknown hemisphere {h!r}")
    assert is_unitary(U, TOL_EXACT)
    return U


def clone_closed_form(s: InputState, hemisphere: Hemisphere | None = None) -> np.ndarray:
    """Analytic single-copy density matrix for the given input."""
    h = hemisphere or s.hemisphere
    c2 = math.cos(s.theta / 2) ** 2
    s2 = math.sin(s.theta / 2) ** 2
    off = math.sin(s.theta) / (2.0 * math.sqrt(2.0))
    lower = np.exp(1j * s.phi) * off
    if h is Hemisphere.NORTH:
        d0, d1 = c2 + 0.5 * s2, 0.5 * s2
    else:
        d0, d1 = 0.5 * c2, 0.5 * c2 + s2
    return np.array([[d0, np.conj(lower)], [lower, d1]], dtype=complex)


def overlap_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """<psi| rho |psi> for a pure reference state."""
    return float(np.real(np.conj(psi) @ rho @ psi))


def clone(s: InputState, hemisphere: Hemisphere | None = None) -> CloneResult:
    """Run the gate-level cloner on ``s`` (|psi> on a, |0> on b).

    ``hemisphere`` overrides the automatic choice; it exists so the two
    circuits can be compared on the equator.
    """
    h = hemisphere or s.hemisphere
    psi = input_ket(s)
    out = build_cloner(h) @ np.kron(psi, ket("0"))
    joint = np.outer(out, out.conj())
    rho_a = partial_trace(joint, "a")
    rho_b = partial_trace(joint, "b")
    return CloneResult(
        joint=joint,
        clone_a=rho_a,
        clone_b=rho_b,
        fidelity_a=overlap_fidelity(psi, rho_a),
        fidelity_b=overlap_fidelity(psi, rho_b),
    )


def fidelity_theory(theta: float) -> float:
    """Optimal cloning fidelity as a function of the polar angle alone."""
    theta = _check_theta(theta)
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    cross = math.sqrt(2.0) / 4.0 * math.sin(theta) ** 2
    if classify(theta) is Hemisphere.NORTH:
        return 0.5 * s**2 + c**4 + cross
    return 0.5 * c**2 + s**4 + cross


def entropy_theory(theta: float) -> float:
    """Shannon entropy (bits) of the phase-averaged input state."""
    theta = _check_theta(theta)
    total = 0.0
    for p in (math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2):
        if p > 0.0:
            total -= p * math.log2(p)
    return total


def bloch_of(rho: np.ndarray) -> BlochVector:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if abs(np.trace(rho) - 1.0) > 1e-9 or np.max(np.abs(rho - rho.conj().T)) > 1e-9:
        raise ValueError("bloch_of needs a Hermitian unit-trace matrix")
    return BlochVector(*(float(np.real(np.trace(rho @ PAULI[mu]))) for mu in "xyz"))


def bloch_fidelity(r0: BlochVector, r: BlochVector) -> float:
    """(1 + r0.r) / 2, valid when ``r0`` describes a pure state."""
    if abs(r0.norm - 1.0) > 1e-9:
        raise ValueError(f"reference Bloch vector must have unit norm, got {r0.norm}")
    return 0.5 * (1.0 + r0.dot(r))


def baseline_constants() -> dict[str, float]:
    """Fidelities of the universal and phase-covariant cloners."""
    return {"uqcm": UQCM_FIDELITY, "qpccm": QPCCM_FIDELITY}
