"""Small fixed-size complex linear algebra for one and two qubits.

Matrices are plain ``numpy`` arrays of dtype ``complex128``: shape (2, 2)
for a single spin and (4, 4) for the pair.  The two-qubit basis is ordered
|00>, |01>, |10>, |11> with qubit ``a`` as the left (most significant)
label, so ``kron(A, B)`` acts with ``A`` on qubit ``a`` and ``B`` on ``b``.

Only closed-form exponentials are provided: single-spin rotations and the
diagonal ZZ coupling propagator.
"""

from __future__ import annotations

import numpy as np

BASIS_LABELS = ("00", "01", "10", "11")

TOL_EXACT = 1e-12
TOL_CHAIN = 1e-9

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

AXES = ("x", "y", "z", "-x", "-y", "-z")
SUBSYSTEMS = ("a", "b")


class LinalgError(ValueError):
    """Raised when an input violates a precondition of a linalg routine."""


def basis_index(label: str) -> int:
    """Map a basis label such as ``"10"`` to its row index."""
    try:
        return BASIS_LABELS.index(label)
    except ValueError:
        raise LinalgError(f"unknown basis label {label!r}") from None


def basis_label(index: int) -> str:
    return BASIS_LABELS[index]


def ket(label: str) -> np.ndarray:
    """Computational basis vector for a one- or two-qubit label."""
    if label in ("0", "1"):
        v = np.zeros(2, dtype=complex)
        v[int(label)] = 1.0
        return v
    v = np.zeros(4, dtype=complex)
    v[basis_index(label)] = 1.0
    return v


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Tensor product with ``A`` on qubit a and ``B`` on qubit b."""
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def on_spin(spin: str, op: np.ndarray) -> np.ndarray:
    """Embed a single-spin operator into the two-spin space."""
    if spin == "a":
        return kron(op, SIGMA_0)
    if spin == "b":
        return kron(SIGMA_0, op)
    raise LinalgError(f"unknown spin {spin!r}")


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Reduced state of one qubit of a unit-trace 4x4 matrix.

    Parameters
    ----------
    rho : ndarray, shape (4, 4)
        Joint two-qubit matrix with unit trace.
    keep : {"a", "b"}
        The subsystem to keep.

    Returns
    -------
    ndarray, shape (2, 2)
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise LinalgError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if abs(np.trace(rho) - 1.0) > TOL_EXACT:
        raise LinalgError(f"partial_trace needs unit trace, got {np.trace(rho)}")
    t = rho.reshape(2, 2, 2, 2)  # t[i, k, j, l] = rho[2i+k, 2j+l]
    if keep == "a":
        return np.einsum("ikjk->ij", t)
    if keep == "b":
        return np.einsum("kikj->ij", t)
    raise LinalgError(f"keep must be 'a' or 'b', got {keep!r}")


def pauli_for_axis(axis: str) -> np.ndarray:
    """Pauli matrix for a signed axis label; ``-u`` gives ``-sigma_u``."""
    if axis not in AXES:
        raise LinalgError(f"unknown axis {axis!r}")
    if axis.startswith("-"):
        return -PAULI[axis[1:]]
    return PAULI[axis]


def rotation(axis: str, angle: float) -> np.ndarray:
    """Single-spin rotation ``exp(-i angle sigma_axis / 2)`` in closed form."""
    if not np.isfinite(angle):
        raise LinalgError(f"rotation angle must be finite, got {angle}")
    s = pauli_for_axis(axis)
    half = 0.5 * angle
    return np.cos(half) * SIGMA_0 - 1j * np.sin(half) * s


def zz_evolution(tau: float, J: float) -> np.ndarray:
    """Free J-coupling propagator ``exp(-i (pi tau J / 2) sz sz)``.

    The Zeeman terms are taken to be removed by the rotating frame, so only
    the coupling term evolves.
    """
    if tau < 0:
        raise LinalgError(f"delay must be non-negative, got {tau}")
    if J <= 0:
        raise LinalgError(f"J coupling must be positive, got {J}")
    alpha = np.pi * tau * J / 2.0
    parity = np.array([1.0, -1.0, -1.0, 1.0])
    return np.diag(np.exp(-1j * alpha * parity))


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(M))


def is_unitary(U: np.ndarray, tol: float = TOL_EXACT) -> bool:
    U = np.asarray(U)
    n = U.shape[0]
    return bool(np.max(np.abs(dagger(U) @ U - np.eye(n))) <= tol)


def is_hermitian(M: np.ndarray, tol: float = TOL_EXACT) -> bool:
    M = np.asarray(M)
    return bool(np.max(np.abs(M - dagger(M))) <= tol)


def is_psd(M: np.ndarray, tol: float = 1e-10) -> bool:
    """True if ``M`` is Hermitian with no eigenvalue below ``-tol``."""
    M = np.asarray(M)
    if not is_hermitian(M, max(tol, TOL_EXACT)):
        return False
    herm = 0.5 * (M + dagger(M))
    return bool(np.min(np.linalg.eigvalsh(herm)) >= -tol)


def global_phase_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Frobenius distance between two unitaries minimised over a global phase.

    Mathematically equal to ``sqrt(2d - 2|Tr(U^dag V)|)``.  That form loses
    half the significant digits near zero, so the distance is evaluated
    directly at the optimal phase ``arg Tr(V^dag U)`` instead.
    """
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise LinalgError(f"shape mismatch {U.shape} vs {V.shape}")
    if not (is_unitary(U, TOL_CHAIN) and is_unitary(V, TOL_CHAIN)):
        raise LinalgError("global_phase_distance needs unitary inputs")
    overlap = np.trace(dagger(V) @ U)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(U - phase * V))
