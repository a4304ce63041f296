"""NumPy reference implementation of the statevector kernels.

Semantically identical to the compiled core (``qpack.backends._core``); used
as the fallback backend and as the equivalence oracle in the backend tests.
All kernels mutate ``state`` (a contiguous complex128 vector of length 2**n)
in place. Qubit ``q`` corresponds to bit ``q`` of the amplitude index.
"""

import numpy as np


def _pairs_view(state: np.ndarray, n_qubits: int, q: int) -> np.ndarray:
    """View of the state grouping amplitudes into (high, 2, low) blocks."""
    return state.reshape(1 << (n_qubits - q - 1), 2, 1 << q)


def apply_phase(state: np.ndarray, diag: np.ndarray, alpha: float) -> None:
    """state[k] *= exp(-i * alpha * diag[k])."""
    state *= np.exp(-1j * alpha * diag)


def apply_phase_table(state: np.ndarray, codes: np.ndarray, table: np.ndarray) -> None:
    """state[k] *= table[codes[k]] (phases precomputed per unique energy)."""
    state *= table[codes]


def apply_rx_all(state: np.ndarray, n_qubits: int, beta: float) -> None:
    """Apply exp(i * beta * X) to every qubit (the mixer layer for -sum X)."""
    c = np.cos(beta)
    s = 1j * np.sin(beta)
    for q in range(n_qubits):
        v = _pairs_view(state, n_qubits, q)
        a0 = v[:, 0, :].copy()
        v[:, 0, :] *= c
        v[:, 0, :] += s * v[:, 1, :]
        v[:, 1, :] *= c
        v[:, 1, :] += s * a0


def apply_1q(state: np.ndarray, n_qubits: int, q: int, matrix: np.ndarray) -> None:
    """Apply a 2x2 unitary (row-major [[m00, m01], [m10, m11]]) to qubit q."""
    m00, m01 = matrix[0, 0], matrix[0, 1]
    m10, m11 = matrix[1, 0], matrix[1, 1]
    v = _pairs_view(state, n_qubits, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def apply_cz(state: np.ndarray, n_qubits: int, q1: int, q2: int) -> None:
    """Negate amplitudes with both control bits set."""
    hi, lo = (q1, q2) if q1 > q2 else (q2, q1)
    v = state.reshape(
        1 << (n_qubits - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo
    )
    v[:, 1, :, 1, :] *= -1.0


def prob_one(state: np.ndarray, n_qubits: int, q: int) -> float:
    """Probability that qubit q measures 1."""
    v = _pairs_view(state, n_qubits, q)
    block = v[:, 1, :]
    return float(np.sum(block.real**2 + block.imag**2))
