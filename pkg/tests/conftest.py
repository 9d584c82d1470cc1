"""Shared fixtures and an independent dense oracle.

The oracle builds matrices by acting on computational basis states one
column at a time, sharing no code with the library's kron-based path, so
agreement between the two is meaningful.
"""

import numpy as np
import pytest

from gadgetlab import PauliSum


def oracle_matrix(h: PauliSum, n_qubits: int) -> np.ndarray:
    """Dense matrix of the actual operator, built column by column.

    Qubit 0 is the least significant bit of the basis index.  For the
    anti-Hermitian stored form the final matrix is 1j times the stored
    Hermitian combination.
    """
    dim = 2**n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        out[col, col] += h.offset
        for term in h.terms:
            row = col
            amp = complex(term.coefficient)
            for q, letter in term.string.letters:
                bit = (col >> q) & 1
                if letter == "Z":
                    amp *= 1.0 - 2.0 * bit
                elif letter == "X":
                    row ^= 1 << q
                else:  # Y
                    row ^= 1 << q
                    amp *= 1j if bit == 0 else -1j
            out[row, col] += amp
    if h.antiherm:
        out = 1j * out
    return out


def oracle_norm(h: PauliSum, n_qubits: int) -> float:
    return float(np.linalg.norm(oracle_matrix(h, n_qubits), 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
