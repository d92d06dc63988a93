"""State vectors, density matrices and the single-qubit Clifford group."""
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from exceptions import DimensionMismatch
from .linalg import IDENTITY_2, kron_all

NORM_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)


def basis_state(index: int, n: int) -> np.ndarray:
    dim = 2 ** n
    if not 0 <= index < dim:
        raise DimensionMismatch(f"Basis index {index} out of range for {n} qubits")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def plus_state(n: int) -> np.ndarray:
    """|+>^(x)n."""
    dim = 2 ** n
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def density(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def is_density_matrix(rho: np.ndarray, atol: float = NORM_ATOL) -> bool:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        return False
    if abs(np.trace(rho).real - 1.0) > atol:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= EIGENVALUE_FLOOR)


def canonical_phase(u: np.ndarray) -> np.ndarray:
    """Remove the global phase so that the first significant entry is real positive."""
    flat = u.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-8)]
    return u * (abs(pivot) / pivot)


def _phase_key(u: np.ndarray) -> Tuple[float, ...]:
    c = np.round(canonical_phase(u), 8) + 0.0
    return tuple(np.concatenate([c.real.ravel(), c.imag.ravel()]))


@lru_cache(maxsize=1)
def _clifford_table() -> Tuple[Tuple[np.ndarray, ...], dict]:
    """Breadth-first closure of {H, S}; 24 elements up to global phase."""
    elements: List[np.ndarray] = [IDENTITY_2.copy()]
    index = {_phase_key(IDENTITY_2): 0}
    frontier = [IDENTITY_2]
    while frontier:
        next_frontier = []
        for u in frontier:
            for g in (_HADAMARD, _PHASE):
                v = canonical_phase(g @ u)
                key = _phase_key(v)
                if key not in index:
                    index[key] = len(elements)
                    elements.append(v)
                    next_frontier.append(v)
        frontier = next_frontier
    return tuple(elements), index


def single_qubit_cliffords() -> Tuple[np.ndarray, ...]:
    """The 24 single-qubit Clifford unitaries, each with canonical global phase."""
    return _clifford_table()[0]


def clifford_class(u: np.ndarray) -> int:
    """Index of ``u`` in :func:`single_qubit_cliffords` (up to global phase)."""
    _, index = _clifford_table()
    key = _phase_key(u)
    if key not in index:
        raise DimensionMismatch("Matrix is not a single-qubit Clifford")
    return index[key]


def random_local_clifford(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Tensor product of n independent uniform draws from the single-qubit Clifford group.

    Args:
        n: Number of qubits (>= 1)
        rng: Seeded numpy generator; equal seeds give equal matrices

    Returns:
        Dense 2**n x 2**n unitary
    """
    if n < 1:
        raise DimensionMismatch("random_local_clifford needs at least one qubit")
    group = single_qubit_cliffords()
    draws = rng.integers(len(group), size=n)
    return kron_all([group[k] for k in draws])


def stabilizer_state(clifford: np.ndarray, n: int) -> np.ndarray:
    """C|0...0> for an n-qubit Clifford C."""
    if clifford.shape != (2 ** n, 2 ** n):
        raise DimensionMismatch(f"A {clifford.shape} matrix is not an {n}-qubit Clifford")
    return clifford[:, 0].copy()
