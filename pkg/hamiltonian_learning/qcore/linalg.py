"""
Dense complex linear algebra for registers of a few qubits.

Hamiltonians are plain numpy arrays. A 1-D array is the diagonal
representation of a diagonal Hamiltonian (all commuting Ising families);
everything else is a dense square matrix. Qubit 1 is the most significant
tensor factor.
"""
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg

from exceptions import DimensionMismatch, NonHermitianInput

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_minus = |0><1| lowers towards |0>, sigma_plus = |1><0|
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)

SINGLE_QUBIT_OPERATORS = {
    "I": IDENTITY_2,
    "X": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
    "+": SIGMA_PLUS,
    "-": SIGMA_MINUS,
}


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; also works on diagonal (1-D) representations."""
    return np.kron(a, b)


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)


def pauli_operator(label: str) -> np.ndarray:
    """
    Tensor product operator from a label such as ``"ZZ"``, ``"XI"`` or ``"-I"``.

    Args:
        label: One character per qubit from I, X, Y, Z, + (sigma plus) and - (sigma minus)

    Returns:
        Dense 2**n x 2**n matrix
    """
    if not label:
        raise DimensionMismatch("Empty operator label")
    try:
        factors = [SINGLE_QUBIT_OPERATORS[c] for c in label.upper()]
    except KeyError as e:
        raise DimensionMismatch(f"Unknown single-qubit operator {e.args[0]!r} in label {label!r}")
    return kron_all(factors)


def single_qubit_operator(op: np.ndarray, k: int, n: int) -> np.ndarray:
    """``op`` acting on qubit ``k`` (0-based, most significant first) of ``n``."""
    if not 0 <= k < n:
        raise DimensionMismatch(f"Qubit index {k} out of range for {n} qubits")
    factors = [IDENTITY_2] * n
    factors[k] = op
    return kron_all(factors)


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    if m.ndim == 1:
        return bool(np.all(np.abs(np.imag(m)) <= atol))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    residual = u.conj().T @ u - np.eye(u.shape[0])
    return bool(np.max(np.abs(residual)) <= atol)


def _check_hermitian(h: np.ndarray) -> None:
    if not is_hermitian(h):
        raise NonHermitianInput("Hamiltonian fails the Hermiticity check", shape=list(h.shape))


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """
    Return U = exp(-i h t) through the Hermitian eigendecomposition.

    Diagonal Hamiltonians (1-D input) skip the decomposition and return the
    dense diagonal unitary.

    Args:
        h: Hermitian matrix, or the diagonal of a diagonal Hamiltonian
        t: Evolution time (inverse energy units)

    Returns:
        Dense unitary matrix
    """
    _check_hermitian(h)
    if h.ndim == 1:
        return np.diag(np.exp(-1j * np.real(h) * t))
    eigenvalues, eigenvectors = scipy.linalg.eigh(h)
    phases = np.exp(-1j * eigenvalues * t)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def expm_hermitian_batch(h_stack: np.ndarray, t: float) -> np.ndarray:
    """
    exp(-i H_m t) for a stack of Hamiltonians.

    Args:
        h_stack: (M, D) diagonals or (M, D, D) dense Hermitian matrices

    Returns:
        (M, D) phase vectors for diagonal input, (M, D, D) unitaries otherwise
    """
    if h_stack.ndim == 2:
        return np.exp(-1j * np.real(h_stack) * t)
    eigenvalues, eigenvectors = np.linalg.eigh(h_stack)
    phases = np.exp(-1j * eigenvalues * t)
    return np.einsum("mij,mj,mkj->mik", eigenvectors, phases, eigenvectors.conj())


def evolve_states(h_stack: np.ndarray, t: float, psi: np.ndarray) -> np.ndarray:
    """
    Apply exp(-i H_m t) to a common initial state for every Hamiltonian in a stack.

    Each row is computed independently of the others, so chunking the stack
    never changes the result.

    Returns:
        (M, D) evolved state vectors
    """
    if h_stack.ndim == 2:
        return np.exp(-1j * np.real(h_stack) * t) * psi[np.newaxis, :]
    eigenvalues, eigenvectors = np.linalg.eigh(h_stack)
    coefficients = np.einsum("mji,j->mi", eigenvectors.conj(), psi)
    coefficients = coefficients * np.exp(-1j * eigenvalues * t)
    return np.einsum("mij,mj->mi", eigenvectors, coefficients)


def apply_unitary(u: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Apply one unitary (dense or diagonal phases) to each row of a state stack."""
    if u.ndim == 1:
        return states * u[np.newaxis, :]
    return np.einsum("ij,mj->mi", u, states)


def partial_trace_first(rho: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """
    Trace out the first tensor factor of an operator on C^dim_a (x) C^dim_b.

    (Tr_1 M)_{ij} = sum_k M_{k*dim_b + i, k*dim_b + j}
    """
    if rho.shape != (dim_a * dim_b, dim_a * dim_b):
        raise DimensionMismatch(
            f"Operator of shape {rho.shape} does not act on a {dim_a}x{dim_b} product space",
            dim_a=dim_a, dim_b=dim_b,
        )
    return np.einsum("kikj->ij", rho.reshape(dim_a, dim_b, dim_a, dim_b))


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value; for a diagonal representation the largest |entry|."""
    if m.ndim == 1:
        return float(np.max(np.abs(m), initial=0.0))
    return float(np.linalg.norm(m, 2))


def spectral_norms(stack: np.ndarray) -> np.ndarray:
    """Spectral norm of every matrix (or diagonal) in a stack."""
    if stack.ndim == 2:
        return np.max(np.abs(stack), axis=1)
    return np.linalg.norm(stack, ord=2, axis=(1, 2))
