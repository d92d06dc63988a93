from .linalg import (
    IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z, SIGMA_PLUS, SIGMA_MINUS,
    kron, kron_all, pauli_operator, single_qubit_operator,
    is_hermitian, is_unitary, expm_hermitian, expm_hermitian_batch,
    evolve_states, apply_unitary, partial_trace_first, spectral_norm, spectral_norms,
)
from .states import (
    basis_state, plus_state, density, is_density_matrix,
    canonical_phase, single_qubit_cliffords, clifford_class,
    random_local_clifford, stabilizer_state,
)

__all__ = [
    'IDENTITY_2', 'PAULI_X', 'PAULI_Y', 'PAULI_Z', 'SIGMA_PLUS', 'SIGMA_MINUS',
    'kron', 'kron_all', 'pauli_operator', 'single_qubit_operator',
    'is_hermitian', 'is_unitary', 'expm_hermitian', 'expm_hermitian_batch',
    'evolve_states', 'apply_unitary', 'partial_trace_first', 'spectral_norm', 'spectral_norms',
    'basis_state', 'plus_state', 'density', 'is_density_matrix',
    'canonical_phase', 'single_qubit_cliffords', 'clifford_class',
    'random_local_clifford', 'stabilizer_state',
]
