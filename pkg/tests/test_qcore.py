import numpy as np
import pytest
import scipy.linalg

from exceptions import DimensionMismatch, NonHermitianInput
from hamiltonian_learning.qcore import (
    IDENTITY_2, PAULI_X, PAULI_Z, SIGMA_MINUS, apply_unitary, basis_state, clifford_class, density,
    evolve_states, expm_hermitian, expm_hermitian_batch, is_density_matrix, is_unitary, kron,
    partial_trace_first, pauli_operator, plus_state, random_local_clifford, single_qubit_cliffords,
    single_qubit_operator, spectral_norm, spectral_norms, stabilizer_state,
)
from helpers import random_density, random_hermitian


def taylor_expm(a: np.ndarray, order: int = 8) -> np.ndarray:
    """Scaling-and-squaring Taylor series."""
    squarings = max(0, int(np.ceil(np.log2(max(np.linalg.norm(a, 1), 1e-300)))) + 4)
    scaled = a / 2 ** squarings
    result = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, order + 1):
        term = term @ scaled / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def test_kron_pauli_algebra():
    assert np.allclose(kron(PAULI_Z, PAULI_Z), np.diag([1, -1, -1, 1]))
    assert np.allclose(kron(IDENTITY_2, IDENTITY_2), np.eye(4))
    assert np.allclose(kron(PAULI_X, IDENTITY_2) @ basis_state(0, 2), basis_state(2, 2))


def test_pauli_operator_labels():
    assert np.allclose(pauli_operator("ZZ"), kron(PAULI_Z, PAULI_Z))
    assert np.allclose(pauli_operator("-I"), kron(SIGMA_MINUS, IDENTITY_2))
    assert np.allclose(SIGMA_MINUS @ basis_state(1, 1), basis_state(0, 1))
    with pytest.raises(DimensionMismatch):
        pauli_operator("ZQ")


def test_single_qubit_operator_places_factor_most_significant_first():
    assert np.allclose(single_qubit_operator(PAULI_X, 0, 2), kron(PAULI_X, IDENTITY_2))
    assert np.allclose(single_qubit_operator(PAULI_X, 1, 2), kron(IDENTITY_2, PAULI_X))
    with pytest.raises(DimensionMismatch):
        single_qubit_operator(PAULI_X, 2, 2)


def test_expm_hermitian_diagonal_case():
    u = expm_hermitian(np.pi / 2 * PAULI_Z, 1.0)
    assert np.allclose(u, np.diag([-1j, 1j]), atol=1e-14)


def test_expm_hermitian_zero_time_is_identity(rng):
    h = random_hermitian(4, rng)
    assert np.allclose(expm_hermitian(h, 0.0), np.eye(4), atol=1e-14)


def test_expm_hermitian_matches_taylor_oracle(rng):
    h = random_hermitian(4, rng)
    u = expm_hermitian(h, 0.7)
    assert np.allclose(u, taylor_expm(-1j * 0.7 * h), atol=1e-9)
    assert is_unitary(u)


def test_expm_hermitian_accepts_diagonal_vector():
    diagonal = np.array([0.3, -1.2, 0.5, 2.0])
    assert np.allclose(expm_hermitian(diagonal, 0.4), scipy.linalg.expm(-0.4j * np.diag(diagonal)))


def test_expm_hermitian_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        expm_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


def test_batched_evolution_matches_single(rng):
    stack = np.array([random_hermitian(4, rng) for _ in range(5)])
    psi = plus_state(2)
    states = evolve_states(stack, 1.3, psi)
    unitaries = expm_hermitian_batch(stack, 1.3)
    for h, state, u in zip(stack, states, unitaries):
        expected = expm_hermitian(h, 1.3) @ psi
        assert np.allclose(state, expected, atol=1e-12)
        assert np.allclose(u, expm_hermitian(h, 1.3), atol=1e-12)


def test_batched_evolution_of_diagonals(rng):
    diagonals = rng.standard_normal((3, 4))
    psi = plus_state(2)
    states = evolve_states(diagonals, 0.9, psi)
    for d, state in zip(diagonals, states):
        assert np.allclose(state, expm_hermitian(d, 0.9) @ psi)
    phases = np.exp(1j * diagonals[0])
    assert np.allclose(apply_unitary(phases, states[:1]), (np.diag(phases) @ states[0])[np.newaxis, :])


def test_partial_trace_product_and_bell():
    rho = random_density(2, np.random.default_rng(3))
    product = kron(density(basis_state(0, 1)), rho)
    assert np.allclose(partial_trace_first(product, 2, 2), rho)

    bell = (basis_state(0, 2) + basis_state(3, 2)) / np.sqrt(2)
    assert np.allclose(partial_trace_first(density(bell), 2, 2), np.eye(2) / 2)


def test_partial_trace_matches_loop_oracle(rng):
    rho = random_density(4, rng)
    expected = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                expected[i, j] += rho[2 * k + i, 2 * k + j]
    assert np.allclose(partial_trace_first(rho, 2, 2), expected)
    with pytest.raises(DimensionMismatch):
        partial_trace_first(rho, 2, 3)


def test_spectral_norm(rng):
    assert spectral_norm(PAULI_Z) == pytest.approx(1.0)
    assert spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)
    assert spectral_norm(np.array([3.0, -5.0])) == pytest.approx(5.0)

    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    v = rng.standard_normal(4) + 0j
    for _ in range(2000):
        v = m.conj().T @ (m @ v)
        v /= np.linalg.norm(v)
    power = np.sqrt(np.linalg.norm(m.conj().T @ (m @ v)))
    assert spectral_norm(m) == pytest.approx(power, abs=1e-8)
    assert np.allclose(spectral_norms(np.array([m, 2 * m])), [spectral_norm(m), 2 * spectral_norm(m)])


def test_clifford_group_has_24_classes():
    group = single_qubit_cliffords()
    assert len(group) == 24
    for index, u in enumerate(group):
        assert is_unitary(u)
        assert clifford_class(np.exp(0.3j) * u) == index


def test_random_local_clifford_is_seeded():
    a = random_local_clifford(3, np.random.default_rng(5))
    b = random_local_clifford(3, np.random.default_rng(5))
    assert np.array_equal(a, b)
    assert is_unitary(a)
    psi = stabilizer_state(a, 3)
    assert is_density_matrix(density(psi))
    assert np.allclose(psi, a @ basis_state(0, 3))
    with pytest.raises(DimensionMismatch):
        stabilizer_state(a, 2)


def test_random_local_clifford_is_uniform_over_the_group():
    rng = np.random.default_rng(11)
    counts = np.zeros(24)
    for _ in range(24_000):
        counts[clifford_class(random_local_clifford(1, rng))] += 1
    # chi-squared with 23 dof, far below the 0.001 critical value 49.7
    chi2 = np.sum((counts - 1000) ** 2 / 1000)
    assert chi2 < 49.7


def test_expm_hermitian_group_property(rng):
    h = random_hermitian(8, rng)
    u_s, u_t = expm_hermitian(h, 0.4), expm_hermitian(h, 1.3)
    assert np.allclose(u_s @ u_t, expm_hermitian(h, 1.7), atol=1e-10)
    assert np.allclose(u_t @ expm_hermitian(h, -1.3), np.eye(8), atol=1e-10)
