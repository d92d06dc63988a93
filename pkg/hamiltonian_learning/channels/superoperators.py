"""
Supermatrix representation of quantum channels and generators.

Density matrices are vectorized row by row: vec(M)[i*dim + j] = M[i, j].
In this layout rho -> A rho B is the supermatrix A (x) B^T, and the
preparation / partial-trace maps of the SWAP pipeline are the zero-one
matrices returned by prep_superop() and trace_superop().
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator

from exceptions import (ChannelValidationError, DimensionMismatch, EmptySchedule,
                        NonHermitianInput, NonSquareLength, StrengthOutOfRange)
from ..qcore import is_hermitian, kron

TP_ATOL = 1e-10
CP_ATOL = 1e-8


def _isqrt_exact(value: int) -> Optional[int]:
    root = int(round(np.sqrt(value)))
    return root if root * root == value else None


class Superoperator(BaseModel):
    """
    Dense supermatrix mapping vec(rho_in) to vec(rho_out).

    dim_in and dim_out are operator-space dimensions (squares of Hilbert
    dimensions). The flags record properties the channel claims; they are
    checked by validate().
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray = Field(..., description="(dim_out, dim_in) complex supermatrix")
    trace_preserving: bool = Field(False, description="Claims Tr(S[rho]) = Tr(rho)")
    completely_positive: bool = Field(False, description="Claims a positive semidefinite Choi matrix")

    @model_validator(mode="after")
    def _check_shape(self) -> "Superoperator":
        m = self.matrix
        if m.ndim != 2:
            raise ValueError("supermatrix must be two-dimensional")
        for size in m.shape:
            if _isqrt_exact(size) is None:
                raise ValueError(f"supermatrix dimension {size} is not a square")
        return self

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[0]

    @property
    def hilbert_in(self) -> int:
        return _isqrt_exact(self.dim_in)

    @property
    def hilbert_out(self) -> int:
        return _isqrt_exact(self.dim_out)

    def flagged(self, trace_preserving: bool, completely_positive: bool) -> "Superoperator":
        return Superoperator(matrix=self.matrix, trace_preserving=trace_preserving,
                             completely_positive=completely_positive)

    def validate(self) -> "Superoperator":
        """Check the claimed flags; raise ChannelValidationError on violation."""
        if self.trace_preserving and not is_trace_preserving(self):
            raise ChannelValidationError("Channel is flagged trace-preserving but is not",
                                         dim_in=self.dim_in, dim_out=self.dim_out)
        if self.completely_positive and not is_completely_positive(self):
            raise ChannelValidationError("Channel is flagged completely positive but its Choi matrix is not PSD",
                                         dim_in=self.dim_in, dim_out=self.dim_out)
        return self

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return compose(self, other)


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major stacking: [[a, b], [c, d]] -> (a, b, c, d)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"vec expects a square matrix, got shape {m.shape}")
    return m.reshape(-1).copy()


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    dim = _isqrt_exact(v.size)
    if dim is None:
        raise NonSquareLength(f"Cannot unvec a vector of length {v.size}", length=int(v.size))
    return v.reshape(dim, dim).copy()


def left_right_superop(a: np.ndarray, b: np.ndarray) -> Superoperator:
    """Supermatrix of rho -> a rho b, i.e. a (x) b^T in row-major layout."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"Cannot form rho -> A rho B with A {a.shape} and B {b.shape}")
    return Superoperator(matrix=kron(a, b.T))


def unitary_channel(u: np.ndarray) -> Superoperator:
    return left_right_superop(u, u.conj().T).flagged(True, True)


def identity_superop(hilbert_dim: int) -> Superoperator:
    return Superoperator(matrix=np.eye(hilbert_dim ** 2, dtype=complex),
                         trace_preserving=True, completely_positive=True)


def compose(*superops: Superoperator) -> Superoperator:
    """S1 o S2 o ... (the rightmost map acts first)."""
    if not superops:
        raise EmptySchedule("Nothing to compose")
    result = superops[0].matrix
    for s in superops[1:]:
        if result.shape[1] != s.matrix.shape[0]:
            raise DimensionMismatch(
                f"Cannot compose supermatrices of shapes {result.shape} and {s.matrix.shape}")
        result = result @ s.matrix
    return Superoperator(
        matrix=result,
        trace_preserving=all(s.trace_preserving for s in superops),
        completely_positive=all(s.completely_positive for s in superops),
    )


def apply_superop(s: Superoperator, rho: np.ndarray) -> np.ndarray:
    v = vec(rho)
    if v.size != s.dim_in:
        raise DimensionMismatch(f"Channel expects operator dimension {s.dim_in}, got {v.size}")
    return unvec(s.matrix @ v)


def tensor_superops(s_a: Superoperator, s_b: Superoperator) -> Superoperator:
    """
    Supermatrix of S_a (x) S_b acting on operators of the joint register.

    In row-major layout vec(rho_A (x) rho_B) is a permutation of
    vec(rho_A) (x) vec(rho_B); the permutation is applied on both sides.
    """
    da_in, db_in = s_a.hilbert_in, s_b.hilbert_in
    da_out, db_out = s_a.hilbert_out, s_b.hilbert_out
    joint = kron(s_a.matrix, s_b.matrix)
    # index order of `joint`: (ia, ja, ib, jb) out x (ka, la, kb, lb) in
    t = joint.reshape(da_out, da_out, db_out, db_out, da_in, da_in, db_in, db_in)
    # reorder to (ia, ib, ja, jb) x (ka, kb, la, lb)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    matrix = t.reshape((da_out * db_out) ** 2, (da_in * db_in) ** 2)
    return Superoperator(
        matrix=matrix,
        trace_preserving=s_a.trace_preserving and s_b.trace_preserving,
        completely_positive=s_a.completely_positive and s_b.completely_positive,
    )


def choi_matrix(s: Superoperator) -> np.ndarray:
    """sum_ij |i><j| (x) S(|i><j|)."""
    d_in, d_out = s.hilbert_in, s.hilbert_out
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            # vec(|i><j|) is the basis vector i*d_in + j, so S(|i><j|) is a column
            image = s.matrix[:, i * d_in + j].reshape(d_out, d_out)
            choi[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = image
    return choi


def is_trace_preserving(s: Superoperator, atol: float = TP_ATOL) -> bool:
    """Dual map sends the identity to the identity: vec(I_out)^T S = vec(I_in)^T."""
    identity_out = vec(np.eye(s.hilbert_out))
    identity_in = vec(np.eye(s.hilbert_in))
    return bool(np.max(np.abs(identity_out @ s.matrix - identity_in)) <= atol)


def is_completely_positive(s: Superoperator, atol: float = CP_ATOL) -> bool:
    choi = choi_matrix(s)
    choi = 0.5 * (choi + choi.conj().T)
    return bool(np.min(np.linalg.eigvalsh(choi)) >= -atol)


def prep_superop() -> Superoperator:
    """rho -> rho (x) |0><0| for one trusted qubit appended after the system qubit (16 x 4)."""
    matrix = np.zeros((16, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            matrix[(2 * i) * 4 + 2 * j, 2 * i + j] = 1.0
    return Superoperator(matrix=matrix, trace_preserving=True, completely_positive=True)


def trace_superop() -> Superoperator:
    """Trace out the first qubit of a two-qubit register (4 x 16)."""
    matrix = np.zeros((4, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                matrix[2 * i + j, (2 * k + i) * 4 + (2 * k + j)] = 1.0
    return Superoperator(matrix=matrix, trace_preserving=True, completely_positive=True)


def swap_unitary() -> np.ndarray:
    swap = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            swap[2 * b + a, 2 * a + b] = 1.0
    return swap


def ideal_swap_superop() -> Superoperator:
    return unitary_channel(swap_unitary())


def depolarizing_superop(strength: float, n: int) -> Superoperator:
    """
    vec(rho) -> (1 - N) vec(rho) + N Tr(rho) vec(I / 2**n).

    Args:
        strength: Depolarizing strength N in [0, 1]
        n: Number of qubits
    """
    if not 0.0 <= strength <= 1.0:
        raise StrengthOutOfRange(f"Depolarizing strength {strength} outside [0, 1]", strength=strength)
    dim = 2 ** n
    identity_vec = vec(np.eye(dim, dtype=complex))
    matrix = (1.0 - strength) * np.eye(dim * dim, dtype=complex)
    matrix += strength / dim * np.outer(identity_vec, identity_vec)
    return Superoperator(matrix=matrix, trace_preserving=True, completely_positive=True)


class LindbladSpec(BaseModel):
    """Hamiltonian plus collapse operators with non-negative rates (1/time)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    hamiltonian: np.ndarray = Field(..., description="Hermitian system Hamiltonian")
    collapse_operators: List[np.ndarray] = Field(default_factory=list, description="Jump operators L_k")
    rates: List[float] = Field(default_factory=list, description="Rates gamma_k >= 0")

    @model_validator(mode="after")
    def _check_rates(self) -> "LindbladSpec":
        if len(self.rates) != len(self.collapse_operators):
            raise ValueError("one rate per collapse operator is required")
        if any(r < 0 for r in self.rates):
            raise ValueError("collapse rates must be non-negative")
        dim = self.hamiltonian.shape[0]
        for op in self.collapse_operators:
            if op.shape != (dim, dim):
                raise ValueError(f"collapse operator shape {op.shape} does not match H {(dim, dim)}")
        return self


def unitary_generator(h: np.ndarray) -> Superoperator:
    """G with G vec(rho) = vec(-i [H, rho])."""
    if not is_hermitian(h):
        raise NonHermitianInput("Generator Hamiltonian is not Hermitian")
    identity = np.eye(h.shape[0], dtype=complex)
    return Superoperator(matrix=-1j * (kron(h, identity) - kron(identity, h.T)))


def lindblad_generator(spec: LindbladSpec) -> Superoperator:
    """
    GKSL generator: d/dt vec(rho) = G vec(rho) with
    G[rho] = -i[H, rho] + sum_k gamma_k (L rho L^+ - {L^+ L, rho} / 2).
    """
    g = unitary_generator(spec.hamiltonian).matrix.copy()
    identity = np.eye(spec.hamiltonian.shape[0], dtype=complex)
    for rate, op in zip(spec.rates, spec.collapse_operators):
        op = np.asarray(op, dtype=complex)
        product = op.conj().T @ op
        g += rate * (kron(op, op.conj())
                     - 0.5 * kron(product, identity)
                     - 0.5 * kron(identity, product.T))
    return Superoperator(matrix=g)


def expm_superop(g: Superoperator, t: float = 1.0) -> Superoperator:
    """exp(G t) by Pade scaling and squaring (generators are not Hermitian)."""
    return Superoperator(matrix=scipy.linalg.expm(g.matrix * t))


class PiecewiseGenerator(BaseModel):
    """Ordered (generator, duration) segments of a time-dependent generator."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    segments: List[Tuple[Superoperator, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_durations(self) -> "PiecewiseGenerator":
        if any(duration <= 0 for _, duration in self.segments):
            raise ValueError("segment durations must be positive")
        return self


def magnus2_propagator(g: PiecewiseGenerator) -> Superoperator:
    """
    Second-order Magnus propagator exp(Omega_1 + Omega_2) for piecewise-constant generators.

    Omega_1 = sum_k G_k dt_k
    Omega_2 = 1/2 sum_{j > k} [G_j, G_k] dt_j dt_k   (segment j acts after segment k)
    """
    if not g.segments:
        raise EmptySchedule("magnus2_propagator needs at least one segment")
    dim = g.segments[0][0].dim_in
    omega_1 = np.zeros((dim, dim), dtype=complex)
    omega_2 = np.zeros((dim, dim), dtype=complex)
    scaled = []
    for generator, duration in g.segments:
        if generator.matrix.shape != (dim, dim):
            raise DimensionMismatch("All segments must act on the same operator space")
        scaled.append(generator.matrix * duration)
    for j, a_j in enumerate(scaled):
        omega_1 += a_j
        for a_k in scaled[:j]:
            omega_2 += 0.5 * (a_j @ a_k - a_k @ a_j)
    return Superoperator(matrix=scipy.linalg.expm(omega_1 + omega_2))


def lambda_noise(s_gate: Superoperator) -> Superoperator:
    """Effective single-qubit channel of an imperfect SWAP: S_Tr o S_gate o S_prep."""
    if s_gate.matrix.shape != (16, 16):
        raise DimensionMismatch(f"lambda_noise expects a 16x16 two-qubit gate, got {s_gate.matrix.shape}")
    return compose(trace_superop(), s_gate, prep_superop())


def piecewise(segments: Sequence[Tuple[Superoperator, float]]) -> PiecewiseGenerator:
    return PiecewiseGenerator(segments=list(segments))
