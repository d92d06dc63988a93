"""
Parameterized Hamiltonian families H(x) = sum_k x_k T_k and their priors.

Every family is linear in its parameters, so a family is fully described by
its stacked term matrices T_k. Diagonal families store the diagonals only.
"""
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from exceptions import ConfigError, DimensionMismatch
from logger import get_logger
from ..qcore import PAULI_X, PAULI_Z, single_qubit_operator, spectral_norm

logger = get_logger(__name__)


class ParameterPrior(BaseModel):
    """Prior of a single coordinate: uniform(lo, hi) or gaussian(mean, sd)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform", "gaussian"] = Field(..., description="Distribution family")
    lo: Optional[float] = Field(None, description="Lower bound (uniform)")
    hi: Optional[float] = Field(None, description="Upper bound (uniform)")
    mean: Optional[float] = Field(None, description="Mean (gaussian)")
    sd: Optional[float] = Field(None, description="Standard deviation (gaussian)")

    @model_validator(mode="after")
    def _check_parameters(self) -> "ParameterPrior":
        if self.kind == "uniform":
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError("uniform prior needs lo < hi")
        else:
            if self.mean is None or self.sd is None or not self.sd > 0:
                raise ValueError("gaussian prior needs a mean and sd > 0")
        return self

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ParameterPrior":
        return cls(kind="uniform", lo=lo, hi=hi)

    @classmethod
    def gaussian(cls, mean: float, sd: float) -> "ParameterPrior":
        return cls(kind="gaussian", mean=mean, sd=sd)

    @property
    def expected_value(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.lo + self.hi)
        return self.mean

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return (self.hi - self.lo) ** 2 / 12.0
        return self.sd ** 2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return self.lo + (self.hi - self.lo) * rng.random(size)
        return self.mean + self.sd * rng.standard_normal(size)


class FamilyDefinition:
    """Registry entry: how a family scales with n and how its terms are built."""

    def __init__(
        self,
        name: str,
        dimension: Callable[[int], int],
        diagonal: bool,
        terms: Callable[[int], np.ndarray],
        default_prior: Callable[[int], List[ParameterPrior]],
    ):
        self.name = name
        self.dimension = dimension
        self.diagonal = diagonal
        self.terms = terms
        self.default_prior = default_prior


FAMILY_REGISTRY: Dict[str, FamilyDefinition] = {}


@lru_cache(maxsize=64)
def _family_terms(name: str, n: int) -> np.ndarray:
    terms = FAMILY_REGISTRY[name].terms(n)
    terms.setflags(write=False)
    return terms


def register_family(
    name: str,
    dimension: Callable[[int], int],
    diagonal: bool,
    terms: Callable[[int], np.ndarray],
    default_prior: Callable[[int], List[ParameterPrior]],
) -> None:
    """
    Register a Hamiltonian family without touching inference code.

    Args:
        name: Family id used in recipes
        dimension: n -> number of parameters d
        diagonal: Whether H(x) is diagonal in the computational basis
        terms: n -> stacked terms, shape (d, 2**n) when diagonal else (d, 2**n, 2**n)
        default_prior: n -> list of d per-coordinate priors
    """
    FAMILY_REGISTRY[name] = FamilyDefinition(name, dimension, diagonal, terms, default_prior)
    _family_terms.cache_clear()


def _z_diagonal(k: int, n: int) -> np.ndarray:
    """Diagonal of sigma_z on qubit k (0-based, most significant first)."""
    bits = (np.arange(2 ** n) >> (n - 1 - k)) & 1
    return 1.0 - 2.0 * bits


def _zz_diagonal(i: int, j: int, n: int) -> np.ndarray:
    return _z_diagonal(i, n) * _z_diagonal(j, n)


def complete_graph_pairs(n: int) -> List[Tuple[int, int]]:
    """Nearest-neighbour pairs first, then (i, j) with j >= i + 2 in lexicographic order."""
    line = [(i, i + 1) for i in range(n - 1)]
    rest = [(i, j) for i, j in combinations(range(n), 2) if j >= i + 2]
    return line + rest


def _ising_line_terms(n: int) -> np.ndarray:
    return np.array([np.pi / 2 * _zz_diagonal(i, i + 1, n) for i in range(n - 1)])


def _ising_complete_terms(n: int) -> np.ndarray:
    return np.array([np.pi / 2 * _zz_diagonal(i, j, n) for i, j in complete_graph_pairs(n)])


def _zz_dense(i: int, n: int) -> np.ndarray:
    return single_qubit_operator(PAULI_Z, i, n) @ single_qubit_operator(PAULI_Z, i + 1, n)


def _transverse_ising_terms(n: int) -> np.ndarray:
    fields = [single_qubit_operator(PAULI_X, k, n) for k in range(n)]
    couplings = [_zz_dense(k, n) for k in range(n - 1)]
    return np.array(fields + couplings)


def _ti_transverse_ising_terms(n: int) -> np.ndarray:
    field = sum(single_qubit_operator(PAULI_X, k, n) for k in range(n))
    coupling = sum(_zz_dense(k, n) for k in range(n - 1))
    return np.array([field, coupling])


def _uniform_prior(lo: float, hi: float, dimension: Callable[[int], int]):
    return lambda n: [ParameterPrior.uniform(lo, hi)] * dimension(n)


register_family(
    "ising-line",
    dimension=lambda n: n - 1,
    diagonal=True,
    terms=_ising_line_terms,
    default_prior=_uniform_prior(-1 / np.pi, 1 / np.pi, lambda n: n - 1),
)
register_family(
    "ising-complete",
    dimension=lambda n: n * (n - 1) // 2,
    diagonal=True,
    terms=_ising_complete_terms,
    default_prior=_uniform_prior(-1 / np.pi, 1 / np.pi, lambda n: n * (n - 1) // 2),
)
register_family(
    "transverse-ising",
    dimension=lambda n: 2 * n - 1,
    diagonal=False,
    terms=_transverse_ising_terms,
    default_prior=_uniform_prior(0.0, 1.0, lambda n: 2 * n - 1),
)
register_family(
    "ti-transverse-ising",
    dimension=lambda n: 2,
    diagonal=False,
    terms=_ti_transverse_ising_terms,
    default_prior=_uniform_prior(0.0, 1.0, lambda n: 2),
)


class HamiltonianFamily(BaseModel):
    """A registered family on n qubits together with its prior."""
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., description="Registered family id, e.g. ising-line")
    n: int = Field(..., ge=1, le=8, description="Number of qubits")
    prior: List[ParameterPrior] = Field(
        default_factory=list,
        description="One prior (broadcast to every coordinate) or exactly d priors; empty uses the family default",
    )

    @model_validator(mode="after")
    def _check_family(self) -> "HamiltonianFamily":
        if self.id not in FAMILY_REGISTRY:
            raise ValueError(f"unknown family {self.id!r}; registered: {sorted(FAMILY_REGISTRY)}")
        d = FAMILY_REGISTRY[self.id].dimension(self.n)
        if d < 1:
            raise ValueError(f"family {self.id!r} has no parameters on {self.n} qubit(s)")
        if len(self.prior) not in (0, 1, d):
            raise ValueError(f"prior must list 1 or {d} entries, got {len(self.prior)}")
        return self

    @property
    def definition(self) -> FamilyDefinition:
        return FAMILY_REGISTRY[self.id]

    @property
    def d(self) -> int:
        return self.definition.dimension(self.n)

    @property
    def diagonal(self) -> bool:
        return self.definition.diagonal

    @property
    def priors(self) -> List[ParameterPrior]:
        if not self.prior:
            return self.definition.default_prior(self.n)
        if len(self.prior) == 1:
            return list(self.prior) * self.d
        return list(self.prior)

    @property
    def terms(self) -> np.ndarray:
        return _family_terms(self.id, self.n)

    def dense_terms(self) -> np.ndarray:
        terms = self.terms
        if self.diagonal:
            return np.array([np.diag(t).astype(complex) for t in terms])
        return terms


def as_parameters(family: HamiltonianFamily, x) -> np.ndarray:
    """Validate a parameter vector against the family dimension."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != family.d:
        raise DimensionMismatch(
            f"{family.id} on {family.n} qubits expects {family.d} parameters, got shape {x.shape}",
            expected=family.d,
        )
    return x


def build_hamiltonian(family: HamiltonianFamily, x, dense: bool = False) -> np.ndarray:
    """
    Build H(x).

    Args:
        family: Hamiltonian family
        x: Parameter vector of length family.d
        dense: Return the dense matrix even for diagonal families

    Returns:
        1-D diagonal for diagonal families (unless dense), otherwise a dense Hermitian matrix
    """
    x = as_parameters(family, x)
    h = np.einsum("k,k...->...", x, family.terms)
    if family.diagonal and dense:
        return np.diag(h).astype(complex)
    return h


def build_hamiltonians(family: HamiltonianFamily, xs: np.ndarray) -> np.ndarray:
    """Stacked H(x_m) for an (M, d) array of parameters."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != family.d:
        raise DimensionMismatch(
            f"expected an (M, {family.d}) parameter array, got shape {xs.shape}",
            expected=family.d,
        )
    return np.einsum("mk,k...->m...", xs, family.terms)


def sample_prior(family: HamiltonianFamily, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Draw parameters coordinate-wise from the family prior.

    Returns:
        (d,) when size is None, otherwise (size, d)
    """
    count = 1 if size is None else size
    columns = [prior.sample(rng, count) for prior in family.priors]
    draws = np.stack(columns, axis=1)
    return draws[0] if size is None else draws


def hamiltonian_distance(family: HamiltonianFamily, x1, x2) -> float:
    """Spectral norm of H(x1) - H(x2)."""
    return spectral_norm(build_hamiltonian(family, x1) - build_hamiltonian(family, x2))


def shared_coordinates(family_a: HamiltonianFamily, family_b: HamiltonianFamily) -> int:
    """
    Number of leading coordinates that parameterize identical terms in both families.

    This is the embedding used to compare estimates across families of
    different dimension (prefix projection).
    """
    if family_a.n != family_b.n:
        raise DimensionMismatch(
            f"families act on {family_a.n} and {family_b.n} qubits",
        )
    if family_a.id == family_b.id:
        return family_a.d
    terms_a, terms_b = family_a.dense_terms(), family_b.dense_terms()
    shared = 0
    for t_a, t_b in zip(terms_a, terms_b):
        if not np.allclose(t_a, t_b, atol=1e-12):
            break
        shared += 1
    if shared == 0:
        raise DimensionMismatch(f"families {family_a.id} and {family_b.id} share no coordinates")
    return shared


def neglected_terms_bound(
    truth_family: HamiltonianFamily, x_true, model_family: HamiltonianFamily
) -> Tuple[int, float, float]:
    """
    Bound the error of a model that drops the truth's trailing terms.

    Returns:
        (R, max_j ||H_j||, R * max_j ||H_j||), where H_j are the neglected
        nonzero terms of the truth; the last entry bounds min_x ||H(x) - H_true||.
    """
    x_true = as_parameters(truth_family, x_true)
    k = shared_coordinates(truth_family, model_family)
    norms = [
        abs(coefficient) * spectral_norm(term)
        for coefficient, term in zip(x_true[k:], truth_family.terms[k:])
        if coefficient != 0.0
    ]
    if not norms:
        return 0, 0.0, 0.0
    largest = max(norms)
    logger.debug(f"{len(norms)} neglected terms, largest norm {largest:.3e}")
    return len(norms), largest, len(norms) * largest


def resolve_family(spec) -> HamiltonianFamily:
    """Accept a HamiltonianFamily or a plain mapping from a recipe."""
    if isinstance(spec, HamiltonianFamily):
        return spec
    try:
        return HamiltonianFamily.model_validate(spec)
    except ValueError as e:
        raise ConfigError(f"Invalid Hamiltonian family: {e}")
