from .families import (
    ParameterPrior, FamilyDefinition, FAMILY_REGISTRY, HamiltonianFamily,
    register_family, complete_graph_pairs, as_parameters, build_hamiltonian, build_hamiltonians,
    sample_prior, hamiltonian_distance, shared_coordinates, neglected_terms_bound, resolve_family,
)

__all__ = [
    'ParameterPrior', 'FamilyDefinition', 'FAMILY_REGISTRY', 'HamiltonianFamily',
    'register_family', 'complete_graph_pairs', 'as_parameters', 'build_hamiltonian', 'build_hamiltonians',
    'sample_prior', 'hamiltonian_distance', 'shared_coordinates', 'neglected_terms_bound', 'resolve_family',
]
