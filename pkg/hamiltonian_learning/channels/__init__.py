from .superoperators import (
    Superoperator, LindbladSpec, PiecewiseGenerator,
    vec, unvec, left_right_superop, unitary_channel, identity_superop, compose,
    apply_superop, tensor_superops, choi_matrix, is_trace_preserving, is_completely_positive,
    prep_superop, trace_superop, swap_unitary, ideal_swap_superop, depolarizing_superop,
    unitary_generator, lindblad_generator, expm_superop, magnus2_propagator, lambda_noise,
    piecewise,
)
from .channel_io import format_superop, parse_superop, save_superop, load_superop
from .builder import ChannelBuildSpec, SegmentSpec, HamiltonianTerm, CollapseTerm, build_channel

__all__ = [
    'Superoperator', 'LindbladSpec', 'PiecewiseGenerator',
    'vec', 'unvec', 'left_right_superop', 'unitary_channel', 'identity_superop', 'compose',
    'apply_superop', 'tensor_superops', 'choi_matrix', 'is_trace_preserving', 'is_completely_positive',
    'prep_superop', 'trace_superop', 'swap_unitary', 'ideal_swap_superop', 'depolarizing_superop',
    'unitary_generator', 'lindblad_generator', 'expm_superop', 'magnus2_propagator', 'lambda_noise',
    'piecewise',
    'format_superop', 'parse_superop', 'save_superop', 'load_superop',
    'ChannelBuildSpec', 'SegmentSpec', 'HamiltonianTerm', 'CollapseTerm', 'build_channel',
]
