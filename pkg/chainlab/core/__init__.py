"""
Core package for chainlab.
Contains the chain sources, the analyses and the scenario harness.
"""

from .chain import ChainSource, StaticChain, ConstantChain, GeneratorChain, SubChain, record
from .stochastic import (
    validate, row_span, backward_product, backward_products, ergodicity_probe,
    class_ergodicity_probe, cluster_rows,
)
from .properties import (
    balanced_asymmetry_constant, cut_balance_constant, self_confidence, is_doubly_stochastic,
    certify_chain, l1_distance,
)
from .flow import (
    min_flow_dp, brute_force_min_flow, aif_profile, unbounded_graph, islands,
    island_restricted_chain, per_island_aif, classify_flow, transition_costs,
)
from .dynamics import (
    step, trajectory, lyapunov_series, check_S_monotonic, detect_clusters, tail_oscillation,
    increment_lower_bounds,
)
from .zoo import (
    krause_chain, jlm_chain, cucker_smale_simulate, flocking_condition, example_chain,
    random_doubly_stochastic_chain, block_diagonal, build_generator, GENERATORS, FlockRun,
)
from .harness import ScenarioRunner, ReportBundle, run_scenario, cross_check, build_chain

__all__ = [
    'ChainSource', 'StaticChain', 'ConstantChain', 'GeneratorChain', 'SubChain', 'record',
    'validate', 'row_span', 'backward_product', 'backward_products', 'ergodicity_probe',
    'class_ergodicity_probe', 'cluster_rows',
    'balanced_asymmetry_constant', 'cut_balance_constant', 'self_confidence',
    'is_doubly_stochastic', 'certify_chain', 'l1_distance',
    'min_flow_dp', 'brute_force_min_flow', 'aif_profile', 'unbounded_graph', 'islands',
    'island_restricted_chain', 'per_island_aif', 'classify_flow', 'transition_costs',
    'step', 'trajectory', 'lyapunov_series', 'check_S_monotonic', 'detect_clusters',
    'tail_oscillation', 'increment_lower_bounds',
    'krause_chain', 'jlm_chain', 'cucker_smale_simulate', 'flocking_condition',
    'example_chain', 'random_doubly_stochastic_chain', 'block_diagonal',
    'build_generator', 'GENERATORS', 'FlockRun',
    'ScenarioRunner', 'ReportBundle', 'run_scenario', 'cross_check', 'build_chain',
]
