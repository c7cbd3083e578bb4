"""
Data package for chainlab.
Contains the value types, the error hierarchy and the manifest parser.
"""

from .models import (
    StochasticMatrix, BackwardProduct, ErgodicityVerdict, ConstantWitness, CertificateReport,
    DivergenceRule, L1Distance, SubsetSequence, FlowProfile, InteractionGraph, IslandPartition,
    SortedStateView, Trajectory, LyapunovSeries, ClusterReport, KrauseParams, CuckerSmaleParams,
    FlockingCheck, Scenario, TheoremCrossCheck, indicator_kernel, power_kernel,
)
from .errors import ChainLabError, ManifestError
from .parser import ManifestParser

__all__ = [
    'StochasticMatrix', 'BackwardProduct', 'ErgodicityVerdict', 'ConstantWitness',
    'CertificateReport', 'DivergenceRule', 'L1Distance', 'SubsetSequence', 'FlowProfile',
    'InteractionGraph', 'IslandPartition', 'SortedStateView', 'Trajectory', 'LyapunovSeries',
    'ClusterReport', 'KrauseParams', 'CuckerSmaleParams', 'FlockingCheck', 'Scenario',
    'TheoremCrossCheck', 'indicator_kernel', 'power_kernel',
    'ChainLabError', 'ManifestError', 'ManifestParser',
]
