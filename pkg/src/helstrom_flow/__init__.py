"""Helstrom-matrix information flow for open quantum systems.

Internal/external information of weighted state pairs, the bounds on their
growth, a qubit dephasing model with initial correlations and a local
witness for quantum correlations.
"""

__version__ = "0.1.0"

from .info import (
    InfoBreakdown,
    Trajectory,
    detect_backflow,
    external_info_bound,
    increase_bound,
    information_breakdown,
    internal_information,
    markovianity_witness,
)
from .linalg import (
    BipartiteState,
    DensityOperator,
    NumericalError,
    WeightPair,
    helstrom,
    partial_trace_env,
    partial_trace_sys,
    trace_distance,
    trace_norm,
)

__all__ = [
    "BipartiteState",
    "DensityOperator",
    "InfoBreakdown",
    "NumericalError",
    "Trajectory",
    "WeightPair",
    "detect_backflow",
    "external_info_bound",
    "helstrom",
    "increase_bound",
    "information_breakdown",
    "internal_information",
    "markovianity_witness",
    "partial_trace_env",
    "partial_trace_sys",
    "trace_distance",
    "trace_norm",
]
