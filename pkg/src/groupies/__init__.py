"""Groupies in random multipartite graphs.

A groupie is a vertex whose degree exceeds the mean degree of its neighbors.
The package samples multipartite graphs with independent cross-part edges,
counts groupies per part exactly, enumerates tiny cases for ground truth,
evaluates the related closed-form bounds, and runs reproducible Monte Carlo
campaigns.
"""

__version__ = "0.1.0"

from .estimators import GroupieCounter, MultipartiteSampler
from .graphfile import GraphFormatError, read_graph, write_graph
from .groupie import (
    DegreeProfile,
    GroupieReport,
    ThresholdCounts,
    degree_profile,
    groupie_report,
    is_groupie,
    threshold_counts,
)
from .model import MultipartiteGraph, PartitionSpec, sample, uniform_spec, validate
from .montecarlo import ExperimentConfig, ExperimentResult, conditional_S_probe, run, scaling_sweep, window_coverage
from .oracle import OracleCapacityError, exact_conditional_mean_S, exact_groupie_distribution
from .rng import Seed
from .theory import (
    ConcentrationWindow,
    PartPrediction,
    binomial_tail_exact,
    concentration_window,
    expected_degree,
    expected_Nplus,
    heuristic_prediction,
    hoeffding_tail_bound,
    paper_conditional_mean_S,
    paper_degree_law,
)

__all__ = [
    "ConcentrationWindow", "DegreeProfile", "ExperimentConfig", "ExperimentResult",
    "GraphFormatError", "GroupieCounter", "GroupieReport", "MultipartiteGraph",
    "MultipartiteSampler", "OracleCapacityError", "PartPrediction", "PartitionSpec",
    "Seed", "ThresholdCounts", "binomial_tail_exact", "concentration_window",
    "conditional_S_probe", "degree_profile", "exact_conditional_mean_S",
    "exact_groupie_distribution", "expected_Nplus", "expected_degree",
    "groupie_report", "heuristic_prediction", "hoeffding_tail_bound", "is_groupie",
    "paper_conditional_mean_S", "paper_degree_law", "read_graph", "run", "sample",
    "scaling_sweep", "threshold_counts", "uniform_spec", "validate",
    "window_coverage", "write_graph",
]
