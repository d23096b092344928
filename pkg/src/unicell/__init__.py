"""Random unicellular maps of high genus and their short cycles.

Maps are sampled through C-decorated trees: a uniform plane tree with ``n``
edges plus a uniform permutation of its ``n + 1`` vertices with odd cycles
only. Merging the vertices of each cycle gives the underlying graph.
"""
from ._accel import BACKEND, HAS_NUMBA
from .cperm import CPermutation, count_cperms, expected_cycle_count, lambda_bound, pairing_probability, sample_cperm
from .cycles import CycleRecord, enumerate_short_cycles, junction_count
from .maps import Kernel, UnderlyingGraph, build_underlying_graph, diameter_estimate, kernelize, sample_map
from .stats import intensity, intensity_k, lambda_k_m, pk, poisson_gof, systole_cdf
from .trees import PlaneTree, catalan, count_oriented_paths, marked_pattern_count_formula, sample_plane_tree

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "CPermutation",
    "CycleRecord",
    "Kernel",
    "PlaneTree",
    "UnderlyingGraph",
    "build_underlying_graph",
    "catalan",
    "count_cperms",
    "count_oriented_paths",
    "diameter_estimate",
    "enumerate_short_cycles",
    "expected_cycle_count",
    "intensity",
    "intensity_k",
    "junction_count",
    "kernelize",
    "lambda_bound",
    "lambda_k_m",
    "marked_pattern_count_formula",
    "pairing_probability",
    "pk",
    "poisson_gof",
    "sample_cperm",
    "sample_map",
    "sample_plane_tree",
    "systole_cdf",
]
