"""Minimum bounded-depth and bounded-diameter trees in randomly weighted
complete graphs: greedy constructions, slice-and-splice, exact small-case
oracles and the closed-form predictions they are checked against.
"""
from .builders import (greedy_levels, greedy_tree, prim_mst, slice, splice, sliced_and_spliced,
                       steiner_reference)
from .errors import CapacityError, ConfigError, ConstructionError, DomainError, InfeasibleError
from .exact import (DenseInstance, OrderStatSpec, approx_expected_W, brute_force_F, empirical_tail,
                    exact_bounded_depth_tree, exact_bounded_diameter_tree, exact_expected_W, sample_W,
                    tail_bound, tree_lower_bound)
from .experiments import ExperimentConfig, TrialRecord, emit, run_experiment, summarize
from .graph_model import (Distribution, EdgeOracle, SplitOracle, combined_weight, edge_weight,
                          split_weights)
from .kernels import BACKEND
from .level_sequences import (CostParams, IntegerLevelSequence, LevelSequence, R_threshold,
                              expected_level_weight, f_cost, f_cost_truncated, integerize,
                              minimize_truncated_cost, optimal_level_sequence, predicted_weight_depth,
                              predicted_weight_diam_odd)
from .trees import (Forest, RootedTree, find_center, heavy_edge_count, tree_depth, tree_diameter)

__version__ = "0.1.0"
