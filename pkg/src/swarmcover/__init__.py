"""Self-deploying sensor swarm simulator with temporal network analysis."""

__version__ = "0.1.0"

from .deployment import (DeploymentResult, EmptyCellError, NodeState, SimConfig,
                         Snapshot, cell_centroid, compute_voronoi_cell,
                         inject_node, run_deployment, step_voronoi)
from .environment import (CircleObstacle, Environment, NoiseModel,
                          RectObstacle, clamp_to_free_space, line_of_sight,
                          sample_noise)
from .ga import GaParams, Strategy, ga_propose, select_strategy, step_ga_voronoi
from .measures import (ConvergenceError, CorrelationMap, MeasureSeries,
                       degree_centrality, degree_distribution,
                       eigenvector_centrality, ec_time_trace, node_trace,
                       pearson, regularity_difference, time_lag_correlation)
from .metrics import MetricsBundle, cdt_series, pac
from .tng import (EdgeInterval, TemporalNetworkGraph, TngParseError,
                  adjacency_from_positions, connection_length_distribution,
                  edge_intervals, missing_pairs, read_tng, write_tng)
