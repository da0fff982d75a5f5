"""Directed persistent homology of temporal graphs and a line-graph network that approximates it."""
from .graph import (GraphFormatError, TemporalDigraph, WeightedDigraph, load_dataset,
                    load_edge_list, normalize_weights, parse_edge_list, write_dataset)
from .linegraph import SINK, SOURCE, LineGraph, build_line_graphs
from .dowker import DowkerSkeleton, build_skeleton
from .persistence import (EdgePointMap, PDPoint, PersistenceDiagram, check_duality, diagrams,
                          pd0, pd0_with_edge_map, pd1, symmetric_pd0)
from .metrics import ImageConfig, persistence_image, pie, wasserstein2

__version__ = "0.1.0"
