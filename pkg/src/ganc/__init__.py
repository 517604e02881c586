"""Hierarchical clustering of weighted graphs by greedy normalized-association merging."""

from .agglomerate import Dendrogram, MergeState, build_dendrogram, flat_partition
from .graph import (GraphError, NodeIdMap, WeightedGraph, connected_component_count,
                    largest_connected_component, load_edge_list, write_edge_list)
from .metrics import (Partition, jaccard_index, modularity, nassoc, ncut,
                      normalized_modularity)
from .model_select import CurvatureProfile, curvature_profile, refined_curvature, select_k
from .refine import RefinementState, init_state, move_gain, refine

__all__ = [
    "CurvatureProfile", "Dendrogram", "GraphError", "MergeState", "NodeIdMap", "Partition",
    "RefinementState", "WeightedGraph", "build_dendrogram", "connected_component_count",
    "curvature_profile", "flat_partition", "init_state", "jaccard_index",
    "largest_connected_component", "load_edge_list", "modularity", "move_gain", "nassoc",
    "ncut", "normalized_modularity", "refine", "refined_curvature", "select_k",
    "write_edge_list",
]
__version__ = "0.1.0"
