"""Community evolution analysis for retweet networks."""

from .community import EnsembleConfig, UnionFind, ensemble_louvain, louvain, modularity
from .flows import FlowReport, churn_flows, transition_flows
from .graph import RetweetGraph, UndirectedGraph, to_undirected, weighted_out_degree
from .influence import (
    community_influence,
    meta_network,
    retweet_hindex,
    super_communities,
    total_influence,
)
from .ingest import RetweetEvent, parse_events
from .metrics import PartitionPair, ari, bcubed_node, core_f1, jaccard_f1_convert, max_f1, nmi, standard_f1
from .partition import Partition
from .snapshot import WindowSpec, build_snapshot, build_snapshots
from .timeline import TimelineReport, pairwise_f1, select_timepoints, select_timepoints_exhaustive

__all__ = [
    "EnsembleConfig",
    "UnionFind",
    "ensemble_louvain",
    "louvain",
    "modularity",
    "FlowReport",
    "churn_flows",
    "transition_flows",
    "RetweetGraph",
    "UndirectedGraph",
    "to_undirected",
    "weighted_out_degree",
    "community_influence",
    "meta_network",
    "retweet_hindex",
    "super_communities",
    "total_influence",
    "RetweetEvent",
    "parse_events",
    "PartitionPair",
    "ari",
    "bcubed_node",
    "core_f1",
    "jaccard_f1_convert",
    "max_f1",
    "nmi",
    "standard_f1",
    "Partition",
    "WindowSpec",
    "build_snapshot",
    "build_snapshots",
    "TimelineReport",
    "pairwise_f1",
    "select_timepoints",
    "select_timepoints_exhaustive",
]
__version__ = "0.1.0"
