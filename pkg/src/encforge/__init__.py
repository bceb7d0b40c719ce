"""Cluster-aware enlargement of mobility encounter traces."""

__version__ = "0.1.0"

from .analysis import ClusterPairStats, ContactGraph, StatModel, build_stat_model
from .ingest import parse_clusters, parse_trace, write_trace
from .synthesis import Generation, enlarge_dataset
from .trace_model import ClusterMap, EncounterRecord, GenerationConfig, Trace
from .validation import cdf_table, compare_traces, ks_distance

__all__ = [
    "ClusterMap", "ClusterPairStats", "ContactGraph", "EncounterRecord", "Generation",
    "GenerationConfig", "StatModel", "Trace", "build_stat_model", "cdf_table",
    "compare_traces", "enlarge_dataset", "ks_distance", "parse_clusters", "parse_trace",
    "write_trace",
]
