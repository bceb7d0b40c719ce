"""Learn the cluster-aware statistical model from a trace.

The model keeps, for every unordered cluster pair, the raw contact durations
and inter-contact times (ICTs) observed between nodes of those clusters, plus
the fraction of possible node pairs that ever met.  Degrees are the number of
distinct contacts of each node.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .trace_model import ClusterMap, Trace

log = logging.getLogger(__name__)

MODEL_FORMAT = "encforge-model/1"


@dataclass(frozen=True)
class ContactGraph:
    """Undirected contact graph; weight = number of encounters of the pair."""

    nodes: frozenset
    edge_weights: dict

    def degree(self, node: int) -> int:
        return sum(1 for a, b in self.edge_weights if node in (a, b))

    def neighbors(self) -> dict:
        out = {n: set() for n in self.nodes}
        for a, b in self.edge_weights:
            out[a].add(b)
            out[b].add(a)
        return out


def build_contact_graph(trace: Trace) -> ContactGraph:
    if not len(trace):
        return ContactGraph(trace.node_universe, {})
    pairs = np.stack([trace.node_a, trace.node_b], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    weights = {(int(a), int(b)): int(c) for (a, b), c in zip(uniq, counts)}
    return ContactGraph(trace.node_universe, weights)


def _pair_order(trace: Trace) -> np.ndarray:
    # group by pair, then start, then end (tie-break for equal starts)
    return np.lexsort((trace.end, trace.start, trace.node_b, trace.node_a))


def pair_gaps(trace: Trace):
    """Columns ``(node_a, node_b, gap)``, one row per consecutive same-pair encounter; gaps unclamped."""
    order = _pair_order(trace)
    a, b = trace.node_a[order], trace.node_b[order]
    start, end = trace.start[order], trace.end[order]
    same = (a[1:] == a[:-1]) & (b[1:] == b[:-1])
    gaps = start[1:][same] - end[:-1][same]
    return a[1:][same], b[1:][same], gaps


def compute_pair_icts(trace: Trace, clamp: bool = True) -> dict:
    """Map each node pair to the gaps between its consecutive encounters.

    Encounters of a pair are ordered by start time (end time breaks ties) and
    each gap is ``next.start - prev.end``.  A pair with k encounters yields
    k - 1 gaps.  Overlapping encounters give negative gaps, clamped to 0
    unless ``clamp`` is false.
    """
    out: dict = {}
    if not len(trace):
        return out
    pa, pb, gaps = pair_gaps(trace)
    if clamp:
        gaps = np.maximum(gaps, 0)
    for a, b, g in zip(pa.tolist(), pb.tolist(), gaps.tolist()):
        out.setdefault((a, b), []).append(g)
    for a, b in zip(trace.node_a.tolist(), trace.node_b.tolist()):
        out.setdefault((a, b), [])
    return out


def possible_pairs(n1: int, n2: int, same_cluster: bool) -> int:
    return n1 * (n1 - 1) // 2 if same_cluster else n1 * n2


def compute_edge_density(graph: ContactGraph, clusters: ClusterMap, c1: int, c2: int) -> Fraction:
    """Distinct contacted node pairs between two clusters over all possible pairs."""
    sizes = clusters.sizes
    possible = possible_pairs(sizes[c1], sizes[c2], c1 == c2)
    if possible == 0:
        return Fraction(0)
    want = {c1, c2}
    observed = sum(
        1 for a, b in graph.edge_weights
        if {clusters.cluster_of(a), clusters.cluster_of(b)} == want
    )
    return Fraction(observed, possible)


def degree_distribution(graph: ContactGraph, trace: Trace) -> list[int]:
    """Distinct-neighbour count of every node in the universe, in node-id order."""
    universe = trace.node_universe | graph.nodes
    degree = dict.fromkeys(universe, 0)
    for a, b in graph.edge_weights:
        degree[a] += 1
        degree[b] += 1
    return [degree[n] for n in sorted(universe)]


@dataclass(frozen=True)
class ClusterPairStats:
    pair: tuple[int, int]
    durations_s: np.ndarray
    icts_s: np.ndarray
    observed_edges: int
    possible_pairs: int

    def __post_init__(self):
        for name in ("durations_s", "icts_s"):
            arr = np.sort(np.asarray(getattr(self, name), dtype=np.int64).reshape(-1))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.durations_s) and self.durations_s[0] < 1:
            raise ValueError(f"cluster pair {self.pair}: durations must be >= 1 s")
        if len(self.icts_s) and self.icts_s[0] < 0:
            raise ValueError(f"cluster pair {self.pair}: inter-contact times must be >= 0")
        if not 0 <= self.observed_edges <= self.possible_pairs:
            raise ValueError(f"cluster pair {self.pair}: edge count outside [0, possible_pairs]")

    @property
    def edge_density(self) -> Fraction:
        if self.possible_pairs == 0:
            return Fraction(0)
        return Fraction(self.observed_edges, self.possible_pairs)

    def to_dict(self) -> dict:
        return {
            "clusters": list(self.pair),
            "edge_density": float(self.edge_density),
            "observed_edges": self.observed_edges,
            "possible_pairs": self.possible_pairs,
            "durations_s": self.durations_s.tolist(),
            "icts_s": self.icts_s.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterPairStats":
        return cls(
            pair=tuple(d["clusters"]),
            durations_s=d["durations_s"],
            icts_s=d["icts_s"],
            observed_edges=int(d["observed_edges"]),
            possible_pairs=int(d["possible_pairs"]),
        )


@dataclass(frozen=True)
class StatModel:
    num_clusters: int
    cluster_sizes: tuple[int, ...]
    pair_stats: dict
    degree_samples: np.ndarray
    cluster_ids: tuple[int, ...] = ()
    cluster_labels: tuple = ()
    span_s: int = 0
    clamped_icts: int = 0
    num_encounters: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        deg = np.sort(np.asarray(self.degree_samples, dtype=np.int64).reshape(-1))
        deg.setflags(write=False)
        object.__setattr__(self, "degree_samples", deg)
        if not self.cluster_ids:
            object.__setattr__(self, "cluster_ids", tuple(range(self.num_clusters)))
        if not self.cluster_labels:
            object.__setattr__(self, "cluster_labels", (None,) * self.num_clusters)
        missing = [p for p in cluster_pairs(self.num_clusters) if p not in self.pair_stats]
        if missing:
            raise ValueError(f"model lacks stats for cluster pairs {missing}")

    def stats_for(self, c1: int, c2: int) -> ClusterPairStats:
        return self.pair_stats[(min(c1, c2), max(c1, c2))]

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "num_clusters": self.num_clusters,
            "cluster_sizes": list(self.cluster_sizes),
            "cluster_ids": list(self.cluster_ids),
            "cluster_labels": list(self.cluster_labels),
            "span_s": self.span_s,
            "num_encounters": self.num_encounters,
            "clamped_icts": self.clamped_icts,
            "degree_samples": self.degree_samples.tolist(),
            "pairs": [self.pair_stats[p].to_dict() for p in cluster_pairs(self.num_clusters)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "StatModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        stats = {}
        for entry in d["pairs"]:
            s = ClusterPairStats.from_dict(entry)
            stats[s.pair] = s
        return cls(
            num_clusters=int(d["num_clusters"]),
            cluster_sizes=tuple(d["cluster_sizes"]),
            pair_stats=stats,
            degree_samples=d["degree_samples"],
            cluster_ids=tuple(d.get("cluster_ids", ())),
            cluster_labels=tuple(d.get("cluster_labels", ())),
            span_s=int(d.get("span_s", 0)),
            clamped_icts=int(d.get("clamped_icts", 0)),
            num_encounters=int(d.get("num_encounters", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "StatModel":
        return cls.from_dict(json.loads(text))


def cluster_pairs(k: int) -> list[tuple[int, int]]:
    """All K(K+1)/2 unordered cluster pairs, same-cluster pairs included."""
    return list(combinations_with_replacement(range(k), 2))


def build_stat_model(trace: Trace, clusters: ClusterMap) -> StatModel:
    """Pool durations, ICTs and edge counts per unordered cluster pair.

    Nodes present only in the cluster file join the universe as isolated
    nodes (degree 0).
    """
    trace = trace.with_universe(clusters.nodes)
    k = clusters.num_clusters
    sizes = clusters.sizes
    durations = {p: [] for p in cluster_pairs(k)}
    icts = {p: [] for p in cluster_pairs(k)}
    edges = dict.fromkeys(cluster_pairs(k), 0)

    clamped = 0
    if len(trace):
        ca = clusters.lookup(trace.node_a)
        cb = clusters.lookup(trace.node_b)
        lo, hi = np.minimum(ca, cb), np.maximum(ca, cb)
        dur = trace.durations
        for p in durations:
            mask = (lo == p[0]) & (hi == p[1])
            durations[p] = dur[mask]

        pa, pb, gaps = pair_gaps(trace)
        clamped = int(np.count_nonzero(gaps < 0))
        if clamped:
            log.warning("%d overlapping same-pair encounters; negative ICTs clamped to 0", clamped)
        gaps = np.maximum(gaps, 0)
        ga, gb = clusters.lookup(pa), clusters.lookup(pb)
        glo, ghi = np.minimum(ga, gb), np.maximum(ga, gb)
        for p in icts:
            icts[p] = gaps[(glo == p[0]) & (ghi == p[1])]

    graph = build_contact_graph(trace)
    for a, b in graph.edge_weights:
        ca_, cb_ = clusters.cluster_of(a), clusters.cluster_of(b)
        edges[(min(ca_, cb_), max(ca_, cb_))] += 1

    pair_stats = {
        p: ClusterPairStats(
            pair=p,
            durations_s=durations[p],
            icts_s=icts[p],
            observed_edges=edges[p],
            possible_pairs=possible_pairs(sizes[p[0]], sizes[p[1]], p[0] == p[1]),
        )
        for p in cluster_pairs(k)
    }
    return StatModel(
        num_clusters=k,
        cluster_sizes=sizes,
        pair_stats=pair_stats,
        degree_samples=degree_distribution(graph, trace),
        cluster_ids=clusters.raw_ids,
        cluster_labels=clusters.labels,
        span_s=trace.span_s(),
        clamped_icts=clamped,
        num_encounters=len(trace),
    )
