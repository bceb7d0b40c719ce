"""Synthetic network construction and encounter simulation.

Generation runs in four steps, each drawing from its own keyed stream:

1. ``allocate_nodes``: node ids ``0..N-1`` are shuffled into clusters with the
   requested per-cluster counts.
2. ``assign_weights``: every node gets a weight drawn from the source trace's
   degree samples.
3. ``assign_edges``: each cluster pair gets ``round(density * possible)``
   distinct edges whose endpoints are drawn in proportion to node weight.
4. ``simulate_pair``: every edge runs a renewal process alternating sampled
   inter-contact times and durations until ``max_time_s``.  An encounter
   that straddles ``max_time_s`` is dropped by default, or cut short with
   ``boundary="clamp"``.

Per-edge streams are keyed on the node pair, so the result does not depend on
how edges are scheduled across threads.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .analysis import ClusterPairStats, StatModel, cluster_pairs, possible_pairs
from .errors import EmptyDistribution, InsufficientSamples
from .sampling import EmpiricalDistribution, RngStream, WeightedChooser, pair_stream_id, stream_id
from .trace_model import ClusterMap, GenerationConfig, Trace, split_by_ratio

log = logging.getLogger(__name__)

REJECTION_FACTOR = 100
BOUNDARY_POLICIES = ("drop", "clamp")
# "drop" keeps every emitted duration a verbatim model sample
DEFAULT_BOUNDARY = "drop"
_MAX_CHUNK = 1 << 16


def config_for_total(model: StatModel, total_nodes: int, max_time_s: int, rng_seed: int = 0) -> GenerationConfig:
    """Per-cluster counts proportional to the source cluster sizes."""
    counts = split_by_ratio(total_nodes, model.cluster_sizes)
    return GenerationConfig(counts, max_time_s, rng_seed)


def allocate_nodes(config: GenerationConfig, model: StatModel, rng: RngStream | None = None) -> np.ndarray:
    """Return ``node_clusters`` where ``node_clusters[i]`` is the cluster of node ``i``.

    Without ``rng`` clusters occupy contiguous id blocks; with it the ids are
    randomly permuted.
    """
    config.check_against(model.num_clusters)
    blocks = np.repeat(np.arange(model.num_clusters), config.cluster_node_counts)
    if rng is None:
        return blocks
    return blocks[rng.permutation(len(blocks))]


def assign_weights(node_clusters: np.ndarray, model: StatModel, rng: RngStream) -> np.ndarray:
    try:
        degrees = EmpiricalDistribution(model.degree_samples)
    except EmptyDistribution:
        raise EmptyDistribution("degree sample set") from None
    return degrees.sample(rng, len(node_clusters)).astype(np.int64)


def round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)).__floor__())


def target_edge_count(stats: ClusterPairStats, n1: int, n2: int, same_cluster: bool) -> int:
    return round_half_up(stats.edge_density * possible_pairs(n1, n2, same_cluster))


def _sample_without_replacement(n: int, k: int, rng: RngStream) -> list[int]:
    # partial Fisher-Yates over a virtual range(n)
    swapped: dict[int, int] = {}
    out = []
    u = rng.random(k) if k else ()
    for i in range(k):
        j = i + min(int(u[i] * (n - i)), n - i - 1)
        out.append(swapped.get(j, j))
        swapped[j] = swapped.get(i, i)
    return out


@dataclass
class EdgeDraw:
    """Outcome of edge selection for one cluster pair."""

    pair: tuple[int, int]
    target: int
    edges: list
    attempts: int = 0
    filled_uniformly: int = 0


def _endpoint_chooser(members: np.ndarray, weights: np.ndarray):
    w = weights[members]
    if np.any(w > 0):
        return WeightedChooser(w)
    return WeightedChooser(np.ones(len(members)))


def select_pair_edges(members1: np.ndarray, members2: np.ndarray, weights: np.ndarray,
                      target: int, rng: RngStream, pair=(0, 0)) -> EdgeDraw:
    """Pick ``target`` distinct edges between two node sets by weighted endpoints.

    Duplicates and self-loops are rejected.  After ``REJECTION_FACTOR * target``
    attempts the remainder is drawn uniformly from the unused pairs.
    """
    same = members1 is members2 or np.array_equal(members1, members2)
    draw = EdgeDraw(tuple(pair), target, [])
    if target <= 0:
        return draw
    pick1 = _endpoint_chooser(members1, weights)
    pick2 = pick1 if same else _endpoint_chooser(members2, weights)
    chosen: set = set()
    budget = REJECTION_FACTOR * target
    while len(chosen) < target and draw.attempts < budget:
        batch = min(budget - draw.attempts, max(64, 2 * (target - len(chosen))))
        u = rng.random(2 * batch)
        ends1 = members1[pick1.pick(u[0::2])].tolist()
        ends2 = members2[pick2.pick(u[1::2])].tolist()
        for x, y in zip(ends1, ends2):
            draw.attempts += 1
            if x == y:
                continue
            edge = (x, y) if x < y else (y, x)
            if edge in chosen:
                continue
            chosen.add(edge)
            draw.edges.append(edge)
            if len(chosen) == target:
                break
    missing = target - len(chosen)
    if missing > 0:
        if same:
            ids = members1.tolist()
            pool = [(a, b) if a < b else (b, a) for a, b in combinations(ids, 2)]
        else:
            pool = [(a, b) if a < b else (b, a) for a, b in product(members1.tolist(), members2.tolist())]
        pool = sorted(set(pool) - chosen)
        for i in _sample_without_replacement(len(pool), missing, rng):
            draw.edges.append(pool[i])
            chosen.add(pool[i])
        draw.filled_uniformly = missing
    return draw


def assign_edges(node_clusters: np.ndarray, node_weights: np.ndarray, model: StatModel,
                 seed: int) -> dict:
    """Edge selection for every cluster pair; returns ``{pair: EdgeDraw}``."""
    k = model.num_clusters
    members = [np.flatnonzero(node_clusters == c) for c in range(k)]
    draws = {}
    for c1, c2 in cluster_pairs(k):
        stats = model.stats_for(c1, c2)
        target = target_edge_count(stats, len(members[c1]), len(members[c2]), c1 == c2)
        rng = RngStream(seed, stream_id("edges", c1, c2))
        draws[(c1, c2)] = select_pair_edges(members[c1], members[c2], node_weights, target, rng, (c1, c2))
    return draws


@dataclass(frozen=True)
class SyntheticNetwork:
    node_clusters: np.ndarray
    node_weights: np.ndarray
    edges: np.ndarray
    edge_draws: dict = field(repr=False)

    @property
    def num_nodes(self) -> int:
        return len(self.node_clusters)

    def cluster_sizes(self, k: int) -> list[int]:
        return np.bincount(self.node_clusters, minlength=k).tolist()


def build_network(model: StatModel, config: GenerationConfig) -> SyntheticNetwork:
    seed = config.rng_seed
    node_clusters = allocate_nodes(config, model, RngStream(seed, stream_id("allocate")))
    weights = assign_weights(node_clusters, model, RngStream(seed, stream_id("weights")))
    draws = assign_edges(node_clusters, weights, model, seed)
    edges = sorted(e for d in draws.values() for e in d.edges)
    edge_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return SyntheticNetwork(node_clusters, weights, edge_arr, draws)


@dataclass(frozen=True)
class PairTimeline:
    pair: tuple[int, int]
    starts: np.ndarray
    ends: np.ndarray
    straddled: bool = False
    discarded: int = 0

    def __len__(self) -> int:
        return len(self.starts)

    @property
    def encounters(self) -> list[tuple[int, int]]:
        return list(zip(self.starts.tolist(), self.ends.tolist()))


def check_simulatable(stats: ClusterPairStats) -> None:
    hint = "merge the sparse clusters or supply a longer source trace"
    if not len(stats.durations_s):
        raise InsufficientSamples(stats.pair, "no contact durations observed", hint)
    if not len(stats.icts_s):
        raise InsufficientSamples(
            stats.pair, "no inter-contact times observed (every node pair met only once)", hint)


def simulate_pair(pair, stats: ClusterPairStats, max_time_s: int, rng: RngStream,
                  boundary: str = DEFAULT_BOUNDARY) -> PairTimeline:
    """Renewal process for one edge.

    From ``t = 0``: draw an ICT then a duration, emit ``(t + ict, t + ict + dur)``
    and continue from its end.  The first encounter starting at or after
    ``max_time_s`` is discarded and ends the timeline.  An encounter that
    starts before ``max_time_s`` but ends after it is dropped
    (``boundary="drop"``) or has its end cut to ``max_time_s``
    (``boundary="clamp"``).  Uniforms are consumed in (ict, duration) pairs,
    so chunked drawing reproduces the one-at-a-time loop.
    """
    if boundary not in BOUNDARY_POLICIES:
        raise ValueError(f"boundary must be one of {BOUNDARY_POLICIES}")
    check_simulatable(stats)
    ict_dist = EmpiricalDistribution(stats.icts_s)
    dur_dist = EmpiricalDistribution(stats.durations_s)
    mean_step = max(ict_dist.mean() + dur_dist.mean(), 1.0)

    t = 0
    starts, ends = [], []
    discarded = 0
    while True:
        remaining = max_time_s - t
        m = int(min(remaining / mean_step * 1.25 + 16, _MAX_CHUNK))
        u = rng.random(2 * m)
        ict = ict_dist.quantile(u[0::2])
        dur = dur_dist.quantile(u[1::2])
        end = t + np.cumsum(ict + dur)
        start = end - dur
        stop = int(np.searchsorted(start, max_time_s, side="left"))
        starts.append(start[:stop])
        ends.append(end[:stop])
        if stop < m:
            discarded = 1
            break
        t = int(end[-1])

    start = np.concatenate(starts)
    end = np.concatenate(ends)
    straddling = bool(len(end) and end[-1] > max_time_s)
    if straddling:
        if boundary == "clamp":
            end[-1] = max_time_s
        else:
            start, end = start[:-1], end[:-1]
    return PairTimeline(tuple(pair), start, end, straddling, discarded)


@dataclass
class PairReport:
    clusters: tuple[int, int]
    target_edges: int
    realized_edges: int
    filled_uniformly: int = 0
    encounters: int = 0
    straddling: int = 0
    discarded: int = 0
    status: str = "ok"

    def to_dict(self) -> dict:
        return {
            "clusters": list(self.clusters),
            "target_edges": self.target_edges,
            "realized_edges": self.realized_edges,
            "filled_uniformly": self.filled_uniformly,
            "encounters": self.encounters,
            "straddling": self.straddling,
            "discarded": self.discarded,
            "status": self.status,
        }


@dataclass
class GenerationReport:
    """Diagnostics for one generation run."""

    seed: int
    cluster_node_counts: tuple
    max_time_s: int
    pairs: list
    insufficient: list
    boundary: str = DEFAULT_BOUNDARY

    @property
    def total_encounters(self) -> int:
        return sum(p.encounters for p in self.pairs)

    @property
    def generatable(self) -> bool:
        """False when some pair needed edges and every such pair lacked samples."""
        wanted = [p for p in self.pairs if p.target_edges > 0]
        return not wanted or any(p.status == "ok" for p in wanted)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "cluster_node_counts": list(self.cluster_node_counts),
            "max_time_s": self.max_time_s,
            "boundary": self.boundary,
            "total_encounters": self.total_encounters,
            "pairs": [p.to_dict() for p in self.pairs],
            "insufficient_samples": [
                {"clusters": list(e.clusters), "reason": e.reason, "hint": e.hint}
                for e in self.insufficient
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Generation:
    trace: Trace
    network: SyntheticNetwork
    report: GenerationReport


def _simulate_batch(jobs, max_time_s, seed, boundary):
    out = []
    for a, b, stats in jobs:
        rng = RngStream(seed, pair_stream_id(a, b))
        out.append(simulate_pair((a, b), stats, max_time_s, rng, boundary))
    return out


def enlarge_dataset(model: StatModel, config: GenerationConfig, threads: int = 1,
                    boundary: str = DEFAULT_BOUNDARY) -> Generation:
    """Build a synthetic network and simulate every edge; return a start-sorted trace.

    Cluster pairs that need edges but lack duration or ICT samples are
    skipped and listed in the report; the other pairs are still generated.
    """
    config.check_against(model.num_clusters)
    network = build_network(model, config)
    max_time = int(config.max_time_s)

    reports = {}
    insufficient = []
    healthy = set()
    for pair, draw in network.edge_draws.items():
        rep = PairReport(pair, draw.target, len(draw.edges), draw.filled_uniformly)
        reports[pair] = rep
        if draw.target == 0:
            continue
        try:
            check_simulatable(model.stats_for(*pair))
        except InsufficientSamples as exc:
            rep.status = "insufficient_samples"
            insufficient.append(exc)
            log.warning("%s", exc)
            continue
        healthy.add(pair)

    clusters = network.node_clusters
    jobs = []
    for a, b in network.edges.tolist():
        ca, cb = int(clusters[a]), int(clusters[b])
        pair = (min(ca, cb), max(ca, cb))
        if pair in healthy:
            jobs.append((a, b, model.stats_for(*pair)))

    threads = max(1, int(threads))
    if threads == 1 or len(jobs) < 2:
        timelines = _simulate_batch(jobs, max_time, config.rng_seed, boundary)
    else:
        size = max(1, -(-len(jobs) // (threads * 4)))
        chunks = [jobs[i:i + size] for i in range(0, len(jobs), size)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            n = len(chunks)
            parts = pool.map(_simulate_batch, chunks, [max_time] * n, [config.rng_seed] * n, [boundary] * n)
            timelines = [tl for part in parts for tl in part]

    cols_a, cols_b, cols_s, cols_e = [], [], [], []
    for tl in timelines:
        a, b = tl.pair
        ca, cb = int(clusters[a]), int(clusters[b])
        rep = reports[(min(ca, cb), max(ca, cb))]
        rep.encounters += len(tl)
        rep.straddling += int(tl.straddled)
        rep.discarded += tl.discarded
        n = len(tl)
        cols_a.append(np.full(n, a, dtype=np.int64))
        cols_b.append(np.full(n, b, dtype=np.int64))
        cols_s.append(tl.starts)
        cols_e.append(tl.ends)

    universe = frozenset(range(network.num_nodes))
    if cols_s:
        trace = Trace(np.concatenate(cols_a), np.concatenate(cols_b),
                      np.concatenate(cols_s), np.concatenate(cols_e), universe).sorted_by_start()
    else:
        trace = Trace.empty(universe)

    report = GenerationReport(
        seed=config.rng_seed,
        cluster_node_counts=config.cluster_node_counts,
        max_time_s=max_time,
        pairs=[reports[p] for p in cluster_pairs(model.num_clusters)],
        insufficient=insufficient,
        boundary=boundary,
    )
    return Generation(trace, network, report)


def synthetic_cluster_map(network: SyntheticNetwork, model: StatModel):
    """ClusterMap of the generated nodes, reusing the source's raw ids and labels."""
    return ClusterMap(
        assignment={i: int(c) for i, c in enumerate(network.node_clusters.tolist())},
        raw_ids=tuple(model.cluster_ids),
        labels=tuple(model.cluster_labels),
    )
