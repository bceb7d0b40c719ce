from collections import defaultdict
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from conftest import random_trace
from encforge.analysis import (ClusterPairStats, StatModel, build_contact_graph, build_stat_model,
                               cluster_pairs, compute_edge_density, compute_pair_icts,
                               degree_distribution)
from encforge.ingest import parse_clusters, parse_trace
from encforge.trace_model import ClusterMap, EncounterRecord, Trace

A, B = 1, 2


def brute_force_icts(trace):
    """Per-pair re-sort and diff, written without numpy."""
    by_pair = defaultdict(list)
    for r in trace:
        by_pair[(r.node_a, r.node_b)].append((r.start_s, r.end_s))
    out = {}
    for pair, encs in by_pair.items():
        encs.sort()
        out[pair] = [max(0, nxt[0] - prev[1]) for prev, nxt in zip(encs, encs[1:])]
    return out


def trace_of(*rows):
    return Trace.from_records(EncounterRecord(*r) for r in rows)


def test_contact_graph_counts():
    g = build_contact_graph(trace_of((1, 2, 0, 10), (1, 2, 20, 30), (2, 3, 5, 9)))
    assert g.edge_weights == {(1, 2): 2, (2, 3): 1}


def test_contact_graph_empty():
    g = build_contact_graph(Trace.empty())
    assert g.edge_weights == {}


def test_contact_graph_fixture_has_all_nodes(campus):
    trace, _ = campus
    assert build_contact_graph(trace).nodes == trace.node_universe


def test_milano_shaped_fixture_has_44_nodes():
    from conftest import FIXTURES
    from encforge.ingest import read_trace_file
    g = build_contact_graph(read_trace_file(FIXTURES / "milano44.trace"))
    assert len(g.nodes) == 44


def test_pair_icts_hand_trace():
    assert compute_pair_icts(trace_of((A, B, 10, 20), (A, B, 50, 60))) == {(A, B): [30]}


def test_pair_icts_single_encounter():
    assert compute_pair_icts(trace_of((A, B, 0, 5))) == {(A, B): []}


def test_pair_icts_overlap_clamped():
    t = trace_of((A, B, 0, 100), (A, B, 50, 60))
    assert compute_pair_icts(t) == {(A, B): [0]}
    assert compute_pair_icts(t, clamp=False) == {(A, B): [-50]}


def test_pair_icts_match_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(300):
        t = random_trace(rng)
        assert compute_pair_icts(t) == brute_force_icts(t)


def test_stat_model_single_cluster():
    t = trace_of((1, 2, 0, 10), (1, 2, 50, 60))
    m = build_stat_model(t, ClusterMap({1: 0, 2: 0}, raw_ids=(0,)))
    s = m.stats_for(0, 0)
    assert s.durations_s.tolist() == [10, 10]
    assert s.icts_s.tolist() == [40]


def test_stat_model_cross_cluster_single_record():
    t = trace_of((1, 2, 0, 7))
    m = build_stat_model(t, ClusterMap({1: 0, 2: 1}, raw_ids=(0, 1)))
    s = m.stats_for(1, 0)
    assert s.pair == (0, 1)
    assert s.durations_s.tolist() == [7]
    assert s.icts_s.tolist() == []
    assert len(m.pair_stats) == 3


def test_stat_model_fixture_has_six_pairs(campus_model):
    assert campus_model.num_clusters == 3
    assert len(campus_model.pair_stats) == 6
    assert len(campus_model.degree_samples) == 40


def test_edge_density_complete_bipartite():
    cm = ClusterMap({1: 0, 2: 0, 3: 1, 4: 1, 5: 1}, raw_ids=(0, 1))
    t = trace_of(*[(a, b, 0, 1) for a in (1, 2) for b in (3, 4, 5)])
    assert compute_edge_density(build_contact_graph(t), cm, 0, 1) == 1


def test_edge_density_no_contacts():
    cm = ClusterMap({1: 0, 2: 1, 3: 0}, raw_ids=(0, 1))
    t = trace_of((1, 3, 0, 1))
    assert compute_edge_density(build_contact_graph(t), cm, 0, 1) == 0


def test_edge_density_same_cluster():
    cm = ClusterMap({n: 0 for n in range(4)}, raw_ids=(0,))
    t = trace_of((0, 1, 0, 1), (0, 2, 0, 1), (2, 3, 4, 5), (2, 3, 9, 10))
    assert compute_edge_density(build_contact_graph(t), cm, 0, 0) == Fraction(1, 2)


def test_edge_density_degenerate_cluster_is_zero():
    cm = ClusterMap({1: 0, 2: 1}, raw_ids=(0, 1))
    assert compute_edge_density(build_contact_graph(trace_of((1, 2, 0, 1))), cm, 0, 0) == 0


def test_degree_distribution_examples():
    t = trace_of(*[(1, 2, i, i + 1) for i in range(5)], (2, 3, 0, 1))
    assert degree_distribution(build_contact_graph(t), t) == [1, 2, 1]
    empty = Trace.empty(node_universe=[1, 2])
    assert degree_distribution(build_contact_graph(empty), empty) == [0, 0]
    star = trace_of(*[(0, k, 0, 1) for k in range(1, 5)])
    assert degree_distribution(build_contact_graph(star), star) == [4, 1, 1, 1, 1]


def test_isolated_cluster_members_get_degree_zero():
    t = parse_trace("1 2 0 1\n")
    cm = parse_clusters("1 0\n2 0\n3 1\n", t)
    m = build_stat_model(t, cm)
    assert m.degree_samples.tolist() == [0, 1, 1]
    assert m.stats_for(0, 1).possible_pairs == 2


def test_model_invariants_on_random_traces():
    rng = np.random.default_rng(11)
    for _ in range(200):
        t = random_trace(rng)
        nodes = sorted(t.node_universe)
        k = int(rng.integers(1, 4))
        cm = ClusterMap({n: int(rng.integers(0, k)) for n in nodes}, raw_ids=tuple(range(k)))
        if len(set(cm.assignment.values())) < k:
            continue
        m = build_stat_model(t, cm)
        assert sum(len(s.durations_s) for s in m.pair_stats.values()) == len(t)
        counts = defaultdict(int)
        for r in t:
            counts[(r.node_a, r.node_b)] += 1
        assert sum(len(s.icts_s) for s in m.pair_stats.values()) == sum(max(0, c - 1) for c in counts.values())
        graph = build_contact_graph(t)
        for c1, c2 in cluster_pairs(k):
            d = compute_edge_density(graph, cm, c1, c2)
            assert d == compute_edge_density(graph, cm, c2, c1)
            assert m.stats_for(c1, c2).edge_density == d
            assert 0 <= d <= 1
        for s in m.pair_stats.values():
            assert np.all(s.durations_s >= 1)
            assert np.all(s.icts_s >= 0)
        assert len(m.degree_samples) == len(t.node_universe)


def test_model_counts_clamped_overlaps():
    t = trace_of((1, 2, 0, 100), (1, 2, 50, 60), (1, 2, 200, 201))
    m = build_stat_model(t, ClusterMap({1: 0, 2: 0}, raw_ids=(0,)))
    assert m.clamped_icts == 1
    assert m.stats_for(0, 0).icts_s.tolist() == [0, 140]


def test_model_json_roundtrip(campus_model):
    again = StatModel.from_json(campus_model.to_json())
    assert again.to_json() == campus_model.to_json()
    assert again.stats_for(0, 2).edge_density == campus_model.stats_for(0, 2).edge_density


def test_model_json_arrays_sorted(campus_model):
    d = campus_model.to_dict()
    for entry in d["pairs"]:
        assert entry["durations_s"] == sorted(entry["durations_s"])
        assert entry["icts_s"] == sorted(entry["icts_s"])
    assert d["degree_samples"] == sorted(d["degree_samples"])


def test_pair_stats_reject_bad_samples():
    with pytest.raises(ValueError):
        ClusterPairStats((0, 0), [0, 3], [], 1, 1)
    with pytest.raises(ValueError):
        ClusterPairStats((0, 0), [3], [-1], 1, 1)
