import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from encforge.errors import EmptyValues, MetricMismatch
from encforge.trace_model import ClusterMap, EncounterRecord, Trace
from encforge.validation import (DEFAULT_WINDOWS, CdfTable, cdf_table, compare_traces, extract_metric,
                                 extract_metric_by_pair, ks_distance)


def brute_ks(a, b, window=None):
    """Evaluate both step ECDFs at every integer of the joint range."""
    hi = max(max(a), max(b)) if window is None else min(window, max(max(a), max(b)))
    lo = min(min(a), min(b))
    best = 0.0
    for x in range(lo, hi + 1):
        fa = sum(v <= x for v in a) / len(a)
        fb = sum(v <= x for v in b) / len(b)
        best = max(best, abs(fa - fb))
    return best


def trace_of(*rows):
    return Trace.from_records(EncounterRecord(*r) for r in rows)


def test_extract_metric_examples():
    t = trace_of((1, 2, 0, 10))
    assert extract_metric(t, "duration").tolist() == [10]
    assert extract_metric(t, "ict").tolist() == []
    t = trace_of((1, 2, 0, 10), (1, 2, 25, 30))
    assert extract_metric(t, "ict").tolist() == [15]
    with pytest.raises(ValueError):
        extract_metric(t, "speed")


def test_cdf_table_window_keeps_out_of_window_mass():
    table = cdf_table([10, 20, 30], 25)
    assert table.points == ((10, 1 / 3), (20, 2 / 3))


def test_cdf_table_full_window_reaches_one():
    assert cdf_table([10, 20, 30], 30).points[-1] == (30, 1.0)
    assert cdf_table([5, 5, 7], 1000).points == ((5, 2 / 3), (7, 1.0))


def test_cdf_table_empty():
    with pytest.raises(EmptyValues):
        cdf_table([], 10)


def test_default_windows():
    assert DEFAULT_WINDOWS == {"duration": 250_000, "ict": 1_200_000}


def test_csv_format():
    assert cdf_table([1, 3], 10).to_csv() == "x_seconds,cdf\n1,0.5\n3,1.0\n"


def test_ks_examples():
    assert ks_distance([1, 2, 3], [1, 2, 3]) == 0
    assert ks_distance([1, 1], [9, 9]) == 1.0
    assert ks_distance([1, 2, 3, 4], [1, 2, 3, 8]) == 0.25


def test_ks_table_mismatch():
    with pytest.raises(MetricMismatch):
        ks_distance(cdf_table([1], 10, metric="duration"), cdf_table([1], 10, metric="ict"))
    with pytest.raises(MetricMismatch):
        ks_distance(cdf_table([1], 10), cdf_table([1], 11))
    with pytest.raises(MetricMismatch):
        ks_distance(cdf_table([1], 10), [1, 2])


values = st.lists(st.integers(0, 60), min_size=1, max_size=40)


@settings(max_examples=150, deadline=None)
@given(values, values, st.one_of(st.none(), st.integers(1, 60)))
def test_ks_matches_brute_force(a, b, window):
    assert ks_distance(a, b, window) == pytest.approx(brute_ks(a, b, window), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(values, values)
def test_ks_symmetric_and_zero_on_self(a, b):
    assert ks_distance(a, b) == ks_distance(b, a)
    assert ks_distance(a, a) == 0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 5000), min_size=1, max_size=400), st.integers(100, 6000), st.integers(1, 50))
def test_cdf_table_monotone_and_bounded(vals, window, max_points):
    t = cdf_table(vals, window, max_points)
    fs = [f for _, f in t.points]
    assert fs == sorted(fs)
    assert all(0 < f <= 1 for f in fs)
    assert all(x <= window for x, _ in t.points)
    if window >= max(vals):
        assert fs[-1] == 1.0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 3000), min_size=1, max_size=300),
       st.lists(st.integers(0, 3000), min_size=1, max_size=300),
       st.integers(50, 3000), st.integers(1, 40))
def test_table_path_within_thinning_bound(a, b, window, max_points):
    direct = ks_distance(a, b, window)
    tabled = ks_distance(cdf_table(a, window, max_points), cdf_table(b, window, max_points))
    assert abs(direct - tabled) <= 1 / max_points + 1e-12


def test_table_rejects_bad_points():
    with pytest.raises(ValueError):
        CdfTable("duration", 10, ((1, 0.5), (2, 0.4)))
    with pytest.raises(ValueError):
        CdfTable("duration", 10, ((11, 0.5),))


def test_compare_trace_with_itself(campus):
    trace, clusters = campus
    rep = compare_traces(trace, trace, real_clusters=clusters, synthetic_clusters=clusters)
    assert rep.windows == DEFAULT_WINDOWS
    for c in rep.aggregate.values():
        assert c.ks_distance == 0
        assert c.real_count == c.synthetic_count > 0
    assert len(rep.per_cluster_pair) == 6
    for _, row in rep.per_cluster_pair:
        assert all(c.ks_distance == 0 for c in row.values())
    d = rep.to_dict()
    assert d["aggregate"]["duration"]["window_s"] == 250_000
    assert d["aggregate"]["ict"]["window_s"] == 1_200_000


def test_compare_reports_missing_metric_as_none():
    t = trace_of((1, 2, 0, 10))
    rep = compare_traces(t, t)
    assert rep.aggregate["ict"].ks_distance is None
    assert rep.aggregate["duration"].ks_distance == 0


def test_extract_by_pair_partitions_values(campus):
    trace, clusters = campus
    for metric in ("duration", "ict"):
        parts = extract_metric_by_pair(trace, clusters, metric)
        pooled = np.sort(np.concatenate(list(parts.values())))
        assert np.array_equal(pooled, np.sort(extract_metric(trace, metric)))
