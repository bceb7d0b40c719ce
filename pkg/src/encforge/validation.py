"""Real-vs-synthetic comparison of duration and inter-contact-time CDFs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .analysis import pair_gaps, cluster_pairs
from .errors import EmptyValues, MetricMismatch
from .trace_model import ClusterMap, Trace

DURATION = "duration"
ICT = "ict"
METRICS = (DURATION, ICT)

DEFAULT_WINDOWS = {DURATION: 250_000, ICT: 1_200_000}
DEFAULT_MAX_POINTS = 1000


def extract_metric(trace: Trace, metric: str) -> np.ndarray:
    """Durations per record, or ICTs pooled over all node pairs (negatives clamped)."""
    if metric == DURATION:
        return np.asarray(trace.durations)
    if metric == ICT:
        if not len(trace):
            return np.empty(0, dtype=np.int64)
        return np.maximum(pair_gaps(trace)[2], 0)
    raise ValueError(f"unknown metric {metric!r}")


def extract_metric_by_pair(trace: Trace, clusters: ClusterMap, metric: str) -> dict:
    """Same as ``extract_metric`` but split by unordered cluster pair."""
    k = clusters.num_clusters
    out = {p: np.empty(0, dtype=np.int64) for p in cluster_pairs(k)}
    if not len(trace):
        return out
    if metric == DURATION:
        a, b, values = trace.node_a, trace.node_b, trace.durations
    elif metric == ICT:
        a, b, values = pair_gaps(trace)
        values = np.maximum(values, 0)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    ca, cb = clusters.lookup(a), clusters.lookup(b)
    lo, hi = np.minimum(ca, cb), np.maximum(ca, cb)
    for p in out:
        out[p] = values[(lo == p[0]) & (hi == p[1])]
    return out


@dataclass(frozen=True)
class CdfTable:
    """Windowed ECDF points ``(x, F(x))``.

    ``F`` counts every value, in-window or not, in its denominator, so a curve
    whose mass extends past the window tops out below 1.
    """

    metric: str
    window_s: int
    points: tuple
    total: int = 0

    def __post_init__(self):
        xs = [x for x, _ in self.points]
        fs = [f for _, f in self.points]
        if any(x > self.window_s for x in xs):
            raise ValueError("CDF point beyond window")
        if any(b < a for a, b in zip(fs, fs[1:])) or any(not 0 <= f <= 1 for f in fs):
            raise ValueError("CDF must be non-decreasing within [0, 1]")

    def at(self, x) -> float:
        """Step-function value of the table at ``x``."""
        xs = [p[0] for p in self.points]
        i = np.searchsorted(xs, x, side="right")
        return 0.0 if i == 0 else self.points[i - 1][1]

    def to_csv(self) -> str:
        lines = ["x_seconds,cdf"]
        lines.extend(f"{x},{f!r}" for x, f in self.points)
        return "\n".join(lines) + "\n"


def cdf_table(values: Sequence[int], window_s: int | None = None, max_points: int = DEFAULT_MAX_POINTS,
              metric: str = DURATION) -> CdfTable:
    """ECDF at every distinct value ``<= window_s``, thinned to about ``max_points``.

    ``window_s`` defaults to the metric's entry in ``DEFAULT_WINDOWS``.

    Thinning keeps, for each level ``j / max_points``, the first point whose F
    reaches it, plus the last in-window point.  Between kept points the true
    ECDF therefore rises by less than ``1 / max_points``.
    """
    if window_s is None:
        window_s = DEFAULT_WINDOWS[metric]
    vals = np.sort(np.asarray(values, dtype=np.int64).reshape(-1))
    n = len(vals)
    if n == 0:
        raise EmptyValues()
    if window_s <= 0 or max_points <= 0:
        raise ValueError("window and max_points must be positive")
    xs, counts = np.unique(vals[vals <= window_s], return_counts=True)
    cum = np.cumsum(counts)
    if len(xs) > max_points:
        # smallest index reaching each level; integer arithmetic avoids rounding drift
        levels = -(-np.arange(1, max_points + 1) * n // max_points)
        keep = np.unique(np.searchsorted(cum, levels, side="left"))
        keep = keep[keep < len(xs)]
        keep = np.union1d(keep, [len(xs) - 1])
        xs, cum = xs[keep], cum[keep]
    points = tuple((int(x), int(c) / n) for x, c in zip(xs, cum))
    return CdfTable(metric, int(window_s), points, n)


def _ks_values(a: np.ndarray, b: np.ndarray, window_s: int | None) -> float:
    a = np.sort(np.asarray(a, dtype=np.int64).reshape(-1))
    b = np.sort(np.asarray(b, dtype=np.int64).reshape(-1))
    na, nb = len(a), len(b)
    if not na or not nb:
        raise EmptyValues()
    support = np.union1d(a, b)
    if window_s is not None:
        support = support[support <= window_s]
        if not len(support):
            return 0.0
    ca = np.searchsorted(a, support, side="right")
    cb = np.searchsorted(b, support, side="right")
    # exact integer numerator before the single division
    return float(np.max(np.abs(ca * nb - cb * na))) / (na * nb)


def _ks_tables(a: CdfTable, b: CdfTable) -> float:
    if a.metric != b.metric or a.window_s != b.window_s:
        raise MetricMismatch(f"cannot compare {a.metric}@{a.window_s} with {b.metric}@{b.window_s}")
    support = sorted({x for x, _ in a.points} | {x for x, _ in b.points})
    if not support:
        return 0.0
    return max(abs(a.at(x) - b.at(x)) for x in support)


CdfInput = Union[CdfTable, Sequence[int], np.ndarray]


def ks_distance(a: CdfInput, b: CdfInput, window_s: int | None = None) -> float:
    """Two-sample Kolmogorov-Smirnov statistic ``sup_x |F_a(x) - F_b(x)|``.

    Accepts two raw value lists (optionally restricted to ``x <= window_s``)
    or two ``CdfTable`` objects of the same metric and window.
    """
    if isinstance(a, CdfTable) or isinstance(b, CdfTable):
        if not (isinstance(a, CdfTable) and isinstance(b, CdfTable)):
            raise MetricMismatch("compare two tables or two value lists, not a mix")
        return _ks_tables(a, b)
    return _ks_values(a, b, window_s)


@dataclass
class MetricComparison:
    metric: str
    window_s: int | None
    ks_distance: float | None
    real_count: int
    synthetic_count: int

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "window_s": self.window_s,
            "ks_distance": self.ks_distance,
            "real_count": self.real_count,
            "synthetic_count": self.synthetic_count,
        }


@dataclass
class ComparisonReport:
    windows: dict
    aggregate: dict
    per_cluster_pair: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "windows": dict(self.windows),
            "aggregate": {m: c.to_dict() for m, c in self.aggregate.items()},
            "per_cluster_pair": [
                {"clusters": list(p), "metrics": {m: c.to_dict() for m, c in row.items()}}
                for p, row in self.per_cluster_pair
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _compare(metric, real, syn, window) -> MetricComparison:
    ks = _ks_values(real, syn, window) if len(real) and len(syn) else None
    return MetricComparison(metric, window, ks, int(len(real)), int(len(syn)))


def compare_traces(real: Trace, synthetic: Trace, windows: dict | None = None,
                   real_clusters: ClusterMap | None = None,
                   synthetic_clusters: ClusterMap | None = None) -> ComparisonReport:
    """KS distance of each metric within its window, pooled and optionally per cluster pair.

    A metric with no values on either side reports ``ks_distance = None``.
    """
    windows = {**DEFAULT_WINDOWS, **(windows or {})}
    aggregate = {
        m: _compare(m, extract_metric(real, m), extract_metric(synthetic, m), windows[m])
        for m in METRICS
    }
    per_pair = []
    if real_clusters is not None and synthetic_clusters is not None:
        if real_clusters.num_clusters != synthetic_clusters.num_clusters:
            raise MetricMismatch("real and synthetic cluster maps differ in cluster count")
        split = {
            m: (extract_metric_by_pair(real, real_clusters, m),
                extract_metric_by_pair(synthetic, synthetic_clusters, m))
            for m in METRICS
        }
        for p in cluster_pairs(real_clusters.num_clusters):
            per_pair.append((p, {m: _compare(m, split[m][0][p], split[m][1][p], windows[m]) for m in METRICS}))
    return ComparisonReport(windows, aggregate, per_pair)
