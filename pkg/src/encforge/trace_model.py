"""Encounter trace data model.

A trace is held column-wise (four int64 arrays) so that traces with millions
of encounters stay cheap; ``EncounterRecord`` is the per-row view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ClusterCountMismatch, NonPositiveDuration, SelfEncounter


@dataclass(frozen=True, order=True)
class EncounterRecord:
    node_a: int
    node_b: int
    start_s: int
    end_s: int

    @property
    def duration_s(self) -> int:
        return self.end_s - self.start_s


def normalize_record(raw: EncounterRecord) -> EncounterRecord:
    """Return ``raw`` with the smaller node id first.

    Raises ``SelfEncounter`` or ``NonPositiveDuration`` for degenerate records.
    """
    if raw.node_a == raw.node_b:
        raise SelfEncounter(raw.node_a)
    if raw.end_s <= raw.start_s:
        raise NonPositiveDuration(raw.start_s, raw.end_s)
    if raw.node_a > raw.node_b:
        return EncounterRecord(raw.node_b, raw.node_a, raw.start_s, raw.end_s)
    return raw


def _frozen_column(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.int64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trace:
    """Normalized encounters plus the set of participating nodes.

    Columns are read-only int64 arrays of equal length.  ``sorted`` records
    whether ``start`` is non-decreasing; it is computed, not trusted.
    """

    node_a: np.ndarray
    node_b: np.ndarray
    start: np.ndarray
    end: np.ndarray
    node_universe: frozenset = field(default_factory=frozenset)
    sorted: bool = field(init=False)

    def __post_init__(self):
        cols = [_frozen_column(c) for c in (self.node_a, self.node_b, self.start, self.end)]
        n = len(cols[0])
        if any(len(c) != n for c in cols):
            raise ValueError("trace columns differ in length")
        for name, col in zip(("node_a", "node_b", "start", "end"), cols):
            object.__setattr__(self, name, col)
        a, b, start, end = cols
        if n:
            if np.any(a >= b):
                bad = int(np.flatnonzero(a >= b)[0])
                if a[bad] == b[bad]:
                    raise SelfEncounter(int(a[bad]))
                raise ValueError("trace columns must be canonically ordered (node_a < node_b)")
            if np.any(end <= start):
                bad = int(np.flatnonzero(end <= start)[0])
                raise NonPositiveDuration(int(start[bad]), int(end[bad]))
            if start.min() < 0 or a.min() < 0:
                raise ValueError("node ids and times must be non-negative")
        universe = frozenset(int(x) for x in self.node_universe)
        seen = np.union1d(a, b)
        missing = [int(x) for x in seen if int(x) not in universe]
        if missing:
            universe = universe | frozenset(missing)
        object.__setattr__(self, "node_universe", universe)
        object.__setattr__(self, "sorted", bool(n < 2 or np.all(np.diff(start) >= 0)))

    @classmethod
    def from_records(cls, records: Iterable[EncounterRecord], node_universe: Iterable[int] = ()) -> "Trace":
        recs = [normalize_record(r) for r in records]
        if not recs:
            empty = np.empty(0, dtype=np.int64)
            return cls(empty, empty, empty, empty, frozenset(node_universe))
        arr = np.array([(r.node_a, r.node_b, r.start_s, r.end_s) for r in recs], dtype=np.int64)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], frozenset(node_universe))

    @classmethod
    def empty(cls, node_universe: Iterable[int] = ()) -> "Trace":
        return cls.from_records((), node_universe)

    def __len__(self) -> int:
        return len(self.start)

    def __iter__(self) -> Iterator[EncounterRecord]:
        cols = (c.tolist() for c in (self.node_a, self.node_b, self.start, self.end))
        for a, b, s, e in zip(*cols):
            yield EncounterRecord(a, b, s, e)

    @property
    def records(self) -> list[EncounterRecord]:
        return list(self)

    @property
    def durations(self) -> np.ndarray:
        return self.end - self.start

    def span_s(self) -> int:
        """Time from the first start to the last end (0 for an empty trace)."""
        if not len(self):
            return 0
        return int(self.end.max() - self.start.min())

    def sorted_by_start(self) -> "Trace":
        """Stable sort by start time; ties keep a deterministic pair/end order."""
        order = np.lexsort((self.end, self.node_b, self.node_a, self.start))
        return Trace(self.node_a[order], self.node_b[order], self.start[order],
                     self.end[order], self.node_universe)

    def with_universe(self, nodes: Iterable[int]) -> "Trace":
        return Trace(self.node_a, self.node_b, self.start, self.end,
                     self.node_universe | frozenset(int(n) for n in nodes))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.node_universe == other.node_universe
            and all(np.array_equal(x, y) for x, y in zip(
                (self.node_a, self.node_b, self.start, self.end),
                (other.node_a, other.node_b, other.start, other.end)))
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Trace({len(self)} records, {len(self.node_universe)} nodes, sorted={self.sorted})"


@dataclass(frozen=True)
class ClusterMap:
    """Total assignment of nodes to dense cluster indices ``0..K-1``.

    ``raw_ids`` keeps the cluster ids as they appeared in the input file and
    ``labels`` the optional human-readable names, both indexed by dense id.
    """

    assignment: Mapping[int, int]
    raw_ids: tuple[int, ...]
    labels: tuple[str | None, ...] = ()

    def __post_init__(self):
        k = len(self.raw_ids)
        if not self.labels:
            object.__setattr__(self, "labels", (None,) * k)
        if len(self.labels) != k:
            raise ValueError("one label slot per cluster required")
        if any(not 0 <= c < k for c in self.assignment.values()):
            raise ValueError("cluster indices must be dense 0..K-1")

    @property
    def num_clusters(self) -> int:
        return len(self.raw_ids)

    @property
    def sizes(self) -> tuple[int, ...]:
        counts = [0] * self.num_clusters
        for c in self.assignment.values():
            counts[c] += 1
        return tuple(counts)

    @property
    def nodes(self) -> frozenset:
        return frozenset(self.assignment)

    def cluster_of(self, node: int) -> int:
        return self.assignment[node]

    def lookup(self, nodes: np.ndarray) -> np.ndarray:
        """Vectorized ``cluster_of`` for an array of node ids."""
        keys = np.fromiter(self.assignment.keys(), dtype=np.int64, count=len(self.assignment))
        vals = np.fromiter(self.assignment.values(), dtype=np.int64, count=len(self.assignment))
        order = np.argsort(keys)
        keys, vals = keys[order], vals[order]
        pos = np.searchsorted(keys, nodes)
        pos = np.minimum(pos, len(keys) - 1)
        if len(nodes) and not np.array_equal(keys[pos], nodes):
            raise KeyError("node without cluster assignment")
        return vals[pos]


@dataclass(frozen=True)
class GenerationConfig:
    """Parameters for one synthetic trace: per-cluster node counts, horizon, seed."""

    cluster_node_counts: tuple[int, ...]
    max_time_s: int
    rng_seed: int = 0

    def __post_init__(self):
        counts = tuple(int(c) for c in self.cluster_node_counts)
        object.__setattr__(self, "cluster_node_counts", counts)
        if not counts or any(c <= 0 for c in counts):
            raise ValueError("cluster node counts must be positive integers")
        if int(self.max_time_s) <= 0:
            raise ValueError("max_time_s must be positive")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must fit in an unsigned 64-bit integer")

    @property
    def total_nodes(self) -> int:
        return sum(self.cluster_node_counts)

    def check_against(self, num_clusters: int) -> None:
        if len(self.cluster_node_counts) != num_clusters:
            raise ClusterCountMismatch(num_clusters, len(self.cluster_node_counts))


def split_by_ratio(total: int, ratios: Sequence[int]) -> tuple[int, ...]:
    """Largest-remainder apportionment of ``total`` items over ``ratios``.

    Ties in the remainder go to the lower index.

    >>> split_by_ratio(7, [1, 1])
    (4, 3)
    """
    weight = sum(ratios)
    if weight <= 0:
        raise ValueError("ratios must have positive sum")
    floors = [total * r // weight for r in ratios]
    remainders = [total * r % weight for r in ratios]
    leftover = total - sum(floors)
    order = sorted(range(len(ratios)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        floors[i] += 1
    return tuple(floors)
