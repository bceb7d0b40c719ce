"""Reading and writing encounter traces and cluster files.

Trace lines are ``node_a node_b start_s end_s`` separated by any run of
spaces or tabs.  Cluster lines are ``node_id cluster_id [label]``.  Lines
starting with ``#`` and blank lines are skipped in both.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

import numpy as np

from .errors import (DuplicateNode, InvalidRecord, MissingNode, NonPositiveDuration,
                     ParseError, SelfEncounter)
from .trace_model import ClusterMap, EncounterRecord, Trace, normalize_record

log = logging.getLogger(__name__)

COMMENT_PREFIX = "#"

Source = Union[str, bytes, IO]


@dataclass
class IngestStats:
    """Counts of records dropped under ``skip_invalid``."""

    self_encounters: int = 0
    non_positive: int = 0
    skipped_lines: list = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return self.self_encounters + self.non_positive


def _lines(source: Source) -> Iterable[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        return io.StringIO(source)
    first = source.read()
    if isinstance(first, bytes):
        first = first.decode("utf-8")
    return io.StringIO(first)


def _parse_uint(token: str, line_no: int, what: str) -> int:
    if token.isascii() and token.isdigit():
        value = int(token)
        if value >= 2**62:
            raise ParseError(line_no, f"{what} {token!r} is out of range")
        return value
    if token.startswith("-") and token[1:].isdigit():
        raise ParseError(line_no, f"{what} {token!r} is negative")
    raise ParseError(line_no, f"{what} {token!r} is not a non-negative integer")


def parse_trace(source: Source, skip_invalid: bool = False, stats: IngestStats | None = None) -> Trace:
    """Parse a four-column encounter file into a normalized ``Trace``.

    Records keep file order.  Self-encounters and zero/negative durations are
    errors unless ``skip_invalid`` is set, in which case they are counted in
    ``stats`` and logged.
    """
    if stats is None:
        stats = IngestStats()
    rows = []
    for line_no, line in enumerate(_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith(COMMENT_PREFIX):
            continue
        parts = text.split()
        if len(parts) != 4:
            raise ParseError(line_no, "expected 4 columns")
        a, b = (_parse_uint(p, line_no, "node id") for p in parts[:2])
        start, end = (_parse_uint(p, line_no, "time") for p in parts[2:])
        try:
            rec = normalize_record(EncounterRecord(a, b, start, end))
        except InvalidRecord:
            if a == b:
                exc = SelfEncounter(a, line_no)
                if not skip_invalid:
                    raise exc from None
                stats.self_encounters += 1
            else:
                exc = NonPositiveDuration(start, end, line_no)
                if not skip_invalid:
                    raise exc from None
                stats.non_positive += 1
            stats.skipped_lines.append(line_no)
            log.warning("skipping line %d: %s", line_no, exc)
            continue
        rows.append((rec.node_a, rec.node_b, rec.start_s, rec.end_s))
    if not rows:
        return Trace.empty()
    arr = np.array(rows, dtype=np.int64)
    return Trace(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])


def parse_clusters(source: Source, trace: Trace | None = None) -> ClusterMap:
    """Parse a cluster file and check it covers every node of ``trace``.

    Raw cluster ids are re-indexed densely in ascending order.  Nodes listed
    in the file but absent from the trace are kept (they are isolated
    participants).
    """
    raw_assignment: dict[int, int] = {}
    labels: dict[int, str] = {}
    for line_no, line in enumerate(_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith(COMMENT_PREFIX):
            continue
        parts = text.split(None, 2)
        if len(parts) < 2:
            raise ParseError(line_no, "expected node id and cluster id")
        node = _parse_uint(parts[0], line_no, "node id")
        cluster = _parse_uint(parts[1], line_no, "cluster id")
        if node in raw_assignment:
            raise DuplicateNode(node, line_no)
        raw_assignment[node] = cluster
        if len(parts) == 3:
            label = parts[2].strip()
            if cluster in labels and labels[cluster] != label:
                log.warning("line %d: cluster %d relabelled %r -> %r", line_no, cluster, labels[cluster], label)
            labels.setdefault(cluster, label)
    if trace is not None:
        for node in sorted(trace.node_universe):
            if node not in raw_assignment:
                raise MissingNode(node)
    raw_ids = tuple(sorted(set(raw_assignment.values())))
    dense = {raw: i for i, raw in enumerate(raw_ids)}
    return ClusterMap(
        assignment={n: dense[c] for n, c in raw_assignment.items()},
        raw_ids=raw_ids,
        labels=tuple(labels.get(raw) for raw in raw_ids),
    )


def format_trace(trace: Trace) -> str:
    cols = (c.tolist() for c in (trace.node_a, trace.node_b, trace.start, trace.end))
    return "".join(f"{a}\t{b}\t{s}\t{e}\n" for a, b, s, e in zip(*cols))


def write_trace(trace: Trace, sink: IO) -> None:
    """Write one tab-separated line per record, in the trace's current order."""
    text = format_trace(trace)
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))


def format_clusters(clusters: ClusterMap) -> str:
    out = []
    for node in sorted(clusters.assignment):
        c = clusters.assignment[node]
        label = clusters.labels[c]
        raw = clusters.raw_ids[c]
        out.append(f"{node}\t{raw}\t{label}\n" if label else f"{node}\t{raw}\n")
    return "".join(out)


def read_trace_file(path, skip_invalid: bool = False, stats: IngestStats | None = None) -> Trace:
    with open(path, "rb") as fh:
        return parse_trace(fh, skip_invalid=skip_invalid, stats=stats)


def read_clusters_file(path, trace: Trace | None = None) -> ClusterMap:
    with open(path, "rb") as fh:
        return parse_clusters(fh, trace)


def write_trace_file(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_trace(trace))
