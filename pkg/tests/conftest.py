from pathlib import Path

import numpy as np
import pytest

from encforge.analysis import build_stat_model
from encforge.ingest import read_clusters_file, read_trace_file
from encforge.trace_model import EncounterRecord, Trace

FIXTURES = Path(__file__).parent / "fixtures"


def random_trace(rng: np.random.Generator, max_nodes=10, max_records=50, max_time=1000, overlap=True):
    """Small random valid trace; node ids need not be contiguous."""
    n_nodes = int(rng.integers(2, max_nodes + 1))
    ids = rng.choice(10_000, size=n_nodes, replace=False)
    n = int(rng.integers(0, max_records + 1))
    recs = []
    for _ in range(n):
        a, b = rng.choice(ids, size=2, replace=False)
        start = int(rng.integers(0, max_time))
        end = start + int(rng.integers(1, 200 if overlap else 20))
        recs.append(EncounterRecord(int(a), int(b), start, end))
    return Trace.from_records(recs)


@pytest.fixture(scope="session")
def campus_paths():
    return FIXTURES / "campus40.trace", FIXTURES / "campus40.clusters"


@pytest.fixture(scope="session")
def campus(campus_paths):
    trace_path, clusters_path = campus_paths
    trace = read_trace_file(trace_path)
    clusters = read_clusters_file(clusters_path, trace)
    return trace, clusters


@pytest.fixture(scope="session")
def campus_model(campus):
    return build_stat_model(*campus)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
