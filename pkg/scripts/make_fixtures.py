"""Regenerate the bundled test traces under tests/fixtures/.

The traces are synthetic stand-ins for a campus encounter dataset: nodes in
labelled groups, group-dependent contact probabilities, log-normal contact
durations and heavy-tailed gaps with per-pair rate heterogeneity.  They are
produced by a process unrelated to encforge's generator.

    python scripts/make_fixtures.py
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
LABELS = ("graduate", "faculty", "staff")


def make(name, sizes, edge_prob, dur_mu, gap_mu, span, seed, id_offset=1):
    rng = np.random.default_rng(seed)
    clusters = np.repeat(np.arange(len(sizes)), sizes)
    ids = rng.permutation(len(clusters)) + id_offset
    rows = []
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            ci, cj = sorted((clusters[i], clusters[j]))
            if rng.random() >= edge_prob[ci][cj]:
                continue
            rate = rng.lognormal(0.0, 0.35)
            t = rng.uniform(0, np.exp(gap_mu[ci][cj]))
            while True:
                dur = max(1, int(round(rng.lognormal(dur_mu[ci][cj], 1.0))))
                start = int(t)
                if start >= span:
                    break
                end = min(start + dur, span)
                if end > start:
                    rows.append((ids[i], ids[j], start, end))
                gap = rng.lognormal(gap_mu[ci][cj], 1.1) / rate
                t = end + gap
    rows.sort(key=lambda r: (r[2], r[0], r[1]))
    with open(OUT / f"{name}.trace", "w") as fh:
        fh.write(f"# {name}: synthetic campus-style encounter trace (node_a node_b start end)\n")
        for a, b, s, e in rows:
            a, b = sorted((int(a), int(b)))
            fh.write(f"{a} {b} {s} {e}\n")
    with open(OUT / f"{name}.clusters", "w") as fh:
        fh.write("# node cluster label\n")
        for node, c in sorted(zip(ids.tolist(), clusters.tolist())):
            fh.write(f"{node} {c} {LABELS[c]}\n")
    print(name, len(rows), "encounters")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    prob = [[0.45, 0.20, 0.12], [0.20, 0.40, 0.18], [0.12, 0.18, 0.50]]
    dur = [[6.0, 5.5, 5.0], [5.5, 6.3, 5.2], [5.0, 5.2, 5.8]]
    gap = [[9.6, 10.2, 10.4], [10.2, 9.8, 10.3], [10.4, 10.3, 9.9]]
    make("campus40", (18, 12, 10), prob, dur, [[g + 0.25 for g in row] for row in gap], span=1_200_000, seed=40)
    make("milano44", (22, 12, 10), prob, dur, gap, span=600_000, seed=44)
