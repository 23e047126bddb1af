"""Graph generators shared by the test modules."""

import numpy as np

from graphheat import from_edge_list


def path_graph(n, weight=1.0):
    return from_edge_list([(i, i + 1, weight) for i in range(n - 1)], n)


def cycle_graph(n):
    return from_edge_list([(i, (i + 1) % n, 1.0) for i in range(n)], n)


def random_graph(rng, n, extra=1.0, components=1, weighted=True, wmin=0.5, wmax=1.5):
    """Random spanning forest with ``components`` trees plus ``extra * n`` chords per tree."""
    edges = {}
    for block in np.array_split(np.arange(n), components):
        for a in range(1, len(block)):
            i, j = int(block[a]), int(block[rng.integers(0, a)])
            edges[(min(i, j), max(i, j))] = None
        if len(block) > 2:
            for _ in range(int(extra * len(block))):
                i, j = (int(v) for v in rng.choice(block, 2, replace=False))
                edges[(min(i, j), max(i, j))] = None
    out = []
    for i, j in sorted(edges):
        w = float(rng.uniform(wmin, wmax)) if weighted else 1.0
        out.append((i, j, w))
    return from_edge_list(out, n)


def random_tree(rng, n):
    return random_graph(rng, n, extra=0.0)


def dense_eigenvalues(g):
    from graphheat import build_laplacian

    return np.linalg.eigvalsh(build_laplacian(g).toarray())
