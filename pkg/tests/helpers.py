from fractions import Fraction
from itertools import combinations

import numpy as np
from ganc.graph import from_edges
from ganc.testkit import random_connected_graph


def nassoc_oracle(edges, labels):
    """Exact NAssoc straight from an edge list, with rational arithmetic."""
    deg = {}
    internal = {}
    for u, v, w in edges:
        w = Fraction(w)
        deg[u] = deg.get(u, 0) + w
        if u != v:
            deg[v] = deg.get(v, 0) + w
        if labels[u] == labels[v]:
            c = labels[u]
            internal[c] = internal.get(c, 0) + (w if u == v else 2 * w)
    cdeg = {}
    for u, d in deg.items():
        cdeg[labels[u]] = cdeg.get(labels[u], 0) + d
    return sum(Fraction(internal.get(c, 0)) / cdeg[c] for c in cdeg)


def pair_enumeration_jaccard(x, y):
    a = b = c = 0
    for i, j in combinations(range(len(x)), 2):
        sx, sy = x[i] == x[j], y[i] == y[j]
        a += sx and sy
        b += sx and not sy
        c += sy and not sx
    return a, b, c


def path(n):
    return from_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)])


def random_graphs(count, n_lo, n_hi, seed, weights="unit", p=0.3):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        yield random_connected_graph(n, p, rng, weights=weights)
