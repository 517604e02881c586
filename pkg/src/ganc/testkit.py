"""Benchmark graphs with ground truth and exhaustive verification oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Iterator

import numpy as np

from .agglomerate import Dendrogram, merge_gain
from .graph import GraphError, NodeIdMap, WeightedGraph, from_arrays, from_edges, load_edge_list
from .metrics import Partition, nassoc

ORACLE_MAX_NODES = 12


@dataclass(frozen=True)
class GroundTruth:
    labels: np.ndarray
    k: int
    params: dict = field(default_factory=dict)

    def partition(self, g: WeightedGraph) -> Partition:
        return Partition.from_assignment(g, self.labels)


def ring_of_cliques(num_cliques: int, clique_size: int) -> tuple[WeightedGraph, GroundTruth]:
    """Cliques joined in a ring by single edges.

    Clique ``i`` holds nodes ``i*s .. i*s + s - 1``; its highest node links
    to the lowest node of clique ``i + 1`` (mod ``num_cliques``).
    """
    if num_cliques < 3 or clique_size < 2:
        raise ValueError("need at least 3 cliques of at least 2 nodes")
    s = clique_size
    edges = []
    for c in range(num_cliques):
        base = c * s
        edges.extend((base + i, base + j, 1.0) for i, j in combinations(range(s), 2))
        nxt = ((c + 1) % num_cliques) * s
        edges.append((base + s - 1, nxt, 1.0))
    g = from_edges(num_cliques * s, edges)
    labels = np.repeat(np.arange(num_cliques), s)
    return g, GroundTruth(labels, num_cliques,
                          {"num_cliques": num_cliques, "clique_size": clique_size})


def two_chains() -> tuple[WeightedGraph, GroundTruth]:
    """Two disjoint unweighted 4-node paths (nodes 0-3 and 4-7)."""
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0),
             (4, 5, 1.0), (5, 6, 1.0), (6, 7, 1.0)]
    return from_edges(8, edges), GroundTruth(np.repeat([0, 1], 4), 2)


def karate_club() -> tuple[WeightedGraph, NodeIdMap, GroundTruth]:
    """Zachary's karate club (unweighted) with the two-faction split."""
    data = resources.files("ganc") / "data"
    g, ids = load_edge_list(data.joinpath("karate.txt").read_text())
    truth = read_partition(data.joinpath("karate_truth.tsv").read_text(), ids)
    return g, ids, GroundTruth(truth, int(truth.max()) + 1)


def read_partition(text: str, ids: NodeIdMap, *, allow_extra: bool = False) -> np.ndarray:
    """Parse ``token<TAB>cluster`` lines into labels indexed by internal id.

    Every node of ``ids`` must be covered. Tokens outside ``ids`` are an
    error unless ``allow_extra`` (used when the graph was cut down to a
    component).
    """
    labels = np.full(len(ids), -1, dtype=np.int64)
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"partition line {lineno}: expected 'token cluster'")
        try:
            cluster = int(parts[1])
        except ValueError:
            raise GraphError(f"partition line {lineno}: bad cluster id {parts[1]!r}") from None
        if allow_extra and parts[0] not in ids:
            continue
        labels[ids.id_of(parts[0])] = cluster
    missing = np.flatnonzero(labels < 0)
    if len(missing):
        raise GraphError(f"partition misses node {ids.token_of(int(missing[0]))!r}"
                         f" and {len(missing) - 1} other(s)")
    return labels


def _cluster_sizes(n: int, c_min: int, c_max: int, rng: np.random.Generator) -> np.ndarray:
    if c_min < 1 or c_max < c_min:
        raise ValueError("need 1 <= c_min <= c_max")
    k_lo = -(-n // c_max)
    k_hi = n // c_min
    if k_lo > k_hi:
        raise ValueError(f"no cluster count fits n={n} with sizes in [{c_min}, {c_max}]")
    sizes: list[int] = []
    total = 0
    while total < n:
        s = int(rng.integers(c_min, c_max + 1))
        sizes.append(s)
        total += s
    sizes_arr = np.array(sizes)
    # shrink the overshoot off the clusters, then fix any that drop below c_min
    excess = total - n
    while excess > 0:
        room = sizes_arr - c_min
        if room.sum() == 0:
            sizes_arr = sizes_arr[:-1]
            excess = int(sizes_arr.sum()) - n
            continue
        i = int(rng.choice(np.flatnonzero(room > 0)))
        sizes_arr[i] -= 1
        excess -= 1
    while excess < 0:
        i = int(rng.choice(np.flatnonzero(sizes_arr < c_max)))
        sizes_arr[i] += 1
        excess += 1
    return sizes_arr


def planted_partition(n: int, *, c_min: int, c_max: int, mu: float, d_avg: float = 25,
                      d_max: int = 30, seed: int = 0,
                      max_retries: int = 20) -> tuple[WeightedGraph, GroundTruth]:
    """Simple planted-partition benchmark with LFR-like parameters.

    Cluster sizes are drawn uniformly from ``[c_min, c_max]`` and adjusted to
    sum to ``n``. Target degrees are uniform on
    ``[d_avg - 5, min(d_avg + 5, d_max)]``. Each edge endpoint ("stub") is
    intra-cluster with probability ``1 - mu``; intra stubs are paired at
    random inside their cluster, inter stubs across the whole graph.
    Self-loops and repeated pairs are rejected and their stubs re-paired for
    up to ``max_retries`` rounds; leftovers are dropped, so realized degrees
    can fall short of the targets (notably when a small cluster cannot host
    its intra stubs).
    """
    if not 0 <= mu < 1:
        raise ValueError("mu must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    sizes = _cluster_sizes(n, c_min, c_max, rng)
    k = len(sizes)
    labels = np.repeat(np.arange(k), sizes)
    lo = max(1, int(round(d_avg - 5)))
    hi = max(lo, int(min(d_avg + 5, d_max)))
    degree = rng.integers(lo, hi + 1, size=n)
    stubs = np.repeat(np.arange(n), degree)
    ext = np.floor(mu * degree + rng.random(n)).astype(np.int64)
    rank = np.arange(len(stubs)) - np.repeat(np.cumsum(degree) - degree, degree)
    intra = rank >= np.repeat(ext, degree)

    keys: set[int] = set()
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []

    def accept(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Keep new simple pairs; return the stubs to re-pair."""
        lo_, hi_ = np.minimum(a, b), np.maximum(a, b)
        key = lo_ * n + hi_
        ok = lo_ != hi_
        # dedupe within this batch before checking earlier batches
        _, first = np.unique(np.where(ok, key, -1), return_index=True)
        fresh = np.zeros(len(key), dtype=bool)
        fresh[first] = True
        ok &= fresh
        idx = np.flatnonzero(ok)
        for i in idx.tolist():
            kk = int(key[i])
            if kk in keys:
                ok[i] = False
            else:
                keys.add(kk)
        us.append(lo_[ok])
        vs.append(hi_[ok])
        return np.concatenate([a[~ok], b[~ok]])

    # intra stubs, cluster by cluster
    intra_stubs = stubs[intra]
    order = np.argsort(labels[intra_stubs], kind="stable")
    intra_stubs = intra_stubs[order]
    bounds = np.searchsorted(labels[intra_stubs], np.arange(k + 1))
    for c in range(k):
        pool = intra_stubs[bounds[c]:bounds[c + 1]]
        for _ in range(max_retries):
            if len(pool) < 2:
                break
            pool = rng.permutation(pool)
            half = len(pool) // 2
            pool = np.concatenate([accept(pool[:half], pool[half:2 * half]), pool[2 * half:]])

    pool = stubs[~intra]
    for _ in range(max_retries):
        if len(pool) < 2:
            break
        pool = rng.permutation(pool)
        half = len(pool) // 2
        a, b = pool[:half], pool[half:2 * half]
        same = labels[a] == labels[b]
        rest = accept(a[~same], b[~same])
        pool = np.concatenate([rest, a[same], b[same], pool[2 * half:]])

    u = np.concatenate(us) if us else np.zeros(0, np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, np.int64)
    order = np.lexsort((v, u))
    g = from_arrays(n, u[order], v[order], np.ones(len(u)))
    params = {"n": n, "mu": mu, "c_min": c_min, "c_max": c_max,
              "d_avg": d_avg, "d_max": d_max, "seed": seed}
    return g, GroundTruth(labels, k, params)


def random_connected_graph(n: int, p: float, rng: np.random.Generator, *,
                           weights: str = "unit") -> WeightedGraph:
    """Random spanning tree plus Erdos-Renyi extra edges; always connected.

    ``weights`` is ``"unit"``, ``"int"`` (1..4) or ``"float"`` (uniform
    in ``[0.1, 2)``).
    """
    perm = rng.permutation(n)
    pairs = {}
    for i in range(1, n):
        a, b = int(perm[i]), int(perm[rng.integers(0, i)])
        pairs[(min(a, b), max(a, b))] = 1
    for a, b in combinations(range(n), 2):
        if rng.random() < p:
            pairs[(a, b)] = 1

    def draw() -> float:
        if weights == "int":
            return float(rng.integers(1, 5))
        if weights == "float":
            return float(rng.uniform(0.1, 2.0))
        return 1.0

    return from_edges(n, [(a, b, draw()) for (a, b) in sorted(pairs)])


def set_partitions(n: int, k: int) -> Iterator[list[int]]:
    """Restricted-growth strings of length ``n`` using exactly ``k`` blocks, lexicographic."""
    a = [0] * n

    def rec(i: int, used: int) -> Iterator[list[int]]:
        if i == n:
            if used == k:
                yield a
            return
        # need enough positions left to open the remaining blocks
        if k - used > n - i:
            return
        for c in range(min(used + 1, k)):
            a[i] = c
            yield from rec(i + 1, used + (c == used))

    if 1 <= k <= n:
        if n == 0:
            return
        a[0] = 0
        yield from rec(1, 1)


def brute_force_max_nassoc(g: WeightedGraph, k: int) -> tuple[Partition, float]:
    """Exact maximum normalized association over all partitions into ``k`` blocks.

    Ties resolve to the lexicographically smallest restricted-growth
    assignment.
    """
    n = g.node_count
    if n > ORACLE_MAX_NODES:
        raise ValueError(f"oracle is limited to n <= {ORACLE_MAX_NODES} (got {n})")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    deg = g.degrees.tolist()
    edges = list(g.edges())
    best_val = -np.inf
    best: list[int] | None = None
    for a in set_partitions(n, k):
        dc = [0.0] * k
        wc = [0.0] * k
        for u in range(n):
            dc[a[u]] += deg[u]
        for u, v, w in edges:
            if a[u] == a[v]:
                wc[a[u]] += w if u == v else 2.0 * w
        val = sum(wc[i] / dc[i] for i in range(k))
        if val > best_val:
            best_val, best = val, list(a)
    p = Partition.from_assignment(g, np.array(best))
    return p, nassoc(g, p)


def naive_dendrogram(g: WeightedGraph) -> Dendrogram:
    """Quadratic reference agglomeration: rescan every active pair each step.

    Uses a dense cluster-weight matrix and the same tie-break as the heap
    implementation (largest gain, then smallest ``(min id, max id)``).
    """
    n = g.node_count
    size = 2 * n - 1
    W = np.zeros((size, size))
    for u, v, w in g.edges():
        W[u, v] = W[v, u] = w
    deg = np.zeros(size)
    deg[:n] = g.degrees
    internal = np.zeros(size)
    internal[:n] = g.self_weights
    active = list(range(n))
    series = np.full(n + 1, np.nan)
    series[n] = float(np.sum(g.self_weights / g.degrees))
    ma, mb, dl = [], [], []
    height = [0] * size
    for step in range(n - 1):
        best = None
        for i, a in enumerate(active):
            for b in active[i + 1:]:
                if W[a, b] == 0:
                    continue
                gain = merge_gain(internal[a], deg[a], internal[b], deg[b], W[a, b])
                key = (-gain, min(a, b), max(a, b))
                if best is None or key < best:
                    best = key
        if best is None:
            raise GraphError("disconnected graph")
        neg, a, b = best
        c = n + step
        W[c, :] = W[a, :] + W[b, :]
        W[:, c] = W[c, :]
        W[c, c] = 0.0
        internal[c] = internal[a] + internal[b] + 2.0 * W[a, b]
        deg[c] = deg[a] + deg[b]
        W[[a, b], :] = 0.0
        W[:, [a, b]] = 0.0
        active = [x for x in active if x not in (a, b)] + [c]
        height[c] = max(height[a], height[b]) + 1
        ma.append(a)
        mb.append(b)
        dl.append(-neg)
        series[n - 1 - step] = series[n - step] - neg
    return Dendrogram(n=n, merge_a=np.array(ma, dtype=np.int64), merge_b=np.array(mb, dtype=np.int64),
                      delta=np.array(dl), nassoc_series=series, height=height[size - 1])
