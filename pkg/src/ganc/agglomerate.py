"""Greedy agglomerative hierarchy maximizing normalized association.

Every adjacent pair of active clusters carries the gain in normalized
association its merge would produce. Gains live in one max-heap (stored
negated for :mod:`heapq`) with lazy invalidation: a pair's gain depends only
on the two clusters' degrees, self-weights and mutual weight, so it never
changes while both clusters are alive. Merged clusters get fresh ids
``n, n+1, ...``, which makes any entry touching a retired id stale. The heap
is compacted whenever stale entries outnumber live ones, so memory stays
``O(m)``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .graph import GraphError, WeightedGraph, connected_component_count
from .metrics import Partition


class MergeRecord(NamedTuple):
    level_k: int
    cluster_a: int
    cluster_b: int
    new_id: int
    delta_gain: float
    nassoc_after: float


def merge_gain(w_a: float, d_a: float, w_b: float, d_b: float, w_ab: float) -> float:
    """Gain in normalized association from merging clusters ``a`` and ``b``.

    ``w_a``/``w_b`` are internal weights, ``d_a``/``d_b`` degrees and ``w_ab``
    the weight between them.
    """
    return (w_a + w_b + 2.0 * w_ab) / (d_a + d_b) - w_a / d_a - w_b / d_b


class MergeState:
    """Mutable agglomeration state; build with :meth:`initial_delta`.

    Attributes
    ----------
    degree, internal : list of float
        ``d(C)`` and ``w(C, C)`` indexed by cluster id (``2n - 1`` slots).
    rows : list of dict or None
        ``rows[c][x]`` is the weight between active clusters ``c`` and ``x``;
        ``None`` once ``c`` is retired.
    heap : list of tuple
        ``(-gain, a, b)`` entries with ``a < b``.
    """

    def __init__(self, g: WeightedGraph):
        n = g.node_count
        size = 2 * n - 1
        self.n = n
        self.next_id = n
        self.degree: list[float] = g.degrees.tolist() + [0.0] * (n - 1)
        self.internal: list[float] = g.self_weights.tolist() + [0.0] * (n - 1)
        self.height: list[int] = [0] * size
        self.active = bytearray(size)
        self.active[:n] = b"\x01" * n
        self.rows: list[dict | None] = [None] * size
        self.heap: list[tuple[float, int, int]] = []
        self.live_pairs = 0
        self.nassoc = float(np.sum(g.self_weights / g.degrees))

    @classmethod
    def initial_delta(cls, g: WeightedGraph) -> "MergeState":
        if g.node_count == 0:
            raise GraphError("graph has no nodes")
        g.check_degrees()
        if connected_component_count(g) != 1:
            raise GraphError(
                "graph is disconnected; the hierarchy needs a connected graph "
                "(extract the largest connected component first)")
        st = cls(g)
        deg, internal = st.degree, st.internal
        ind = g.indices.tolist()
        wts = g.weights.tolist()
        ptr = g.indptr.tolist()
        heap = st.heap
        for u in range(st.n):
            row = {}
            du, wu = deg[u], internal[u]
            for p in range(ptr[u], ptr[u + 1]):
                v = ind[p]
                if v == u:
                    continue
                w = wts[p]
                row[v] = w
                if u < v:
                    dv, wv = deg[v], internal[v]
                    gain = (wu + wv + 2.0 * w) / (du + dv) - wu / du - wv / dv
                    heap.append((-gain, u, v))
            st.rows[u] = row
        heapq.heapify(heap)
        st.live_pairs = len(heap)
        return st

    @property
    def cluster_count(self) -> int:
        return 2 * self.n - self.next_id

    def gain(self, a: int, b: int) -> float:
        """Current merge gain of adjacent active clusters ``a`` and ``b``."""
        w_ab = self.rows[a][b]
        return merge_gain(self.internal[a], self.degree[a],
                          self.internal[b], self.degree[b], w_ab)

    def live_entries(self) -> Iterator[tuple[int, int, float]]:
        """Valid ``(a, b, gain)`` heap entries, each adjacent active pair once."""
        act = self.active
        for neg, a, b in self.heap:
            if act[a] and act[b]:
                yield a, b, -neg

    def _compact(self) -> None:
        act = self.active
        self.heap = [e for e in self.heap if act[e[1]] and act[e[2]]]
        heapq.heapify(self.heap)

    def merge_step(self) -> MergeRecord:
        """Merge the adjacent pair of largest gain.

        Ties go to the lexicographically smallest ``(min id, max id)``,
        which is exactly the heap's tuple order.
        """
        heap = self.heap
        act = self.active
        heappop = heapq.heappop
        while heap:
            neg, a, b = heappop(heap)
            if act[a] and act[b]:
                break
        else:
            raise GraphError("no adjacent clusters left to merge (disconnected graph)")

        rows, deg, internal = self.rows, self.degree, self.internal
        c = self.next_id
        self.next_id += 1
        ra, rb = rows[a], rows[b]
        w_ab = ra[b]
        d_c = deg[a] + deg[b]
        w_c = internal[a] + internal[b] + 2.0 * w_ab
        deg[c] = d_c
        internal[c] = w_c
        self.height[c] = max(self.height[a], self.height[b]) + 1
        act[a] = act[b] = 0
        act[c] = 1
        rows[a] = rows[b] = None
        before = len(ra) + len(rb) - 1

        if len(ra) < len(rb):
            ra, rb = rb, ra
        get = ra.get
        for x, w in rb.items():
            ra[x] = get(x, 0.0) + w
        ra.pop(b, None)
        ra.pop(a, None)
        rows[c] = ra

        push = heapq.heappush
        base = w_c / d_c
        # same operation order as merge_gain(x, c) so ties compare exactly
        for x, w in ra.items():
            rx = rows[x]
            rx.pop(a, None)
            rx.pop(b, None)
            rx[c] = w
            d_x = deg[x]
            w_x = internal[x]
            push(heap, (-((w_x + w_c + 2.0 * w) / (d_x + d_c) - w_x / d_x - base), x, c))

        self.live_pairs += len(ra) - before
        if len(heap) > 2 * self.live_pairs + 64:
            self._compact()

        gain = -neg
        self.nassoc += gain
        return MergeRecord(self.cluster_count, a, b, c, gain, self.nassoc)


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Full merge sequence of the greedy hierarchy.

    ``merge_a[i]`` and ``merge_b[i]`` merge into cluster ``n + i``, leaving
    ``n - 1 - i`` clusters. ``nassoc_series[k]`` holds the normalized
    association at level ``k`` (index 0 unused, NaN).
    """

    n: int
    merge_a: np.ndarray
    merge_b: np.ndarray
    delta: np.ndarray
    nassoc_series: np.ndarray
    height: int

    @property
    def leaf_map(self) -> np.ndarray:
        return np.arange(self.n)

    def __len__(self) -> int:
        return len(self.merge_a)

    def merges(self) -> list[MergeRecord]:
        n = self.n
        return [MergeRecord(n - 1 - i, int(a), int(b), n + i, float(dl),
                            float(self.nassoc_series[n - 1 - i]))
                for i, (a, b, dl) in enumerate(zip(self.merge_a, self.merge_b, self.delta))]

    def nassoc_at(self, k: int) -> float:
        return float(self.nassoc_series[k])

    def labels_at(self, k: int) -> np.ndarray:
        """Leaf labels at level ``k``, dense in order of first node appearance."""
        n = self.n
        if not 1 <= k <= n:
            raise ValueError(f"level k={k} outside [1, {n}]")
        steps = n - k
        parent = np.arange(2 * n - 1)
        new = np.arange(n, n + steps)
        parent[self.merge_a[:steps]] = new
        parent[self.merge_b[:steps]] = new
        # pointer doubling: O(log height) rounds
        while True:
            nxt = parent[parent]
            if np.array_equal(nxt, parent):
                break
            parent = nxt
        root = parent[:n]
        _, first, inverse = np.unique(root, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        return rank[inverse.ravel()]

    def write(self, stream) -> None:
        """One merge per line: ``level_k cluster_a cluster_b new_id delta_gain nassoc_after``."""
        for r in self.merges():
            stream.write(f"{r.level_k} {r.cluster_a} {r.cluster_b} {r.new_id} "
                         f"{r.delta_gain:.12g} {r.nassoc_after:.12g}\n")

    def write_series(self, stream) -> None:
        stream.write("k,nassoc\n")
        for k in range(self.n, 0, -1):
            stream.write(f"{k},{self.nassoc_series[k]:.12g}\n")


def build_dendrogram(g: WeightedGraph) -> Dendrogram:
    """Run the greedy agglomeration down to a single cluster."""
    st = MergeState.initial_delta(g)
    n = st.n
    ma = np.empty(n - 1, dtype=np.int64)
    mb = np.empty(n - 1, dtype=np.int64)
    dl = np.empty(n - 1)
    series = np.full(n + 1, np.nan)
    series[n] = st.nassoc
    step = st.merge_step
    for i in range(n - 1):
        rec = step()
        ma[i] = rec.cluster_a
        mb[i] = rec.cluster_b
        dl[i] = rec.delta_gain
        series[rec.level_k] = rec.nassoc_after
    return Dendrogram(n=n, merge_a=ma, merge_b=mb, delta=dl,
                      nassoc_series=series, height=st.height[2 * n - 2])


def flat_partition(g: WeightedGraph, d: Dendrogram, k: int) -> Partition:
    """Partition at level ``k`` obtained by replaying the first ``n - k`` merges."""
    if d.n != g.node_count:
        raise GraphError("dendrogram was built on a different graph")
    return Partition.from_assignment(g, d.labels_at(k))
