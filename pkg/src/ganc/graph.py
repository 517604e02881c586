"""Weighted undirected graphs: storage, edge-list I/O and component handling."""

from __future__ import annotations

import io
from math import fsum
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    """Raised for malformed input or graphs the algorithms cannot handle."""


@dataclass(frozen=True)
class NodeIdMap:
    """Bijection between external node tokens and dense ids ``0..n-1``."""

    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise GraphError("duplicate node tokens")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise GraphError(f"unknown node token {token!r}") from None

    def token_of(self, node: int) -> str:
        return self.tokens[node]

    def subset(self, kept: Sequence[int]) -> "NodeIdMap":
        """Map for the subgraph keeping internal ids ``kept`` (in that order)."""
        return NodeIdMap(tuple(self.tokens[i] for i in kept))

    @classmethod
    def identity(cls, n: int) -> "NodeIdMap":
        return cls(tuple(str(i) for i in range(n)))


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable undirected weighted graph in CSR form.

    Every off-diagonal pair is stored in both rows with the same weight; a
    self-loop ``(u, u)`` is stored once and counts once toward ``d(u)``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray
    self_weights: np.ndarray
    total_weight: float
    edge_count: int

    @property
    def node_count(self) -> int:
        return len(self.degrees)

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def adjacency(self) -> list[list[tuple[int, float]]]:
        """Per-node ``(neighbor, weight)`` lists, self entries included."""
        ind = self.indices.tolist()
        wts = self.weights.tolist()
        ptr = self.indptr.tolist()
        return [list(zip(ind[ptr[u]:ptr[u + 1]], wts[ptr[u]:ptr[u + 1]]))
                for u in range(self.node_count)]

    def edges(self) -> Iterable[tuple[int, int, float]]:
        """Each unordered pair once as ``(u, v, w)`` with ``u <= v``."""
        ind = self.indices.tolist()
        wts = self.weights.tolist()
        ptr = self.indptr.tolist()
        for u in range(self.node_count):
            for p in range(ptr[u], ptr[u + 1]):
                v = ind[p]
                if v >= u:
                    yield u, v, wts[p]

    def to_scipy(self) -> csr_matrix:
        n = self.node_count
        return csr_matrix((self.weights, self.indices, self.indptr), shape=(n, n))

    def scaled(self, c: float) -> "WeightedGraph":
        return from_edges(self.node_count, list(self.edges()), scale=c)

    def check_degrees(self) -> None:
        if self.node_count == 0:
            raise GraphError("graph has no nodes")
        bad = np.flatnonzero(self.degrees <= 0)
        if len(bad):
            raise GraphError(
                f"{len(bad)} node(s) have zero degree (first internal id {bad[0]}); "
                "extract the largest connected component to drop them")


def from_edges(n: int, edges: Iterable[tuple[int, int, float]], *,
               scale: float = 1.0) -> WeightedGraph:
    """Build a graph on ``n`` nodes from undirected ``(u, v, w)`` triples.

    Repeated pairs (in either orientation) have their weights summed and
    zero-weight pairs are dropped.
    """
    pairs: dict[tuple[int, int], float] = {}
    for u, v, w in edges:
        if w < 0:
            raise GraphError(f"negative weight on pair ({u}, {v})")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"node id out of range in pair ({u}, {v})")
        key = (u, v) if u <= v else (v, u)
        pairs[key] = pairs.get(key, 0.0) + float(w)
    return _from_pairs(n, pairs, scale)


def _from_pairs(n: int, pairs: dict[tuple[int, int], float], scale: float = 1.0) -> WeightedGraph:
    if not pairs:
        return from_arrays(n, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
    keys = np.array(list(pairs.keys()), dtype=np.int64)
    vals = np.fromiter(pairs.values(), dtype=np.float64, count=len(pairs)) * scale
    return from_arrays(n, keys[:, 0], keys[:, 1], vals)


def from_arrays(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> WeightedGraph:
    """Build a graph from endpoint arrays of distinct unordered pairs.

    Each pair must appear once (orientation is irrelevant); zero weights
    are dropped.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    keep = w != 0
    u, v, w = u[keep], v[keep], w[keep]
    self_w = np.zeros(n)
    loop = u == v
    self_w[u[loop]] = w[loop]
    off = ~loop
    r = np.concatenate([u, v[off]])
    c = np.concatenate([v, u[off]])
    wts = np.concatenate([w, w[off]])
    order = np.lexsort((c, r))
    r, c, wts = r[order], c[order], wts[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=n), out=indptr[1:])
    # exactly rounded sums make degrees and M independent of node/edge order
    wl = wts.tolist()
    ptr = indptr.tolist()
    degrees = np.array([fsum(wl[ptr[i]:ptr[i + 1]]) for i in range(n)], dtype=np.float64)
    return WeightedGraph(
        indptr=indptr,
        indices=c,
        weights=wts,
        degrees=degrees,
        self_weights=self_w,
        total_weight=fsum(degrees.tolist()),
        edge_count=int(len(u)),
    )


def load_edge_list(stream: TextIO | str, *, weighted: bool | None = None,
                   symmetrize: bool = False,
                   allow_isolated: bool = False) -> tuple[WeightedGraph, NodeIdMap]:
    """Parse a whitespace-delimited edge list.

    Each non-comment line is ``u v`` or ``u v w``. Node tokens are assigned
    dense ids in order of first appearance. Lines naming the same unordered
    pair are summed, so a directed list with both orientations collapses to
    ``w(u,v) + w(v,u)``.

    Parameters
    ----------
    weighted : bool or None
        ``True`` requires a weight column, ``False`` ignores it (every line
        weighs 1.0), ``None`` uses the column when present.
    symmetrize : bool
        Treat the input as a directed adjacency ``A`` and build ``A + A^T``.
        Off-diagonal pairs are summed either way; this also doubles
        self-loops.
    allow_isolated : bool
        Skip the zero-degree check, for callers that extract a component
        afterwards.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    index: dict[str, int] = {}
    tokens: list[str] = []
    pairs: dict[tuple[int, int], float] = {}

    def node(tok: str) -> int:
        i = index.get(tok)
        if i is None:
            i = index[tok] = len(tokens)
            tokens.append(tok)
        return i

    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'u v' or 'u v w', got {line!r}")
        if weighted and len(parts) != 3:
            raise GraphError(f"line {lineno}: missing weight column")
        w = 1.0
        if len(parts) == 3 and weighted is not False:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphError(f"line {lineno}: bad weight {parts[2]!r}") from None
            if not np.isfinite(w):
                raise GraphError(f"line {lineno}: non-finite weight {parts[2]!r}")
            if w < 0:
                raise GraphError(f"line {lineno}: negative weight {w}")
        u, v = node(parts[0]), node(parts[1])
        if u == v and symmetrize:
            w *= 2.0
        key = (u, v) if u <= v else (v, u)
        pairs[key] = pairs.get(key, 0.0) + w

    g = _from_pairs(len(tokens), pairs)
    if not allow_isolated:
        g.check_degrees()
    return g, NodeIdMap(tuple(tokens))


def write_edge_list(g: WeightedGraph, ids: NodeIdMap | None, stream: TextIO) -> None:
    """Write each unordered pair once as ``u v w`` (``repr`` floats round-trip)."""
    ids = ids or NodeIdMap.identity(g.node_count)
    for u, v, w in g.edges():
        stream.write(f"{ids.token_of(u)} {ids.token_of(v)} {w!r}\n")


def _components(g: WeightedGraph) -> tuple[int, np.ndarray]:
    return connected_components(g.to_scipy(), directed=False)


def connected_component_count(g: WeightedGraph) -> int:
    return int(_components(g)[0])


def induced_subgraph(g: WeightedGraph, kept: np.ndarray) -> WeightedGraph:
    """Subgraph on ``kept`` (sorted ascending), relabelled ``0..len(kept)-1``."""
    kept = np.asarray(kept, dtype=np.int64)
    sub = g.to_scipy()[kept][:, kept].tocsr()
    sub.sort_indices()
    rows = np.repeat(np.arange(len(kept)), np.diff(sub.indptr))
    pairs = {}
    for u, v, w in zip(rows.tolist(), sub.indices.tolist(), sub.data.tolist()):
        if u <= v:
            pairs[(u, v)] = w
    return _from_pairs(len(kept), pairs)


def largest_connected_component(g: WeightedGraph, ids: NodeIdMap | None = None
                                ) -> tuple[WeightedGraph, NodeIdMap]:
    """Induced subgraph on the largest component.

    Ties go to the component holding the smallest internal id. The returned
    map carries the original tokens of the kept nodes, which keep their
    relative order.
    """
    ids = ids or NodeIdMap.identity(g.node_count)
    ncomp, labels = _components(g)
    if ncomp == 1:
        return g, ids
    sizes = np.bincount(labels, minlength=ncomp)
    first = np.full(ncomp, g.node_count, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(g.node_count))
    best = min(range(ncomp), key=lambda c: (-sizes[c], first[c]))
    kept = np.flatnonzero(labels == best)
    return induced_subgraph(g, kept), ids.subset(kept.tolist())
