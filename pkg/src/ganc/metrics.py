"""Partition quality (normalized cut/association, modularity) and agreement (Jaccard)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphError, WeightedGraph


@dataclass(frozen=True, eq=False)
class Partition:
    """Flat assignment of nodes to ``k`` dense cluster ids with cached sums.

    ``cluster_internal[i]`` is ``w(C_i, C_i)``: each internal non-loop edge
    counted twice, self-loops once. A cluster with no outgoing edges stores
    its degree instead, so a single cluster has exactly ``w(V, V) == d(V)``.
    """

    assignment: np.ndarray
    k: int
    cluster_degree: np.ndarray
    cluster_internal: np.ndarray
    cluster_size: np.ndarray

    @classmethod
    def from_labels(cls, g: WeightedGraph, labels) -> "Partition":
        """Relabel ``labels`` densely in order of first appearance and cache sums."""
        labels = np.asarray(labels)
        if labels.shape != (g.node_count,):
            raise GraphError(
                f"partition covers {labels.size} nodes, graph has {g.node_count}")
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        # rank clusters by the first node that mentions them
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        assignment = rank[inverse.ravel()]
        return cls.from_assignment(g, assignment)

    @classmethod
    def from_assignment(cls, g: WeightedGraph, assignment: np.ndarray) -> "Partition":
        """Trust ``assignment`` to already be dense in ``0..k-1``."""
        assignment = np.asarray(assignment, dtype=np.int64)
        k = int(assignment.max()) + 1 if len(assignment) else 0
        size = np.bincount(assignment, minlength=k)
        if k and size.min() == 0:
            raise GraphError("cluster ids are not dense")
        deg = np.bincount(assignment, weights=g.degrees, minlength=k)
        rows = np.repeat(assignment, np.diff(g.indptr))
        cols = assignment[g.indices]
        crossing = rows != cols
        cut = np.bincount(rows[crossing], weights=g.weights[crossing], minlength=k)
        internal = np.bincount(rows[~crossing], weights=g.weights[~crossing], minlength=k)
        # a cluster with no outgoing weight holds all of its degree exactly
        internal = np.where(cut == 0, deg, internal)
        return cls(assignment=assignment, k=k, cluster_degree=deg,
                   cluster_internal=internal, cluster_size=size)

    def clusters(self) -> list[np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        return np.split(order, np.cumsum(self.cluster_size)[:-1])

    def cluster_cut(self) -> np.ndarray:
        return self.cluster_degree - self.cluster_internal


def nassoc_per_cluster_terms(p: Partition) -> np.ndarray:
    return p.cluster_internal / p.cluster_degree


def nassoc(g: WeightedGraph, p: Partition) -> float:
    """Normalized association: sum over clusters of ``w(C,C) / d(C)``."""
    return float(np.sum(p.cluster_internal / p.cluster_degree))


def ncut(g: WeightedGraph, p: Partition) -> float:
    """Normalized cut: sum over clusters of ``w(C, V minus C) / d(C)``."""
    return float(np.sum(p.cluster_cut() / p.cluster_degree))


def modularity(g: WeightedGraph, p: Partition) -> float:
    m = g.total_weight
    return float(np.sum(p.cluster_internal / m - (p.cluster_degree / m) ** 2))


def normalized_modularity(g: WeightedGraph, p: Partition) -> float:
    """Modularity with each cluster term divided by its degree; equals ``(NAssoc - 1) / M``."""
    return (nassoc(g, p) - 1.0) / g.total_weight


def _labels(x) -> np.ndarray:
    return x.assignment if isinstance(x, Partition) else np.asarray(x)


def pair_counts(x, y) -> tuple[int, int, int]:
    """Pairs together in both, together only in ``x``, together only in ``y``.

    Built from the contingency table of the two labelings; never enumerates
    node pairs.
    """
    lx, ly = _labels(x), _labels(y)
    if lx.shape != ly.shape:
        raise GraphError(f"partitions cover different node counts ({lx.size} vs {ly.size})")
    _, cx = np.unique(lx, return_inverse=True)
    _, cy = np.unique(ly, return_inverse=True)
    cx = cx.ravel().astype(np.int64)
    cy = cy.ravel().astype(np.int64)
    _, nij = np.unique(cx * (int(cy.max(initial=0)) + 1) + cy, return_counts=True)

    def pairs(counts: np.ndarray) -> int:
        c = counts.astype(np.int64)
        return int(np.sum(c * (c - 1) // 2))

    both = pairs(nij)
    same_x = pairs(np.bincount(cx))
    same_y = pairs(np.bincount(cy))
    return both, same_x - both, same_y - both


def jaccard_index(x, y) -> float:
    """Jaccard index ``a / (a + b + c)`` between two partitions of the same nodes.

    Accepts :class:`Partition` objects or plain label arrays. Two all-singleton
    partitions have no co-clustered pairs and score 1.0.
    """
    a, b, c = pair_counts(x, y)
    total = a + b + c
    return 1.0 if total == 0 else a / total


def report(g: WeightedGraph, p: Partition, truth=None) -> dict:
    """Metrics dictionary in the key order of the CLI's JSON report."""
    na = nassoc(g, p)
    out = {
        "k": p.k,
        "nassoc": na,
        "nassoc_per_cluster": na / p.k,
        "ncut": ncut(g, p),
        "modularity": modularity(g, p),
    }
    if truth is not None:
        out["jaccard_vs_truth"] = jaccard_index(p, truth)
    return out
