"""Boundary-node refinement of a flat partition.

Nodes on a cluster boundary are moved one at a time to the neighboring
cluster giving the largest strictly positive gain in normalized association.
Per node we keep ``I(u)``, the weight from ``u`` to the other members of its
own cluster, and a sparse row ``B[u]`` mapping every other adjacent cluster
to the weight ``u`` sends there. Self-loops are kept out of both, so
``I(u) + sum(B[u]) + w(u, u) == d(u)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .graph import WeightedGraph
from .metrics import Partition

# gains at or below this are treated as zero; guards against moves that only
# exist through round-off and could otherwise cycle forever
GAIN_TOL = 1e-12


class RefineResult(NamedTuple):
    partition: Partition
    iterations: int
    total_gain: float


class RefinementState:
    """Mutable refinement bookkeeping over one graph and partition."""

    def __init__(self, g: WeightedGraph, p: Partition):
        n = g.node_count
        self.g = g
        self.n = n
        self.labels: list[int] = p.assignment.tolist()
        self.degree: list[float] = g.degrees.tolist()
        self.self_weight: list[float] = g.self_weights.tolist()
        self.cluster_degree: list[float] = p.cluster_degree.tolist()
        self.cluster_internal: list[float] = p.cluster_internal.tolist()
        self.cluster_size: list[int] = p.cluster_size.tolist()

        ind = g.indices.tolist()
        wts = g.weights.tolist()
        ptr = g.indptr.tolist()
        labels = self.labels
        self.nbrs: list[list[tuple[int, float]]] = []
        self.I: list[float] = [0.0] * n
        self.B: list[dict[int, float]] = []
        # number of edges behind each B entry, so an entry is dropped exactly
        # when its last edge leaves rather than when a float sum hits zero
        self.B_count: list[dict[int, int]] = []
        for u in range(n):
            lu = labels[u]
            nb = []
            row: dict[int, float] = {}
            cnt: dict[int, int] = {}
            inside = 0.0
            for q in range(ptr[u], ptr[u + 1]):
                v = ind[q]
                if v == u:
                    continue
                w = wts[q]
                nb.append((v, w))
                lv = labels[v]
                if lv == lu:
                    inside += w
                else:
                    row[lv] = row.get(lv, 0.0) + w
                    cnt[lv] = cnt.get(lv, 0) + 1
            self.nbrs.append(nb)
            self.I[u] = inside
            self.B.append(row)
            self.B_count.append(cnt)

    @property
    def k(self) -> int:
        return len(self.cluster_size)

    @property
    def boundary(self) -> set[int]:
        return {u for u in range(self.n) if self.B[u]}

    def nassoc(self) -> float:
        return sum(w / d for w, d in zip(self.cluster_internal, self.cluster_degree))

    def move_gain(self, u: int, j: int) -> float:
        """Gain in normalized association from moving ``u`` into adjacent cluster ``j``.

        Computed from cached sums only. Raises if the move would empty
        ``u``'s cluster or ``j`` is not adjacent to ``u``.
        """
        i = self.labels[u]
        if self.cluster_size[i] == 1:
            raise ValueError(f"node {u} is alone in cluster {i}; moving it would empty the cluster")
        b = self.B[u].get(j)
        if b is None:
            raise ValueError(f"cluster {j} is not adjacent to node {u}")
        return self._gain(u, i, j, b)

    def _gain(self, u: int, i: int, j: int, b: float) -> float:
        du = self.degree[u]
        s = self.self_weight[u]
        wi, di = self.cluster_internal[i], self.cluster_degree[i]
        wj, dj = self.cluster_internal[j], self.cluster_degree[j]
        return ((wi - 2.0 * self.I[u] - s) / (di - du)
                + (wj + 2.0 * b + s) / (dj + du)
                - (wi / di + wj / dj))

    def best_move(self, u: int) -> tuple[int, float] | None:
        """Best target cluster for ``u`` and its gain; ties go to the smaller id."""
        row = self.B[u]
        if not row or self.cluster_size[self.labels[u]] == 1:
            return None
        i = self.labels[u]
        best_j, best = -1, -np.inf
        for j, b in row.items():
            gain = self._gain(u, i, j, b)
            if gain > best or (gain == best and j < best_j):
                best_j, best = j, gain
        return best_j, best

    def move(self, u: int, j: int) -> None:
        """Move ``u`` into cluster ``j`` and update every cache it touches."""
        labels = self.labels
        i = labels[u]
        du = self.degree[u]
        s = self.self_weight[u]
        Bu, Cu = self.B[u], self.B_count[u]
        b_old = Bu.pop(j)
        del Cu[j]
        i_old = self.I[u]

        self.cluster_degree[i] -= du
        self.cluster_degree[j] += du
        self.cluster_internal[i] -= 2.0 * i_old + s
        self.cluster_internal[j] += 2.0 * b_old + s
        self.cluster_size[i] -= 1
        self.cluster_size[j] += 1

        I, B, BC = self.I, self.B, self.B_count
        left_behind = 0
        for v, w in self.nbrs[u]:
            lv = labels[v]
            if lv == j:
                I[v] += w
                _drop(B[v], BC[v], i, w)
            elif lv == i:
                left_behind += 1
                I[v] -= w
                _add(B[v], BC[v], j, w)
            else:
                _drop(B[v], BC[v], i, w)
                _add(B[v], BC[v], j, w)

        if left_behind:
            Bu[i] = i_old
            Cu[i] = left_behind
        self.I[u] = b_old
        labels[u] = j

    def sweep(self) -> tuple[float, int]:
        """One pass over nodes in ascending id; returns (total gain, moves)."""
        total = 0.0
        moves = 0
        B = self.B
        for u in range(self.n):
            if not B[u]:
                continue
            best = self.best_move(u)
            if best is not None and best[1] > GAIN_TOL:
                self.move(u, best[0])
                total += best[1]
                moves += 1
        return total, moves

    def partition(self) -> Partition:
        return Partition.from_assignment(self.g, np.array(self.labels, dtype=np.int64))


def _drop(row: dict, cnt: dict, c: int, w: float) -> None:
    left = cnt[c] - 1
    if left:
        cnt[c] = left
        row[c] -= w
    else:
        del cnt[c]
        del row[c]


def _add(row: dict, cnt: dict, c: int, w: float) -> None:
    if c in cnt:
        cnt[c] += 1
        row[c] += w
    else:
        cnt[c] = 1
        row[c] = w


def init_state(g: WeightedGraph, p: Partition) -> RefinementState:
    return RefinementState(g, p)


def move_gain(state: RefinementState, u: int, i: int, j: int) -> float:
    if state.labels[u] != i:
        raise ValueError(f"node {u} is not in cluster {i}")
    return state.move_gain(u, j)


def refine(g: WeightedGraph, p: Partition, max_iters: int | None = None) -> RefineResult:
    """Sweep boundary nodes until a full pass applies no move.

    Returns the refined partition (same cluster ids and count), the number
    of sweeps run (including the final idle one) and the summed gain.
    """
    st = RefinementState(g, p)
    iterations = 0
    total = 0.0
    while max_iters is None or iterations < max_iters:
        iterations += 1
        gain, moves = st.sweep()
        total += gain
        if moves == 0:
            break
    return RefineResult(st.partition(), iterations, total)
