"""Choosing the number of clusters from the curvature of the NAssoc-vs-k curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agglomerate import Dendrogram, flat_partition
from .graph import WeightedGraph
from .metrics import nassoc
from .refine import refine


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """``curv[i]`` is the curvature at level ``ks[i]``; ``ks`` is contiguous and ascending.

    ``nassoc[i]`` is the normalized association the curvature was computed
    from at that level, and ``source`` is ``"raw"`` or ``"refined"``.
    """

    ks: np.ndarray
    curv: np.ndarray
    nassoc: np.ndarray
    source: str = "raw"

    def at(self, k: int) -> float:
        return float(self.curv[k - self.ks[0]])

    def peaks(self) -> list[tuple[int, float]]:
        """Local maxima sorted by curvature (descending), ties to smaller ``k``.

        A level is a peak when every neighbor inside the profile is strictly
        smaller.
        """
        c = self.curv
        if len(c) == 0:
            return []
        left = np.r_[-np.inf, c[:-1]]
        right = np.r_[c[1:], -np.inf]
        idx = np.flatnonzero((c > left) & (c > right))
        order = sorted(idx.tolist(), key=lambda i: (-c[i], i))
        return [(int(self.ks[i]), float(c[i])) for i in order]

    def write_csv(self, stream) -> None:
        stream.write("k,nassoc,curvature\n")
        for k, na, cv in zip(self.ks.tolist(), self.nassoc.tolist(), self.curv.tolist()):
            stream.write(f"{k},{na:.12g},{cv:.12g}\n")


def _series_array(series) -> np.ndarray:
    if isinstance(series, Dendrogram):
        return series.nassoc_series
    return np.asarray(series, dtype=np.float64)


def curvature_profile(nassoc_series) -> CurvatureProfile:
    """Curvature ``2 N(k) - N(k-1) - N(k+1)`` for ``k`` in ``[2, n-1]``.

    ``nassoc_series`` is indexed by level (``series[k]`` for ``k`` in
    ``1..n``; slot 0 ignored), or a :class:`Dendrogram`. ``N(1)`` is pinned
    to exactly 1, the value for any single-cluster partition.
    """
    s = _series_array(nassoc_series).copy()
    n = len(s) - 1
    if n < 3:
        raise ValueError(f"curvature needs at least 3 levels (got n={n})")
    s[1] = 1.0
    ks = np.arange(2, n)
    curv = 2.0 * s[2:n] - s[1:n - 1] - s[3:n + 1]
    return CurvatureProfile(ks=ks, curv=curv, nassoc=s[2:n], source="raw")


def select_k(profile: CurvatureProfile, k_range: tuple[int, int] | None = None) -> int:
    """Level of maximum curvature, optionally restricted to ``k_range`` (inclusive).

    Ties go to the smaller ``k``.
    """
    ks, curv = profile.ks, profile.curv
    if k_range is not None:
        lo, hi = k_range
        mask = (ks >= lo) & (ks <= hi)
        if not mask.any():
            raise ValueError(
                f"range [{lo}, {hi}] does not intersect profile levels "
                f"[{ks[0] if len(ks) else '-'}, {ks[-1] if len(ks) else '-'}]")
        ks, curv = ks[mask], curv[mask]
    if len(ks) == 0:
        raise ValueError("empty curvature profile")
    return int(ks[int(np.argmax(curv))])


def refined_curvature(g: WeightedGraph, d: Dendrogram, k_range: tuple[int, int],
                      max_iters: int | None = None) -> CurvatureProfile:
    """Curvature over ``k_range`` using refined partitions at every level.

    Each level from ``k_min - 1`` to ``k_max + 1`` is cut from the hierarchy
    and refined independently. Level 1 is fixed at 1; the all-singletons
    level ``n`` admits no moves and keeps its raw value.
    """
    lo, hi = k_range
    n = d.n
    if not 2 <= lo <= hi <= n - 1:
        raise ValueError(f"range [{lo}, {hi}] must lie within [2, {n - 1}]")
    levels = np.arange(lo - 1, hi + 2)
    vals = np.empty(len(levels))
    for i, k in enumerate(levels.tolist()):
        if k == 1:
            vals[i] = 1.0
            continue
        p = flat_partition(g, d, k)
        if k < n:
            p = refine(g, p, max_iters=max_iters).partition
        vals[i] = nassoc(g, p)
    curv = 2.0 * vals[1:-1] - vals[:-2] - vals[2:]
    return CurvatureProfile(ks=levels[1:-1], curv=curv, nassoc=vals[1:-1], source="refined")
