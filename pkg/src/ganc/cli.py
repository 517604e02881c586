"""Command-line driver: ``ganc cluster|metrics|gen|oracle``."""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import testkit
from .agglomerate import build_dendrogram, flat_partition
from .graph import (GraphError, NodeIdMap, WeightedGraph, connected_component_count,
                    largest_connected_component, load_edge_list, write_edge_list)
from .metrics import Partition, nassoc, ncut, report
from .model_select import curvature_profile, refined_curvature, select_k
from .refine import refine

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INVARIANT = 4


class Infeasible(Exception):
    """A well-formed request the graph cannot satisfy (e.g. k > n)."""


class InvariantViolation(Exception):
    pass


@dataclass
class RunConfig:
    input: str
    weighted: bool | None = None
    symmetrize: bool = False
    largest_component: bool = False
    k: int | None = None
    k_range: tuple[int, int] | None = None
    refine: bool = True
    max_refine_iters: int | None = None
    refined_curvature: tuple[int, int] | None = None
    partition_out: str | None = None
    dendrogram_out: str | None = None
    curvature_out: str | None = None
    metrics_out: str | None = None
    truth: str | None = None

    @property
    def mode(self) -> str:
        if self.k is not None:
            return "fixed-k"
        return "k-range" if self.k_range is not None else "auto"

    def validate(self) -> None:
        if self.k is not None and self.k_range is not None:
            raise GraphError("choose one of --k, --k-range, --auto")
        paths = [p for p in (self.partition_out, self.dendrogram_out,
                             self.curvature_out, self.metrics_out) if p and p != "-"]
        if len(paths) != len(set(paths)):
            raise GraphError("output paths must be distinct")


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    return x


def dump_metrics(data: dict, stream) -> None:
    json.dump({k: _round(v) for k, v in data.items()}, stream, indent=2)
    stream.write("\n")


def write_partition(p: Partition | np.ndarray, ids: NodeIdMap, stream) -> None:
    labels = p.assignment if isinstance(p, Partition) else p
    for u, c in enumerate(np.asarray(labels).tolist()):
        stream.write(f"{ids.token_of(u)}\t{c}\n")


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected KMIN:KMAX, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _load(path: str, weighted, symmetrize, allow_isolated=False):
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, weighted=weighted, symmetrize=symmetrize,
                              allow_isolated=allow_isolated)


def _read_truth(path: str, ids: NodeIdMap, allow_extra: bool = False) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return testkit.read_partition(fh.read(), ids, allow_extra=allow_extra)


def _check_range(lo: int, hi: int, n: int) -> None:
    if not 2 <= lo <= hi <= n - 1:
        raise Infeasible(f"cluster range [{lo}, {hi}] must lie within [2, {n - 1}]")


def cluster_command(cfg: RunConfig) -> dict:
    """Run the full pipeline and write the requested artifacts; returns the metrics."""
    cfg.validate()
    g, ids = _load(cfg.input, cfg.weighted, cfg.symmetrize,
                   allow_isolated=cfg.largest_component)
    if cfg.largest_component:
        g, ids = largest_connected_component(g, ids)
        g.check_degrees()
    elif connected_component_count(g) != 1:
        raise GraphError(
            f"input graph has {connected_component_count(g)} connected components; "
            "rerun with --largest-component")
    n = g.node_count
    if cfg.k is not None and not 1 <= cfg.k <= n:
        raise Infeasible(f"--k {cfg.k} is outside [1, {n}]")
    if cfg.k_range is not None:
        _check_range(*cfg.k_range, n)
    if cfg.refined_curvature is not None:
        _check_range(*cfg.refined_curvature, n)

    d = build_dendrogram(g)
    if cfg.dendrogram_out:
        with _open_out(cfg.dendrogram_out) as fh:
            d.write(fh)

    profile = None
    if cfg.refined_curvature is not None:
        profile = refined_curvature(g, d, cfg.refined_curvature, cfg.max_refine_iters)
    elif n >= 3:
        profile = curvature_profile(d)
    if cfg.curvature_out and profile is not None:
        with _open_out(cfg.curvature_out) as fh:
            profile.write_csv(fh)

    if cfg.k is not None:
        k = cfg.k
    else:
        if profile is None:
            raise Infeasible(f"automatic selection needs at least 3 nodes (graph has {n})")
        k = select_k(profile, cfg.k_range)

    p = flat_partition(g, d, k)
    if abs(d.nassoc_series[k] - nassoc(g, p)) > 1e-6:
        raise InvariantViolation(
            f"incremental NAssoc {d.nassoc_series[k]} disagrees with recomputed {nassoc(g, p)}")
    iterations = 0
    if cfg.refine and 1 < k < n:
        p, iterations, _ = refine(g, p, max_iters=cfg.max_refine_iters)
    if abs(nassoc(g, p) + ncut(g, p) - p.k) > 1e-9 or p.k != k:
        raise InvariantViolation("partition bookkeeping failed its identity check")

    truth = _read_truth(cfg.truth, ids, allow_extra=cfg.largest_component) if cfg.truth else None
    out = report(g, p, truth)
    out["mode"] = cfg.mode
    out["refined"] = bool(cfg.refine and 1 < k < n)
    out["refine_iterations"] = iterations
    out["n"] = n
    out["m"] = g.edge_count
    out["dendrogram_height"] = d.height
    if cfg.partition_out:
        with _open_out(cfg.partition_out) as fh:
            write_partition(p, ids, fh)
    with _open_out(cfg.metrics_out) as fh:
        dump_metrics(out, fh)
    return out


def metrics_command(graph_path: str, partition_path: str, truth_path: str | None = None, *,
                    weighted=None, symmetrize=False, stream=None) -> dict:
    g, ids = _load(graph_path, weighted, symmetrize)
    labels = _read_truth(partition_path, ids)
    p = Partition.from_labels(g, labels)
    truth = _read_truth(truth_path, ids) if truth_path else None
    out = report(g, p, truth)
    dump_metrics(out, stream or sys.stdout)
    return out


def gen_command(args) -> None:
    ids = None
    if args.kind == "karate":
        g, ids, truth = testkit.karate_club()
    elif args.kind == "ring":
        g, truth = testkit.ring_of_cliques(args.cliques, args.size)
    elif args.kind == "chains":
        g, truth = testkit.two_chains()
    else:
        g, truth = testkit.planted_partition(
            args.n, c_min=args.c_min, c_max=args.c_max, mu=args.mu,
            d_avg=args.d_avg, d_max=args.d_max, seed=args.seed)
    if ids is None:
        ids = NodeIdMap.identity(g.node_count)
    with _open_out(args.output) as fh:
        write_edge_list(g, ids, fh)
    if args.truth_out:
        with _open_out(args.truth_out) as fh:
            write_partition(truth.labels, ids, fh)


def oracle_command(args) -> tuple[Partition, float]:
    g, ids = _load(args.input, args.weighted, args.symmetrize)
    if not 1 <= args.k <= g.node_count:
        raise Infeasible(f"--k {args.k} is outside [1, {g.node_count}]")
    if g.node_count > testkit.ORACLE_MAX_NODES:
        raise Infeasible(f"oracle is limited to {testkit.ORACLE_MAX_NODES} nodes "
                         f"(graph has {g.node_count})")
    p, value = testkit.brute_force_max_nassoc(g, args.k)
    with _open_out(args.output) as fh:
        write_partition(p, ids, fh)
        fh.write(f"# nassoc {value:.12g}\n")
    return p, value


def _graph_flags(sp: argparse.ArgumentParser) -> None:
    w = sp.add_mutually_exclusive_group()
    w.add_argument("--weighted", dest="weighted", action="store_true", default=None,
                   help="require a weight column")
    w.add_argument("--unweighted", dest="weighted", action="store_false",
                   help="ignore any weight column")
    sp.add_argument("--symmetrize", action="store_true",
                    help="treat the list as directed and cluster A + A^T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ganc", description="Hierarchical graph clustering by greedy merging on normalized association.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", help="cluster an edge list")
    c.add_argument("input")
    _graph_flags(c)
    c.add_argument("--largest-component", action="store_true",
                   help="cluster only the largest connected component")
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--k", type=int, help="fixed number of clusters")
    mode.add_argument("--auto", action="store_true", help="pick k by curvature (default)")
    mode.add_argument("--k-range", type=_parse_range, metavar="KMIN:KMAX",
                      help="pick k by curvature within a range")
    c.add_argument("--no-refine", action="store_true")
    c.add_argument("--max-refine-iters", type=int, metavar="N")
    c.add_argument("--refined-curvature", type=_parse_range, metavar="KMIN:KMAX",
                   help="refine every level in the range before computing curvature")
    c.add_argument("--truth", help="ground-truth partition file")
    c.add_argument("--partition-out", "-o")
    c.add_argument("--dendrogram-out")
    c.add_argument("--curvature-out")
    c.add_argument("--metrics-out", help="metrics JSON path (default: stdout)")

    m = sub.add_parser("metrics", help="score a partition of a graph")
    m.add_argument("graph")
    m.add_argument("partition")
    m.add_argument("--truth")
    _graph_flags(m)

    gp = sub.add_parser("gen", help="write a benchmark graph and its ground truth")
    gsub = gp.add_subparsers(dest="kind", required=True)
    ring = gsub.add_parser("ring", help="ring of cliques")
    ring.add_argument("--cliques", type=int, default=24)
    ring.add_argument("--size", type=int, default=5)
    gsub.add_parser("chains", help="two disjoint 4-node paths")
    gsub.add_parser("karate", help="bundled karate club graph and two-faction truth")
    pl = gsub.add_parser("planted", help="planted-partition graph")
    pl.add_argument("--n", type=int, default=1000)
    pl.add_argument("--c-min", type=int, default=20)
    pl.add_argument("--c-max", type=int, default=50)
    pl.add_argument("--mu", type=float, default=0.1)
    pl.add_argument("--d-avg", type=float, default=25)
    pl.add_argument("--d-max", type=int, default=30)
    pl.add_argument("--seed", type=int, default=0)
    for g in (ring, gsub.choices["chains"], gsub.choices["karate"], pl):
        g.add_argument("--output", "-o", help="edge list path (default: stdout)")
        g.add_argument("--truth-out", help="ground-truth partition path")

    o = sub.add_parser("oracle", help="exhaustive max-NAssoc partition (n <= 12)")
    o.add_argument("input")
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--output", "-o")
    _graph_flags(o)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "cluster":
            cluster_command(RunConfig(
                input=args.input, weighted=args.weighted, symmetrize=args.symmetrize,
                largest_component=args.largest_component, k=args.k, k_range=args.k_range,
                refine=not args.no_refine, max_refine_iters=args.max_refine_iters,
                refined_curvature=args.refined_curvature,
                partition_out=args.partition_out, dendrogram_out=args.dendrogram_out,
                curvature_out=args.curvature_out, metrics_out=args.metrics_out,
                truth=args.truth))
        elif args.command == "metrics":
            metrics_command(args.graph, args.partition, args.truth,
                            weighted=args.weighted, symmetrize=args.symmetrize)
        elif args.command == "gen":
            gen_command(args)
        else:
            oracle_command(args)
    except Infeasible as exc:
        print(f"ganc: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvariantViolation as exc:
        print(f"ganc: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (GraphError, ValueError, OSError) as exc:
        print(f"ganc: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
