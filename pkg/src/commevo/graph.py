"""Directed retweet graphs and their undirected projections."""

from __future__ import annotations

import csv
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np


class RetweetGraph:
    """Directed weighted graph, edges run from author to retweeter.

    Values are immutable after construction.  Zero-weight edges and
    self-loops are rejected so the invariants hold by construction.
    """

    __slots__ = ("_nodes", "_nodeset", "_edges", "_out", "snapshot_id")

    def __init__(
        self,
        edges: Mapping[Tuple[str, str], float],
        nodes: Iterable[str] = (),
        snapshot_id: Optional[int] = None,
    ):
        order: Dict[str, None] = {}
        clean: Dict[Tuple[str, str], float] = {}
        out: Dict[str, float] = {}
        for (u, v), w in edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if w < 0:
                raise ValueError(f"negative weight on {u!r}->{v!r}")
            if w == 0:
                continue
            clean[(u, v)] = float(w)
            order.setdefault(u)
            order.setdefault(v)
            out[u] = out.get(u, 0.0) + float(w)
        for n in nodes:
            order.setdefault(n)
        self._nodes = tuple(order)
        self._nodeset = frozenset(order)
        self._edges = clean
        self._out = out
        self.snapshot_id = snapshot_id

    @property
    def nodes(self) -> Tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> Mapping[Tuple[str, str], float]:
        return dict(self._edges)

    def edge_items(self):
        return self._edges.items()

    def __contains__(self, node: str) -> bool:
        return node in self._nodeset

    def __len__(self) -> int:
        return len(self._nodes)

    def number_of_edges(self) -> int:
        return len(self._edges)

    def weight(self, u: str, v: str) -> float:
        return self._edges.get((u, v), 0.0)

    def total_weight(self) -> float:
        return float(sum(self._edges.values()))

    def out_degree(self, node: str) -> float:
        return self._out.get(node, 0.0)

    def out_degrees(self) -> Dict[str, float]:
        """Weighted out-degree of every node (0 for sinks)."""
        return {n: self._out.get(n, 0.0) for n in self._nodes}

    def __eq__(self, other) -> bool:
        if not isinstance(other, RetweetGraph):
            return NotImplemented
        return (
            self._nodeset == other._nodeset
            and self._edges == other._edges
            and self.snapshot_id == other.snapshot_id
        )

    def __repr__(self) -> str:
        return (
            f"RetweetGraph(snapshot_id={self.snapshot_id}, "
            f"nodes={len(self._nodes)}, edges={len(self._edges)})"
        )


class UndirectedGraph:
    """Undirected weighted graph; each edge is stored once under a sorted key."""

    __slots__ = ("_nodes", "_edges", "_index", "snapshot_id")

    def __init__(self, edges: Mapping[Tuple[str, str], float], nodes: Iterable[str] = (), snapshot_id=None):
        self.snapshot_id = snapshot_id
        order: Dict[str, None] = {}
        clean: Dict[Tuple[str, str], float] = {}
        for (u, v), w in edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if w <= 0:
                raise ValueError(f"non-positive weight on {u!r}-{v!r}")
            key = (u, v) if u <= v else (v, u)
            clean[key] = clean.get(key, 0.0) + float(w)
            order.setdefault(u)
            order.setdefault(v)
        for n in nodes:
            order.setdefault(n)
        self._nodes = tuple(order)
        self._edges = clean
        self._index = {n: i for i, n in enumerate(self._nodes)}

    @classmethod
    def from_edge_list(cls, pairs: Iterable[Tuple[str, str]], nodes: Iterable[str] = ()):
        """Unit-weight graph from an edge list; repeated pairs are collapsed."""
        edges = {}
        for u, v in pairs:
            if u == v:
                continue
            edges[(u, v) if u <= v else (v, u)] = 1.0
        return cls(edges, nodes)

    @property
    def nodes(self) -> Tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> Mapping[Tuple[str, str], float]:
        return dict(self._edges)

    def edge_items(self):
        return self._edges.items()

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node: str) -> bool:
        return node in self._index

    def number_of_edges(self) -> int:
        return len(self._edges)

    def weight(self, u: str, v: str) -> float:
        return self._edges.get((u, v) if u <= v else (v, u), 0.0)

    def total_weight(self) -> float:
        return float(sum(self._edges.values()))

    def index(self, node: str) -> int:
        return self._index[node]

    def to_csr(self):
        """Symmetric adjacency in CSR form: ``(indptr, indices, weights)``.

        Rows follow :attr:`nodes` order and neighbours within a row follow
        edge insertion order, which keeps downstream traversal deterministic.
        """
        n = len(self._nodes)
        deg = np.zeros(n + 1, dtype=np.int64)
        src = np.empty(2 * len(self._edges), dtype=np.int64)
        dst = np.empty_like(src)
        wts = np.empty(2 * len(self._edges), dtype=np.float64)
        for k, ((u, v), w) in enumerate(self._edges.items()):
            i, j = self._index[u], self._index[v]
            src[2 * k], dst[2 * k], wts[2 * k] = i, j, w
            src[2 * k + 1], dst[2 * k + 1], wts[2 * k + 1] = j, i, w
        np.add.at(deg, src + 1, 1)
        indptr = np.cumsum(deg)
        order = np.argsort(src, kind="stable")
        return indptr, dst[order], wts[order]

    def __eq__(self, other) -> bool:
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return set(self._nodes) == set(other._nodes) and self._edges == other._edges

    def __repr__(self) -> str:
        return f"UndirectedGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"


def to_undirected(g: RetweetGraph) -> UndirectedGraph:
    """Drop edge direction; reciprocal edges are merged by summing weights."""
    return UndirectedGraph(dict(g.edge_items()), g.nodes, g.snapshot_id)


def weighted_out_degree(g: RetweetGraph, u: str) -> float:
    if u not in g:
        raise KeyError(f"unknown node {u!r}")
    return g.out_degree(u)


def write_edge_list(g, path) -> None:
    """Write ``src,dst,weight`` (directed) or ``u,v,weight`` (undirected)."""
    header = ("src", "dst", "weight") if isinstance(g, RetweetGraph) else ("u", "v", "weight")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for (u, v), w in g.edge_items():
            writer.writerow((u, v, repr(w)))


def read_edge_list(path, snapshot_id: Optional[int] = None, nodes: Iterable[str] = ()):
    """Inverse of :func:`write_edge_list`; the header decides the graph type."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        edges = {(row[0], row[1]): float(row[2]) for row in reader if row}
    if header == ("src", "dst", "weight"):
        return RetweetGraph(edges, nodes, snapshot_id=snapshot_id)
    if header == ("u", "v", "weight"):
        return UndirectedGraph(edges, nodes)
    raise ValueError(f"{path}: unrecognised edge-list header {header!r}")
