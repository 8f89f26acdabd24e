"""Louvain modularity optimisation and the Ensemble Louvain consensus."""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Sequence

import numpy as np
from numba import njit

from .graph import UndirectedGraph
from .partition import Partition

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finaliser; spreads consecutive seeds over the 64-bit space."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed handed to :func:`louvain` for ensemble trial ``trial``."""
    return master_seed + trial


class UnionFind:
    """Disjoint sets over arbitrary hashable items (union by size, path halving)."""

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        self.size: Dict[Hashable, int] = {}
        for x in items:
            self.add(x)

    def add(self, x: Hashable) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x: Hashable) -> Hashable:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: Hashable, b: Hashable) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self) -> List[List[Hashable]]:
        """Sets in order of their first inserted member; members keep insertion order."""
        out: Dict[Hashable, List[Hashable]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


# --------------------------------------------------------------------------
# modularity

def _check_cover(g: UndirectedGraph, p: Partition) -> None:
    if len(p) != len(g) or any(n not in p for n in g.nodes):
        raise ValueError("partition must cover exactly the nodes of the graph")


def modularity(g: UndirectedGraph, p: Partition) -> float:
    """Weighted Newman modularity, resolution 1."""
    _check_cover(g, p)
    m = g.total_weight()
    if m <= 0:
        raise ValueError("modularity is undefined on a graph without edges")
    k = p.n_communities
    internal = np.zeros(k)
    tot = np.zeros(k)
    for (u, v), w in g.edge_items():
        cu, cv = p[u], p[v]
        tot[cu] += w
        tot[cv] += w
        if cu == cv:
            internal[cu] += 2 * w
    m2 = 2 * m
    return float((internal.sum() - (tot ** 2).sum() / m2) / m2)


# --------------------------------------------------------------------------
# Louvain kernels

@njit(cache=True, nogil=True)
def _local_moves(indptr, indices, weights, k, m2, labels, tot, order):
    """One sweep of node moves in the given order; returns the number of moves."""
    n = k.shape[0]
    neigh_w = np.zeros(n)
    neigh_c = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    moves = 0
    for idx in range(n):
        i = order[idx]
        ci = labels[i]
        neigh_c[0] = ci
        neigh_w[ci] = 0.0
        seen[ci] = True
        cnt = 1
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j == i:
                continue
            c = labels[j]
            if not seen[c]:
                seen[c] = True
                neigh_w[c] = 0.0
                neigh_c[cnt] = c
                cnt += 1
            neigh_w[c] += weights[p]
        ki = k[i]
        tot[ci] -= ki
        best = ci
        best_gain = neigh_w[ci] - ki * tot[ci] / m2
        # all gain terms are bounded by ki; this margin only absorbs rounding
        eps = 1e-10 * ki
        for q in range(1, cnt):
            c = neigh_c[q]
            gain = neigh_w[c] - ki * tot[c] / m2
            if gain > best_gain + eps:
                best = c
                best_gain = gain
        tot[best] += ki
        labels[i] = best
        if best != ci:
            moves += 1
        for q in range(cnt):
            seen[neigh_c[q]] = False
    return moves


@njit(cache=True, nogil=True)
def _renumber(labels):
    n = labels.shape[0]
    remap = np.full(n, -1, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    nxt = 0
    for i in range(n):
        c = labels[i]
        if remap[c] < 0:
            remap[c] = nxt
            nxt += 1
        out[i] = remap[c]
    return out, nxt


def _aggregate(indptr, indices, weights, labels, n_comm):
    """Collapse communities into super-nodes; internal weight becomes a self-loop."""
    rows = np.repeat(labels, np.diff(indptr))
    cols = labels[indices]
    keys = rows * n_comm + cols
    uniq, inv = np.unique(keys, return_inverse=True)
    w = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
    new_rows = uniq // n_comm
    new_cols = uniq % n_comm
    new_indptr = np.zeros(n_comm + 1, dtype=np.int64)
    np.add.at(new_indptr, new_rows + 1, 1)
    return np.cumsum(new_indptr), new_cols.astype(np.int64), w


def _louvain_labels(indptr, indices, weights, seed: int, max_passes: int = 10_000):
    """Louvain on a CSR graph; returns a community label per node (0..c-1)."""
    n = len(indptr) - 1
    m2 = float(weights.sum())
    if m2 <= 0:
        return np.arange(n, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(mix64(seed)))
    membership = np.arange(n, dtype=np.int64)
    while True:
        size = len(indptr) - 1
        k = np.zeros(size)
        np.add.at(k, np.repeat(np.arange(size), np.diff(indptr)), weights)
        labels = np.arange(size, dtype=np.int64)
        tot = k.copy()
        improved = False
        for _ in range(max_passes):
            order = rng.permutation(size)
            if _local_moves(indptr, indices, weights, k, m2, labels, tot, order) == 0:
                break
            improved = True
        if not improved:
            break
        labels, n_comm = _renumber(labels)
        membership = labels[membership]
        if n_comm == size:
            break
        indptr, indices, weights = _aggregate(indptr, indices, weights, labels, n_comm)
    return _renumber(membership)[0]


def louvain(g: UndirectedGraph, seed: int = 0) -> Partition:
    """Single Louvain run; deterministic for a given seed.

    Each pass visits nodes in a fresh seeded shuffle and moves a node only
    when some neighbouring community strictly improves modularity; on equal
    gains the first community met in the node's adjacency wins.  Levels are
    aggregated until a level makes no move.
    """
    indptr, indices, weights = g.to_csr()
    labels = _louvain_labels(indptr, indices, weights, seed)
    return Partition.from_labels(g.nodes, labels.tolist())


# --------------------------------------------------------------------------
# Ensemble Louvain

@dataclass(frozen=True)
class EnsembleConfig:
    trials: int = 100
    threshold: float = 0.9
    seed: int = 0

    def violations(self) -> List[str]:
        out = []
        if not isinstance(self.trials, int) or self.trials < 1:
            out.append("trials must be a positive integer")
        if not 0 < self.threshold <= 1:
            out.append("threshold must lie in (0, 1]")
        return out

    @property
    def min_count(self) -> int:
        """Co-membership count a node pair needs to be linked."""
        # rounding guards against 0.9 * 100 = 90.00000000000001
        return max(1, math.ceil(round(self.threshold * self.trials, 9)))


@dataclass
class EnsembleResult:
    partition: Partition
    trial_seeds: List[int]
    trial_modularity: List[float]
    trial_communities: List[int]
    trial_labels: np.ndarray = field(repr=False)

    def log(self) -> dict:
        return {
            "trials": [
                {"trial": i, "seed": s, "modularity": q, "communities": c}
                for i, (s, q, c) in enumerate(
                    zip(self.trial_seeds, self.trial_modularity, self.trial_communities)
                )
            ],
            "communities": self.partition.n_communities,
        }


@njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _consensus_union(classes, member_of, n_nodes, min_count, n_candidate):
    """Link label-vector classes co-assigned in at least ``min_count`` trials.

    ``classes`` holds one distinct label vector per row.  A linked pair must
    share a community in at least one of the first ``T - min_count + 1``
    trials, so only pairs inside those trials' communities are inspected.
    """
    n_cls, T = classes.shape
    parent = np.arange(n_cls)
    max_miss = T - min_count
    for s in range(n_candidate):
        order = np.argsort(classes[:, s], kind="mergesort")
        start = 0
        while start < n_cls:
            end = start
            lab = classes[order[start], s]
            while end < n_cls and classes[order[end], s] == lab:
                end += 1
            for a in range(start, end):
                ca = order[a]
                for b in range(a + 1, end):
                    cb = order[b]
                    ra = _find(parent, ca)
                    rb = _find(parent, cb)
                    if ra == rb:
                        continue
                    miss = 0
                    for t in range(T):
                        if classes[ca, t] != classes[cb, t]:
                            miss += 1
                            if miss > max_miss:
                                break
                    if miss <= max_miss:
                        parent[rb] = ra
            start = end
    out = np.empty(n_nodes, dtype=np.int64)
    for i in range(n_nodes):
        out[i] = _find(parent, member_of[i])
    return out


def consensus_labels(trial_labels: np.ndarray, min_count: int) -> np.ndarray:
    """Connected components of the thresholded co-membership graph.

    ``trial_labels`` is a ``(trials, nodes)`` array of per-trial community
    labels.  Returns a component id per node, numbered by first appearance.
    """
    trial_labels = np.asarray(trial_labels, dtype=np.int64)
    T, n = trial_labels.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if not 1 <= min_count <= T:
        raise ValueError("min_count must lie in [1, trials]")
    # nodes with identical label vectors are co-assigned in every trial
    classes, member_of = np.unique(trial_labels.T, axis=0, return_inverse=True)
    member_of = member_of.ravel().astype(np.int64)
    roots = _consensus_union(
        np.ascontiguousarray(classes), member_of, n, min_count, T - min_count + 1
    )
    return _renumber(roots)[0]


def co_membership_counts(partitions: Sequence[Partition]) -> Counter:
    """Count, per unordered node pair, the partitions placing both together.

    Pairs are enumerated only inside communities, never over all node pairs.
    Keys are sorted ``(u, v)`` tuples; absent pairs have count 0.
    """
    counts: Counter = Counter()
    for p in partitions:
        for comm in p.communities():
            members = sorted(comm)
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    counts[(members[a], members[b])] += 1
    return counts


def _run_trial(args):
    indptr, indices, weights, seed = args
    return _louvain_labels(indptr, indices, weights, seed)


def ensemble_louvain_detailed(g: UndirectedGraph, cfg: EnsembleConfig = EnsembleConfig(), threads: int = 1) -> EnsembleResult:
    problems = cfg.violations()
    if problems:
        raise ValueError("; ".join(problems))
    indptr, indices, weights = g.to_csr()
    seeds = [trial_seed(cfg.seed, t) for t in range(cfg.trials)]
    jobs = [(indptr, indices, weights, s) for s in seeds]
    if threads > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(_run_trial, jobs))
    else:
        runs = [_run_trial(j) for j in jobs]
    trial_labels = np.vstack(runs) if runs else np.zeros((0, len(g)), dtype=np.int64)
    labels = consensus_labels(trial_labels, cfg.min_count)
    partition = Partition.from_labels(g.nodes, labels.tolist(), getattr(g, "snapshot_id", None))

    mods, counts = [], []
    m2 = float(weights.sum())
    for lab in runs:
        counts.append(int(lab.max()) + 1 if len(lab) else 0)
        mods.append(_csr_modularity(indptr, indices, weights, lab, m2))
    return EnsembleResult(partition, seeds, mods, counts, trial_labels)


def ensemble_louvain(g: UndirectedGraph, cfg: EnsembleConfig = EnsembleConfig(), threads: int = 1) -> Partition:
    """Consensus of ``cfg.trials`` Louvain runs.

    Two nodes are linked when they share a community in at least
    ``ceil(threshold * trials)`` runs; communities are the connected
    components of that consensus graph.
    """
    return ensemble_louvain_detailed(g, cfg, threads).partition


def _csr_modularity(indptr, indices, weights, labels, m2) -> float:
    if m2 <= 0:
        return 0.0
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    same = labels[rows] == labels[indices]
    k = np.bincount(rows, weights=weights, minlength=len(labels))
    tot = np.bincount(labels, weights=k)
    return float((weights[same].sum() - (tot ** 2).sum() / m2) / m2)
