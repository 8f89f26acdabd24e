"""Partition similarity: extended BCubed F1 plus NMI and ARI baselines.

The reference (earlier) partition plays the role of ground truth and the
candidate (later) partition is scored against it.  Nodes present in only
one of the two partitions enter the standard F1 through size factors.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from .partition import Partition


@dataclass(frozen=True)
class SimilarityScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "SimilarityScore":
        return cls(precision, recall, harmonic_mean(precision, recall))


def harmonic_mean(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


class PartitionPair:
    """Reference/candidate partitions and their overlap decomposition."""

    def __init__(self, reference: Partition, candidate: Partition):
        self.reference = reference
        self.candidate = candidate

    @cached_property
    def overlap(self) -> Tuple[str, ...]:
        cand = self.candidate
        return tuple(n for n in self.reference.nodes if n in cand)

    @cached_property
    def reference_only(self) -> Tuple[str, ...]:
        cand = self.candidate
        return tuple(n for n in self.reference.nodes if n not in cand)

    @cached_property
    def candidate_only(self) -> Tuple[str, ...]:
        ref = self.reference
        return tuple(n for n in self.candidate.nodes if n not in ref)

    @cached_property
    def ls(self) -> Partition:
        """Reference communities restricted to the overlap."""
        return self.reference.restrict(self.overlap)

    @cached_property
    def cs(self) -> Partition:
        """Candidate communities restricted to the overlap."""
        return self.candidate.restrict(self.overlap)

    @property
    def same_nodes(self) -> bool:
        return not self.reference_only and not self.candidate_only


def bcubed_node(node: str, reference: Partition, candidate: Partition) -> Tuple[float, float]:
    """Per-node BCubed (precision, recall) on the overlap of the two partitions."""
    if node not in reference or node not in candidate:
        raise KeyError(f"node {node!r} is not in both partitions")
    lc = reference.communities()[reference[node]]
    cc = candidate.communities()[candidate[node]]
    L = {n for n in lc if n in candidate}
    C = {n for n in cc if n in reference}
    common = len(L & C)
    return common / len(C), common / len(L)


def bcubed_pr_labels(reference, candidate):
    """Node-averaged BCubed precision and recall from integer label arrays.

    Both arrays have shape ``(n,)`` or ``(m, n)``: ``m`` pairs of labelings
    of the same ``n`` nodes, labels being non-negative integers.  Returns two
    arrays of shape ``(m,)`` computed from the contingency table of each row.
    """
    ref, cand = np.broadcast_arrays(np.atleast_2d(reference), np.atleast_2d(candidate))
    m, n = ref.shape
    if n == 0:
        return np.zeros(m), np.zeros(m)
    ref = ref.astype(np.int64)
    cand = cand.astype(np.int64)
    k = int(max(ref.max(), cand.max())) + 1
    rows = np.repeat(np.arange(m, dtype=np.int64), n)
    codes, counts = np.unique((rows * k + ref.ravel()) * k + cand.ravel(), return_counts=True)
    row, rest = np.divmod(codes, k * k)
    lab, com = np.divmod(rest, k)
    lsz = np.bincount(rows * k + ref.ravel(), minlength=m * k)
    csz = np.bincount(rows * k + cand.ravel(), minlength=m * k)
    sq = counts.astype(np.float64) ** 2
    pre = np.bincount(row, weights=sq / csz[row * k + com], minlength=m) / n
    rec = np.bincount(row, weights=sq / lsz[row * k + lab], minlength=m) / n
    return pre, rec


def _overlap_pr(ls: Partition, cs: Partition) -> Tuple[float, float]:
    """Node-averaged BCubed precision and recall for partitions of one node set."""
    if len(ls) == 0:
        return 0.0, 0.0
    nodes = ls.nodes
    pre, rec = bcubed_pr_labels(ls.labels(nodes), cs.labels(nodes))
    return float(pre[0]), float(rec[0])


def core_f1(reference: Partition, candidate: Partition) -> SimilarityScore:
    """BCubed F1 of two partitions over the same node set."""
    if len(reference) == 0 or len(candidate) == 0:
        raise ValueError("core-F1 needs non-empty partitions")
    if reference.node_set() != candidate.node_set():
        raise ValueError("core-F1 needs identical node sets; use standard_f1")
    return SimilarityScore.from_pr(*_overlap_pr(reference, candidate))


def standard_f1(reference: Partition, candidate: Partition, pair: PartitionPair = None) -> SimilarityScore:
    """Extended BCubed F1 of ``candidate`` given ``reference``.

    Precision is scaled by the share of the candidate's nodes that lie in
    the overlap and recall by the share of the reference's nodes.
    """
    pair = pair or PartitionPair(reference, candidate)
    n_common = len(pair.overlap)
    if n_common == 0:
        return SimilarityScore(0.0, 0.0, 0.0)
    pre, rec = _overlap_pr(pair.ls, pair.cs)
    pre *= n_common / len(candidate)
    rec *= n_common / len(reference)
    return SimilarityScore.from_pr(pre, rec)


def max_f1(reference: Partition, candidate: Partition) -> float:
    """Upper bound of standard F1: the Sorensen-Dice coefficient of the node sets."""
    a, b = reference.node_set(), candidate.node_set()
    if not a and not b:
        raise ValueError("max-F1 is undefined for two empty partitions")
    return 2.0 * len(a & b) / (len(a) + len(b))


def jaccard_f1_convert(x: float, direction: str) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError("value must lie in [0, 1]")
    if direction == "jaccard_to_f1":
        return 2.0 * x / (1.0 + x)
    if direction == "f1_to_jaccard":
        return x / (2.0 - x)
    raise ValueError(f"unknown direction {direction!r}")


def _contingency(p: Partition, q: Partition):
    if p.node_set() != q.node_set():
        raise ValueError("NMI/ARI need partitions over identical node sets")
    return Counter((p[v], q[v]) for v in p.nodes), p.sizes(), q.sizes(), len(p)


def _entropy(counts, n) -> float:
    return -sum(c / n * math.log(c / n) for c in counts if c)


def nmi(p: Partition, q: Partition) -> float:
    """Normalised mutual information, arithmetic-mean normalisation."""
    joint, a, b, n = _contingency(p, q)
    if n == 0:
        raise ValueError("NMI of empty partitions is undefined")
    ha, hb = _entropy(a, n), _entropy(b, n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    mi = sum(c / n * math.log(c * n / (a[i] * b[j])) for (i, j), c in joint.items())
    return max(0.0, min(1.0, 2.0 * mi / (ha + hb)))


def ari(p: Partition, q: Partition) -> float:
    """Adjusted Rand index (Hubert and Arabie)."""
    joint, a, b, n = _contingency(p, q)
    if n == 0:
        raise ValueError("ARI of empty partitions is undefined")

    def pairs(x):
        return x * (x - 1) / 2.0

    index = sum(pairs(c) for c in joint.values())
    sa = sum(pairs(x) for x in a)
    sb = sum(pairs(x) for x in b)
    expected = sa * sb / pairs(n) if n > 1 else 0.0
    max_index = (sa + sb) / 2.0
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)
