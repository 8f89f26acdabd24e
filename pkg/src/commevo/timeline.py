"""Adjacent-pair similarity along the snapshot sequence and timepoint selection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

from .metrics import max_f1, standard_f1
from .partition import Partition

MAX_EXHAUSTIVE_INTERIOR = 15


def pairwise_f1(partitions: Sequence[Partition]) -> List[float]:
    """``F1(P[i+1] | P[i])`` for every consecutive pair."""
    if len(partitions) < 2:
        raise ValueError("need at least 2 partitions to compare")
    return [standard_f1(a, b).f1 for a, b in zip(partitions, partitions[1:])]


class _PairScores:
    """Memoised standard F1 between arbitrary (earlier, later) partitions."""

    def __init__(self, partitions: Sequence[Partition]):
        self.partitions = partitions
        self._cache: Dict[Tuple[int, int], float] = {}

    def __call__(self, i: int, j: int) -> float:
        key = (i, j)
        if key not in self._cache:
            self._cache[key] = standard_f1(self.partitions[i], self.partitions[j]).f1
        return self._cache[key]


@dataclass
class TimelineReport:
    ids: List[int]
    selected: List[int]
    f1_adjacent: List[float]
    maxf1_adjacent: List[float]
    objective: float
    trace: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        pairs = [
            {"from": a, "to": b, "f1": f, "max_f1": m}
            for a, b, f, m in zip(self.selected, self.selected[1:], self.f1_adjacent, self.maxf1_adjacent)
        ]
        return {
            "ids": self.ids,
            "selected": self.selected,
            "pairs": pairs,
            "objective": self.objective,
            "trace": self.trace,
        }


def _ids(partitions: Sequence[Partition]) -> List[int]:
    return [p.snapshot_id if p.snapshot_id is not None else i for i, p in enumerate(partitions)]


def _report(partitions, keep: List[int], score: Callable, trace) -> TimelineReport:
    ids = _ids(partitions)
    f1s = [score(a, b) for a, b in zip(keep, keep[1:])]
    maxes = [max_f1(partitions[a], partitions[b]) for a, b in zip(keep, keep[1:])]
    return TimelineReport(
        ids=ids,
        selected=[ids[i] for i in keep],
        f1_adjacent=f1s,
        maxf1_adjacent=maxes,
        objective=sum(f1s),
        trace=trace,
    )


def _check_k(n: int, k: int) -> None:
    if n < 2:
        raise ValueError("need at least 2 partitions")
    if not isinstance(k, int) or k < 0:
        raise ValueError("k must be a non-negative integer")
    if k > n - 2:
        raise ValueError(f"k={k} exceeds the {n - 2} available intermediate timepoints")


def select_timepoints(partitions: Sequence[Partition], k: int) -> TimelineReport:
    """Greedy top-down elimination down to ``k`` intermediate timepoints.

    Each step removes the interior timepoint whose two adjacent F1 scores
    have the largest sum (smallest index on ties); the bridged pair is then
    rescored from the partitions themselves.
    """
    n = len(partitions)
    _check_k(n, k)
    score = _PairScores(partitions)
    keep = list(range(n))
    ids = _ids(partitions)
    trace = []
    for step in range(n - 2 - k):
        best_pos, best_val = None, None
        for pos in range(1, len(keep) - 1):
            prev, t, nxt = keep[pos - 1], keep[pos], keep[pos + 1]
            val = score(prev, t) + score(t, nxt)
            if best_val is None or val > best_val:
                best_pos, best_val = pos, val
        removed = keep.pop(best_pos)
        bridged = score(keep[best_pos - 1], keep[best_pos])
        trace.append({"step": step, "removed": ids[removed], "objective": best_val, "bridged_f1": bridged})
    return _report(partitions, keep, score, trace)


def select_timepoints_exhaustive(partitions: Sequence[Partition], k: int) -> TimelineReport:
    """Optimal selection by enumerating every set of ``k`` interior timepoints."""
    n = len(partitions)
    _check_k(n, k)
    if n - 2 > MAX_EXHAUSTIVE_INTERIOR:
        raise ValueError(
            f"{n - 2} interior timepoints exceed the exhaustive limit of {MAX_EXHAUSTIVE_INTERIOR}"
        )
    score = _PairScores(partitions)
    best, best_val = None, None
    for inner in itertools.combinations(range(1, n - 1), k):
        keep = (0,) + inner + (n - 1,)
        val = sum(score(a, b) for a, b in zip(keep, keep[1:]))
        if best_val is None or val < best_val:
            best, best_val = keep, val
    return _report(partitions, list(best), score, [])
