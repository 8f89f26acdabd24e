"""Sliding-window retweet snapshots with exponential edge-weight decay."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .graph import RetweetGraph
from .ingest import RetweetEvent

DAY = 86400
WEEK = 7 * DAY


@dataclass(frozen=True)
class WindowSpec:
    """Window geometry in epoch seconds.

    Snapshot ``i`` covers ``(end_i - window_len, end_i]`` with
    ``end_i = start + window_len + i * step``.
    """

    start: int
    end: int
    window_len: int = 24 * WEEK
    step: int = WEEK
    half_life: int = 4 * WEEK

    def violations(self) -> List[str]:
        out = []
        if self.window_len <= 0:
            out.append("window_len must be positive")
        if self.step <= 0:
            out.append("step must be positive")
        if self.half_life <= 0:
            out.append("half_life must be positive")
        if self.start + self.window_len > self.end:
            out.append("start + window_len must not exceed end")
        return out

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def window_ends(self) -> List[int]:
        self.validate()
        count = (self.end - self.start - self.window_len) // self.step + 1
        return [self.start + self.window_len + i * self.step for i in range(count)]


def decay_factor(age: float, half_life: float) -> float:
    return 2.0 ** (-age / half_life)


def build_snapshot(
    events: Sequence[RetweetEvent],
    window_end: int,
    spec: WindowSpec,
    snapshot_id: int = None,
    _times: Sequence[int] = None,
) -> RetweetGraph:
    """Decayed retweet graph for the window ending at ``window_end``.

    ``events`` must be sorted by time.  Each event inside the window adds
    ``2 ** (-(window_end - t) / half_life)`` to its author->retweeter edge.
    """
    times = _times if _times is not None else [e.time for e in events]
    lo = bisect.bisect_right(times, window_end - spec.window_len)
    hi = bisect.bisect_right(times, window_end)
    weights: Dict[Tuple[str, str], float] = {}
    for ev in events[lo:hi]:
        if ev.author == ev.retweeter:
            continue
        key = (ev.author, ev.retweeter)
        weights[key] = weights.get(key, 0.0) + decay_factor(window_end - ev.time, spec.half_life)
    return RetweetGraph(weights, snapshot_id=snapshot_id)


def build_snapshots(events: Sequence[RetweetEvent], spec: WindowSpec) -> List[RetweetGraph]:
    times = [e.time for e in events]
    if any(a > b for a, b in zip(times, times[1:])):
        raise ValueError("events must be sorted by time")
    return [
        build_snapshot(events, end, spec, snapshot_id=i, _times=times)
        for i, end in enumerate(spec.window_ends())
    ]


def default_range(events: Sequence[RetweetEvent], window_len: int, step: int) -> Tuple[int, int]:
    """Start at UTC midnight of the first event, end at the first window end covering the last event."""
    if not events:
        raise ValueError("no events to derive a window range from")
    first, last = events[0].time, events[-1].time
    start = first - first % DAY
    span = max(0, last - start - window_len)
    steps = -(-span // step)
    return start, start + window_len + steps * step
