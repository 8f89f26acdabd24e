"""Hard partitions of snapshot nodes into communities."""

from __future__ import annotations

import csv
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple


class Partition:
    """Assignment of every node to exactly one community.

    Community ids are contiguous from 0 and every id is used.  Instances
    are immutable; build them with :meth:`from_labels` or
    :meth:`from_communities` when the raw labels are not yet normalised.
    """

    __slots__ = ("_assignment", "_nodes", "_communities", "snapshot_id")

    def __init__(self, assignment: Mapping[str, int], snapshot_id: Optional[int] = None):
        assignment = dict(assignment)
        k = len(set(assignment.values()))
        if set(assignment.values()) != set(range(k)):
            raise ValueError("community ids must be contiguous from 0")
        members: List[List[str]] = [[] for _ in range(k)]
        for node, c in assignment.items():
            members[c].append(node)
        self._assignment = assignment
        self._nodes = tuple(assignment)
        self._communities = tuple(frozenset(m) for m in members)
        self.snapshot_id = snapshot_id

    @classmethod
    def from_labels(cls, nodes: Sequence[str], labels: Sequence[Hashable], snapshot_id: Optional[int] = None):
        """Renumber arbitrary labels to 0.. in order of first appearance."""
        if len(nodes) != len(labels):
            raise ValueError("nodes and labels differ in length")
        remap: Dict[Hashable, int] = {}
        assignment = {}
        for node, lab in zip(nodes, labels):
            if node in assignment:
                raise ValueError(f"node {node!r} listed twice")
            assignment[node] = remap.setdefault(lab, len(remap))
        return cls(assignment, snapshot_id)

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[str]], snapshot_id: Optional[int] = None):
        assignment = {}
        cid = 0
        for comm in communities:
            comm = list(comm)
            if not comm:
                continue
            for node in comm:
                if node in assignment:
                    raise ValueError(f"node {node!r} in more than one community")
                assignment[node] = cid
            cid += 1
        return cls(assignment, snapshot_id)

    @property
    def nodes(self) -> Tuple[str, ...]:
        return self._nodes

    @property
    def assignment(self) -> Mapping[str, int]:
        return dict(self._assignment)

    def __getitem__(self, node: str) -> int:
        return self._assignment[node]

    def __contains__(self, node: str) -> bool:
        return node in self._assignment

    def __len__(self) -> int:
        return len(self._assignment)

    def __iter__(self):
        return iter(self._nodes)

    def items(self):
        return self._assignment.items()

    @property
    def n_communities(self) -> int:
        return len(self._communities)

    def communities(self) -> Tuple[FrozenSet[str], ...]:
        return self._communities

    def sizes(self) -> List[int]:
        return [len(c) for c in self._communities]

    def node_set(self) -> FrozenSet[str]:
        return frozenset(self._assignment)

    def labels(self, nodes: Optional[Sequence[str]] = None) -> List[int]:
        nodes = self._nodes if nodes is None else nodes
        return [self._assignment[n] for n in nodes]

    def restrict(self, nodes: Iterable[str]) -> "Partition":
        """Sub-partition induced on ``nodes`` (which must all be present)."""
        keep = [n for n in nodes]
        return Partition.from_labels(keep, [self._assignment[n] for n in keep], self.snapshot_id)

    def __eq__(self, other) -> bool:
        """Equal when both group the same nodes identically (ids may differ)."""
        if not isinstance(other, Partition):
            return NotImplemented
        return set(self._communities) == set(other._communities)

    def __hash__(self):
        return hash(frozenset(self._communities))

    def __repr__(self) -> str:
        return (
            f"Partition(snapshot_id={self.snapshot_id}, nodes={len(self)}, "
            f"communities={self.n_communities})"
        )


def write_partition(p: Partition, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("user_id", "community_id"))
        for node, c in p.items():
            writer.writerow((node, c))


def read_partition(path, snapshot_id: Optional[int] = None) -> Partition:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != ("user_id", "community_id"):
            raise ValueError(f"{path}: expected header user_id,community_id, got {header!r}")
        assignment = {row[0]: int(row[1]) for row in reader if row}
    return Partition(assignment, snapshot_id)
