"""Sankey-style flow data between selected partitions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .partition import Partition

SMALL = "Small"


def churn_flows(pa: Partition, pb: Partition) -> Tuple[int, int, int]:
    """``(core, new, lost)`` node counts going from ``pa`` to ``pb``."""
    a, b = pa.node_set(), pb.node_set()
    return len(a & b), len(b - a), len(a - b)


def community_labels(p: Partition, top_k: int) -> Dict[int, str]:
    """Size-rank labels ``C1..Ck``; smaller communities map to Small."""
    sizes = p.sizes()
    ranked = sorted(range(p.n_communities), key=lambda c: (-sizes[c], c))
    return {c: (f"C{r}" if r <= top_k else SMALL) for r, c in enumerate(ranked, start=1)}


@dataclass
class FlowReport:
    source: int
    target: int
    core: int
    new: int
    lost: int
    matrix: Dict[Tuple[str, str], int]
    source_communities: List[dict]
    target_communities: List[dict]

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "core": self.core,
            "new": self.new,
            "lost": self.lost,
            "matrix": [{"src": s, "dst": d, "count": c} for (s, d), c in self.matrix.items()],
            "source_communities": self.source_communities,
            "target_communities": self.target_communities,
        }


def _metadata(p: Partition, labels: Dict[int, str], core: set, lost_side: bool) -> List[dict]:
    groups: Dict[str, dict] = {}
    for c, size in enumerate(p.sizes()):
        lab = labels[c]
        entry = groups.setdefault(lab, {"label": lab, "rank": None, "size": 0, "core": 0, "communities": []})
        entry["size"] += size
        entry["communities"].append(c)
        if lab != SMALL:
            entry["rank"] = int(lab[1:])
    for node, c in p.items():
        if node in core:
            groups[labels[c]]["core"] += 1
    key = "lost" if lost_side else "new"
    out = []
    for entry in sorted(groups.values(), key=lambda e: (e["rank"] is None, e["rank"] or 0)):
        entry[key] = entry["size"] - entry["core"]
        out.append(entry)
    return out


def transition_flows(pa: Partition, pb: Partition, top_k: int = 5) -> FlowReport:
    """Core-node transitions between the ``top_k`` largest communities of two partitions.

    Matrix cells count core nodes by (community at ``pa``, community at
    ``pb``).  New and lost nodes stay out of the matrix; per-community new
    and lost counts are reported with the community metadata.
    """
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    la, lb = community_labels(pa, top_k), community_labels(pb, top_k)
    core_nodes = pa.node_set() & pb.node_set()
    counts = Counter((la[pa[n]], lb[pb[n]]) for n in pa.nodes if n in core_nodes)

    def order(label):
        return (label == SMALL, int(label[1:]) if label != SMALL else 0)

    matrix = {k: counts[k] for k in sorted(counts, key=lambda k: (order(k[0]), order(k[1])))}
    core, new, lost = churn_flows(pa, pb)
    ids = (pa.snapshot_id, pb.snapshot_id)
    return FlowReport(
        source=ids[0],
        target=ids[1],
        core=core,
        new=new,
        lost=lost,
        matrix=matrix,
        source_communities=_metadata(pa, la, core_nodes, lost_side=True),
        target_communities=_metadata(pb, lb, core_nodes, lost_side=False),
    )
