"""Community influence, meta-networks, super-communities and retweet h-index."""

from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .community import UnionFind
from .graph import RetweetGraph
from .ingest import RetweetEvent
from .partition import Partition

SMALL = "Small"

CommunityKey = Union[int, str]


@dataclass
class CommunityInfluence:
    community: CommunityKey
    size: int
    w_row: Dict[CommunityKey, float]
    I: float
    I_int: float
    I_ext: float


def _block_weights(g: RetweetGraph, key_of: Mapping[str, CommunityKey]) -> Dict[CommunityKey, Dict[CommunityKey, float]]:
    w: Dict[CommunityKey, Dict[CommunityKey, float]] = defaultdict(dict)
    for (u, v), x in g.edge_items():
        cu, cv = key_of[u], key_of[v]
        row = w[cu]
        row[cv] = row.get(cv, 0.0) + x
    return w


def _check_cover(g: RetweetGraph, p: Partition) -> None:
    missing = [n for n in g.nodes if n not in p]
    if missing:
        raise ValueError(f"{len(missing)} graph nodes are not in the partition, e.g. {missing[0]!r}")


def community_influence(g: RetweetGraph, p: Partition) -> List[CommunityInfluence]:
    """Average internal and external influence of every community of ``p``.

    ``W[i][j]`` sums the directed edge weights from members of community i
    to members of community j; influences are normalised by community size.
    """
    _check_cover(g, p)
    w = _block_weights(g, p.assignment)
    out = []
    for cid, size in enumerate(p.sizes()):
        row = dict(w.get(cid, {}))
        internal = row.get(cid, 0.0)
        total = sum(row.values())
        out.append(CommunityInfluence(cid, size, row, total / size, internal / size, (total - internal) / size))
    return out


@dataclass
class MetaNetwork:
    """Communities as nodes, directed edges carry average external influence."""

    nodes: Dict[CommunityKey, dict]
    edges: Dict[Tuple[CommunityKey, CommunityKey], float]
    members: Dict[CommunityKey, List[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "nodes": [dict(id=k, **v, members=self.members.get(k, [])) for k, v in self.nodes.items()],
            "edges": [{"src": a, "dst": b, "weight": x} for (a, b), x in self.edges.items()],
        }


def default_min_size(p: Partition, fraction: float = 0.01) -> int:
    """Communities smaller than ``fraction`` of the snapshot's nodes fold into Small."""
    return max(1, math.ceil(fraction * len(p)))


def meta_network(g: RetweetGraph, p: Partition, min_size: Optional[int] = None) -> MetaNetwork:
    """Meta-network of ``p``; communities below ``min_size`` merge into one Small node."""
    _check_cover(g, p)
    if min_size is None:
        min_size = default_min_size(p)
    sizes = p.sizes()
    key_of_comm: Dict[int, CommunityKey] = {
        c: (c if s >= min_size else SMALL) for c, s in enumerate(sizes)
    }
    members: Dict[CommunityKey, List[int]] = defaultdict(list)
    msize: Dict[CommunityKey, int] = defaultdict(int)
    for c, s in enumerate(sizes):
        members[key_of_comm[c]].append(c)
        msize[key_of_comm[c]] += s
    key_of = {n: key_of_comm[c] for n, c in p.items()}
    w = _block_weights(g, key_of)

    order = [k for k in members if k != SMALL] + ([SMALL] if SMALL in members else [])
    nodes, edges = {}, {}
    for k in order:
        row = w.get(k, {})
        internal = row.get(k, 0.0)
        external = sum(row.values()) - internal
        nodes[k] = {"size": msize[k], "I_int": internal / msize[k], "I_ext": external / msize[k]}
        for j in order:
            if j != k and row.get(j, 0.0) > 0:
                edges[(k, j)] = row[j] / msize[k]
    return MetaNetwork(nodes, edges, dict(members))


def default_edge_threshold(m: MetaNetwork) -> float:
    """Median weight of the positive meta-edges between non-Small communities."""
    weights = [x for (a, b), x in m.edges.items() if x > 0 and SMALL not in (a, b)]
    return statistics.median(weights) if weights else 0.0


def super_communities(m: MetaNetwork, edge_threshold: Optional[float] = None) -> Dict[CommunityKey, int]:
    """Group communities into weakly connected components of the pruned meta-network.

    Edges lighter than ``edge_threshold`` are dropped and the Small node is
    left out.  Super-community ids are ordered by decreasing total size.
    """
    if edge_threshold is None:
        edge_threshold = default_edge_threshold(m)
    if edge_threshold < 0:
        raise ValueError("edge_threshold must be non-negative")
    keys = [k for k in m.nodes if k != SMALL]
    uf = UnionFind(keys)
    for (a, b), x in m.edges.items():
        if SMALL in (a, b) or x < edge_threshold:
            continue
        uf.union(a, b)
    groups = uf.groups()
    groups.sort(key=lambda grp: (-sum(m.nodes[k]["size"] for k in grp), keys.index(grp[0])))
    return {k: sid for sid, grp in enumerate(groups) for k in grp}


def total_influence(g: RetweetGraph, p: Partition, grouping: Mapping[CommunityKey, int]) -> Dict[int, Tuple[int, float]]:
    """Size and summed weighted out-degree of every super-community's members."""
    out_deg = g.out_degrees()
    result: Dict[int, List] = {}
    for node, c in p.items():
        sid = grouping.get(c)
        if sid is None:
            continue
        acc = result.setdefault(sid, [0, 0.0])
        acc[0] += 1
        acc[1] += out_deg.get(node, 0.0)
    return {sid: (size, total) for sid, (size, total) in sorted(result.items())}


# --------------------------------------------------------------------------
# retweet h-index

@dataclass
class HIndexRecord:
    user: str
    h: int
    h_rank: int
    out_degree: int


def h_index(rt: Iterable[int]) -> int:
    """``max_i min(RT(i), i)`` over retweet counts sorted in decreasing order."""
    best = 0
    for i, x in enumerate(sorted(rt, reverse=True), start=1):
        best = max(best, min(x, i))
    return best


def retweet_hindex(events: Sequence[RetweetEvent], window: Optional[Tuple[int, int]] = None) -> List[HIndexRecord]:
    """Retweet h-index of every author retweeted inside ``window``.

    ``window`` is a half-open ``(start, end]`` interval of epoch seconds;
    raw retweet counts are used, without decay.  Ranks order users by h,
    then by number of distinct retweeters, then by user id.
    """
    per_post: Dict[str, Dict[str, int]] = defaultdict(lambda: defaultdict(int))
    retweeters: Dict[str, set] = defaultdict(set)
    for ev in events:
        if ev.author == ev.retweeter:
            continue
        if window is not None and not window[0] < ev.time <= window[1]:
            continue
        per_post[ev.author][ev.post_id] += 1
        retweeters[ev.author].add(ev.retweeter)
    scored = [(user, h_index(posts.values()), len(retweeters[user])) for user, posts in per_post.items()]
    scored.sort(key=lambda r: (-r[1], -r[2], r[0]))
    return [HIndexRecord(user, h, rank, deg) for rank, (user, h, deg) in enumerate(scored, start=1)]
