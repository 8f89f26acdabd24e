"""Command-line pipeline over on-disk artifacts.

Stages, in order: snapshots -> detect -> compare / select -> flows,
influence, hindex -> report.  Each stage reads the artifacts written by
earlier stages from the output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .community import ensemble_louvain_detailed
from .config import ConfigError, PipelineConfig, parse_duration, parse_instant
from .flows import transition_flows
from .graph import read_edge_list, to_undirected, write_edge_list
from .influence import (
    community_influence,
    default_edge_threshold,
    default_min_size,
    meta_network,
    retweet_hindex,
    super_communities,
    total_influence,
)
from .ingest import EventParseError, format_timestamp, read_events
from .metrics import PartitionPair, ari, max_f1, nmi, standard_f1
from .partition import read_partition, write_partition
from .snapshot import WindowSpec, build_snapshots, default_range
from .timeline import select_timepoints

logger = logging.getLogger("commevo")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2

STAGES = ("snapshots", "detect", "compare", "select", "flows", "influence", "hindex", "report")


class StageError(RuntimeError):
    """A required input or prior-stage artifact is missing or unusable."""


# --------------------------------------------------------------------------
# artifact helpers

def _dump_json(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _load_json(path: Path, stage: str):
    if not path.exists():
        raise StageError(f"missing {path}; run the '{stage}' stage first")
    return json.loads(path.read_text(encoding="utf-8"))


def _manifest(out: Path) -> dict:
    return _load_json(out / "snapshots" / "manifest.json", "snapshots")


def _partition_path(out: Path, i: int) -> Path:
    return out / "partitions" / f"partition_{i}.csv"


def _load_partitions(out: Path, ids: Optional[List[int]] = None):
    if ids is None:
        ids = [s["id"] for s in _manifest(out)["snapshots"]]
    parts = []
    for i in ids:
        path = _partition_path(out, i)
        if not path.exists():
            raise StageError(f"missing {path}; run the 'detect' stage first")
        parts.append(read_partition(path, snapshot_id=i))
    return parts


def _load_snapshot(out: Path, i: int):
    path = out / "snapshots" / f"snapshot_{i}.csv"
    if not path.exists():
        raise StageError(f"missing {path}; run the 'snapshots' stage first")
    return read_edge_list(path, snapshot_id=i)


def _selected(out: Path) -> List[int]:
    return _load_json(out / "timeline.json", "select")["selected"]


def _load_events(cfg: PipelineConfig):
    if not cfg.input:
        raise StageError("no input event files given (--input)")
    for p in cfg.input:
        if not Path(p).exists():
            raise StageError(f"input file {p} does not exist")
    return read_events(cfg.input, cfg.format, cfg.on_error)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


# --------------------------------------------------------------------------
# stages

def stage_snapshots(cfg: PipelineConfig, out: Path) -> None:
    parsed = _load_events(cfg)
    events = parsed.events
    window, step, half_life = (parse_duration(x) for x in (cfg.window, cfg.step, cfg.half_life))
    if cfg.start is None or cfg.end is None:
        d_start, d_end = default_range(events, window, step)
    start = parse_instant(cfg.start) if cfg.start is not None else d_start
    end = parse_instant(cfg.end) if cfg.end is not None else d_end
    spec = WindowSpec(start=start, end=end, window_len=window, step=step, half_life=half_life)
    problems = spec.violations()
    if problems:
        raise ConfigError(problems)
    graphs = build_snapshots(events, spec)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for old in snap_dir.glob("snapshot_*.csv"):
        old.unlink()
    entries = []
    for g in graphs:
        end_t = spec.start + spec.window_len + g.snapshot_id * spec.step
        write_edge_list(g, snap_dir / f"snapshot_{g.snapshot_id}.csv")
        entries.append({
            "id": g.snapshot_id,
            "window_start": end_t - spec.window_len,
            "window_end": end_t,
            "window_end_utc": format_timestamp(end_t),
            "nodes": len(g),
            "edges": g.number_of_edges(),
            "file": f"snapshot_{g.snapshot_id}.csv",
        })
    _dump_json({
        "window": {"start": spec.start, "end": spec.end, "window_len": spec.window_len,
                   "step": spec.step, "half_life": spec.half_life},
        "events": len(events),
        "dropped_self_retweets": parsed.dropped,
        "skipped_records": parsed.skipped,
        "snapshots": entries,
    }, snap_dir / "manifest.json")
    logger.info("wrote %d snapshots", len(entries))


def stage_detect(cfg: PipelineConfig, out: Path) -> None:
    manifest = _manifest(out)
    part_dir = out / "partitions"
    part_dir.mkdir(parents=True, exist_ok=True)
    ens = cfg.ensemble()
    for entry in manifest["snapshots"]:
        i = entry["id"]
        g = to_undirected(_load_snapshot(out, i))
        result = ensemble_louvain_detailed(g, ens, threads=cfg.threads)
        write_partition(result.partition, _partition_path(out, i))
        log = result.log()
        log.update({"snapshot": i, "master_seed": ens.seed, "threshold": ens.threshold,
                    "min_count": ens.min_count})
        _dump_json(log, part_dir / f"ensemble_{i}.json")
        logger.info("snapshot %d: %d communities", i, result.partition.n_communities)


def stage_compare(cfg: PipelineConfig, out: Path) -> None:
    ids = [s["id"] for s in _manifest(out)["snapshots"]]
    if len(ids) < 2:
        raise StageError(f"compare needs at least 2 partitions, found {len(ids)}")
    parts = _load_partitions(out, ids)
    with open(out / "scores.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "f1", "core_f1_applicable", "max_f1", "nmi", "ari"))
        for a, b in zip(parts, parts[1:]):
            pair = PartitionPair(a, b)
            same = pair.same_nodes and len(a) > 0
            writer.writerow((
                b.snapshot_id,
                _fmt(standard_f1(a, b, pair).f1),
                "true" if same else "false",
                _fmt(max_f1(a, b)) if len(a) or len(b) else "",
                _fmt(nmi(a, b)) if same else "",
                _fmt(ari(a, b)) if same else "",
            ))


def stage_select(cfg: PipelineConfig, out: Path) -> None:
    parts = _load_partitions(out)
    if len(parts) < 2:
        raise StageError(f"select needs at least 2 partitions, found {len(parts)}")
    if cfg.k > len(parts) - 2:
        raise ConfigError([f"k={cfg.k} exceeds the {len(parts) - 2} intermediate timepoints available"])
    report = select_timepoints(parts, cfg.k)
    _dump_json(report.to_dict(), out / "timeline.json")


def stage_flows(cfg: PipelineConfig, out: Path) -> None:
    sel = _selected(out)
    parts = _load_partitions(out, sel)
    flows = [transition_flows(a, b, cfg.top_k).to_dict() for a, b in zip(parts, parts[1:])]
    _dump_json({"top_k": cfg.top_k, "pairs": flows}, out / "flows.json")


def stage_influence(cfg: PipelineConfig, out: Path) -> None:
    sel = _selected(out)
    parts = _load_partitions(out, sel)
    inf_dir = out / "influence"
    inf_dir.mkdir(parents=True, exist_ok=True)
    totals = []
    for t, p in zip(sel, parts):
        g = _load_snapshot(out, t)
        min_size = cfg.min_size if cfg.min_size is not None else default_min_size(p)
        meta = meta_network(g, p, min_size)
        threshold = cfg.edge_threshold if cfg.edge_threshold is not None else default_edge_threshold(meta)
        grouping = super_communities(meta, threshold)
        with open(inf_dir / f"influence_{t}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("community", "size", "I", "I_int", "I_ext", "super_community"))
            for ci in community_influence(g, p):
                sid = grouping.get(ci.community)
                writer.writerow((ci.community, ci.size, _fmt(ci.I), _fmt(ci.I_int), _fmt(ci.I_ext),
                                 "" if sid is None else sid))
        meta_doc = meta.to_dict()
        meta_doc.update({"snapshot": t, "min_size": min_size, "edge_threshold": threshold})
        _dump_json(meta_doc, inf_dir / f"meta_network_{t}.json")
        totals.append({
            "snapshot": t,
            "super_communities": [
                {"super_community": sid, "size": size, "total_influence": total,
                 "communities": sorted(c for c, s in grouping.items() if s == sid)}
                for sid, (size, total) in total_influence(g, p, grouping).items()
            ],
        })
    _dump_json({"timepoints": totals}, inf_dir / "totals.json")


def stage_hindex(cfg: PipelineConfig, out: Path) -> None:
    events = _load_events(cfg).events
    windows = []
    timeline = out / "timeline.json"
    if timeline.exists():
        by_id = {s["id"]: s for s in _manifest(out)["snapshots"]}
        for t in _selected(out):
            windows.append((t, (by_id[t]["window_start"], by_id[t]["window_end"])))
    overall = retweet_hindex(events)
    per_t = {t: {r.user: r.h for r in retweet_hindex(events, w)} for t, w in windows}
    with open(out / "hindex.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user", "h", "h_rank", "out_deg"] + [f"h@t{t}" for t, _ in windows])
        for r in overall:
            writer.writerow([r.user, r.h, r.h_rank, r.out_degree] + [per_t[t].get(r.user, "") for t, _ in windows])


def stage_report(cfg: PipelineConfig, out: Path) -> None:
    manifest = _manifest(out)
    scores_path = out / "scores.csv"
    if not scores_path.exists():
        raise StageError(f"missing {scores_path}; run the 'compare' stage first")
    with open(scores_path, newline="", encoding="utf-8") as fh:
        curve = [{"t": int(r["t"]), "f1": float(r["f1"]),
                  "max_f1": float(r["max_f1"]) if r["max_f1"] else None}
                 for r in csv.DictReader(fh)]
    timeline = _load_json(out / "timeline.json", "select")
    totals = _load_json(out / "influence" / "totals.json", "influence")
    communities = {}
    for s in manifest["snapshots"]:
        path = _partition_path(out, s["id"])
        if not path.exists():
            raise StageError(f"missing {path}; run the 'detect' stage first")
        communities[s["id"]] = read_partition(path).n_communities
    _dump_json({
        "events": manifest["events"],
        "dropped_self_retweets": manifest["dropped_self_retweets"],
        "snapshots": [
            {"id": s["id"], "window_end_utc": s["window_end_utc"], "nodes": s["nodes"],
             "edges": s["edges"], "communities": communities[s["id"]]}
            for s in manifest["snapshots"]
        ],
        "f1_curve": curve,
        "selected": timeline["selected"],
        "selected_pairs": timeline["pairs"],
        "super_community_totals": totals["timepoints"],
    }, out / "report.json")


RUNNERS = {
    "snapshots": stage_snapshots,
    "detect": stage_detect,
    "compare": stage_compare,
    "select": stage_select,
    "flows": stage_flows,
    "influence": stage_influence,
    "hindex": stage_hindex,
    "report": stage_report,
}


# --------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("pipeline options (override the config file)")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("-o", "--output", help="output directory for all artifacts (default: out)")
    g.add_argument("-i", "--input", action="append", help="retweet event file (CSV or JSONL); repeatable")
    g.add_argument("--format", choices=("csv", "jsonl"), help="event file format (default: by suffix)")
    g.add_argument("--on-error", dest="on_error", choices=("raise", "skip"),
                   help="malformed records: fail fast or skip and count (default: raise)")
    g.add_argument("--window", help="observation window length, e.g. 24w (default: 24w)")
    g.add_argument("--step", help="slide between snapshots, e.g. 1w (default: 1w)")
    g.add_argument("--half-life", dest="half_life", help="edge-weight half-life, e.g. 4w (default: 4w)")
    g.add_argument("--start", help="left edge of the first window (ISO date/datetime or epoch)")
    g.add_argument("--end", help="right edge of the last window (ISO date/datetime or epoch)")
    g.add_argument("--trials", type=int, help="Louvain trials per ensemble (default: 100)")
    g.add_argument("--threshold", type=float, help="co-membership fraction linking two nodes (default: 0.9)")
    g.add_argument("--seed", type=int, help="master random seed (default: 0)")
    g.add_argument("-k", type=int, dest="k", help="intermediate timepoints to select (default: 3)")
    g.add_argument("--top-k", dest="top_k", type=int, help="communities shown per timepoint in flows (default: 5)")
    g.add_argument("--min-size", dest="min_size", type=int,
                   help="communities below this size fold into Small (default: 1%% of snapshot nodes)")
    g.add_argument("--edge-threshold", dest="edge_threshold", type=float,
                   help="minimum meta-edge weight for super-communities (default: median meta-edge)")
    g.add_argument("--threads", type=int, help="worker threads for Louvain trials (default: 1)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="commevo",
        description="Community evolution in retweet networks: snapshots, Ensemble Louvain, "
                    "BCubed comparison, timepoint selection, flows, influence and h-index.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "snapshots": "build decayed sliding-window snapshots from event files",
        "detect": "run Ensemble Louvain on every snapshot",
        "compare": "score adjacent partitions (F1, max-F1, NMI, ARI)",
        "select": "select k maximally different intermediate timepoints",
        "flows": "export core/new/lost and community transition flows",
        "influence": "community influence, meta-networks and super-communities",
        "hindex": "retweet h-index ranking, overall and per selected timepoint",
        "report": "bundle a summary JSON of all stages",
    }
    for name in STAGES:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k, None) for k in PipelineConfig.keys()}
    try:
        cfg = PipelineConfig.load(args.config, overrides)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        echo = {k: v for k, v in cfg.to_dict().items() if k not in ("output", "threads")}
        _dump_json(echo, out / "config.json")
        RUNNERS[args.command](cfg, out)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (StageError, EventParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
