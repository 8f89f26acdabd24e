"""Pipeline configuration: flat ``key = value`` files with flag overrides."""

from __future__ import annotations

import configparser
import re
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from typing import List, Optional

from .community import EnsembleConfig
from .snapshot import DAY, WEEK

_UNITS = {"s": 1, "m": 60, "h": 3600, "d": DAY, "w": WEEK}


class ConfigError(ValueError):
    """Raised with every violation found, one per line."""

    def __init__(self, problems: List[str]):
        super().__init__("\n".join(problems))
        self.problems = problems


def parse_duration(value) -> int:
    """Seconds from ``"24w"``, ``"7d"``, ``"12h"``, ``"30m"``, ``"90s"`` or a bare number of seconds."""
    if isinstance(value, (int, float)):
        return int(value)
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([smhdw]?)\s*", str(value))
    if not m:
        raise ValueError(f"bad duration {value!r}")
    return int(float(m.group(1)) * _UNITS.get(m.group(2) or "s"))


def parse_instant(value) -> int:
    """Epoch seconds from a number, an ISO date (UTC midnight) or an ISO UTC datetime."""
    if isinstance(value, (int, float)):
        return int(value)
    text = str(value).strip()
    if re.fullmatch(r"\d+", text):
        return int(text)
    if re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
        return int(datetime.fromisoformat(text).replace(tzinfo=timezone.utc).timestamp())
    from .ingest import parse_timestamp

    return parse_timestamp(text)


@dataclass
class PipelineConfig:
    input: List[str] = field(default_factory=list)
    output: str = "out"
    format: Optional[str] = None
    on_error: str = "raise"
    window: str = "24w"
    step: str = "1w"
    half_life: str = "4w"
    start: Optional[str] = None
    end: Optional[str] = None
    trials: int = 100
    threshold: float = 0.9
    seed: int = 0
    k: int = 3
    top_k: int = 5
    min_size: Optional[int] = None
    edge_threshold: Optional[float] = None
    threads: int = 1

    # ------------------------------------------------------------------
    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Optional[dict] = None) -> "PipelineConfig":
        """File values first, then non-None ``overrides``; raises :class:`ConfigError`."""
        raw = {}
        problems = []
        if path:
            parser = configparser.ConfigParser(interpolation=None)
            with open(path, encoding="utf-8") as fh:
                parser.read_string("[pipeline]\n" + fh.read())
            for key, value in parser["pipeline"].items():
                key = key.replace("-", "_")
                if key not in cls.keys():
                    problems.append(f"unknown config key {key!r}")
                    continue
                raw[key] = value
        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key] = value
        cfg = cls()
        for f in fields(cls):
            if f.name not in raw:
                continue
            value = raw[f.name]
            try:
                setattr(cfg, f.name, _coerce(f.name, value))
            except (TypeError, ValueError):
                problems.append(f"{f.name}: cannot interpret {value!r}")
        problems.extend(cfg.violations())
        if problems:
            raise ConfigError(problems)
        return cfg

    def violations(self) -> List[str]:
        out = []
        for name in ("window", "step", "half_life"):
            try:
                if parse_duration(getattr(self, name)) <= 0:
                    out.append(f"{name} must be positive")
            except ValueError:
                out.append(f"{name}: bad duration {getattr(self, name)!r}")
        for name in ("start", "end"):
            value = getattr(self, name)
            if value is not None:
                try:
                    parse_instant(value)
                except ValueError:
                    out.append(f"{name}: bad date {value!r}")
        if self.start is not None and self.end is not None and not out:
            if parse_instant(self.start) + parse_duration(self.window) > parse_instant(self.end):
                out.append("start + window must not exceed end")
        out.extend(EnsembleConfig(self.trials, self.threshold, self.seed).violations())
        if self.k < 0:
            out.append("k must be non-negative")
        if self.top_k < 1:
            out.append("top_k must be at least 1")
        if self.min_size is not None and self.min_size < 1:
            out.append("min_size must be at least 1")
        if self.edge_threshold is not None and self.edge_threshold < 0:
            out.append("edge_threshold must be non-negative")
        if self.threads < 1:
            out.append("threads must be at least 1")
        if self.format not in (None, "csv", "jsonl"):
            out.append("format must be csv or jsonl")
        if self.on_error not in ("raise", "skip"):
            out.append("on_error must be raise or skip")
        return out

    def ensemble(self) -> EnsembleConfig:
        return EnsembleConfig(self.trials, self.threshold, self.seed)

    def to_dict(self) -> dict:
        return asdict(self)


def _coerce(name: str, value):
    if name == "input":
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        return [str(v) for v in value]
    if name in ("trials", "seed", "k", "top_k", "threads"):
        return int(value)
    if name == "min_size":
        return None if str(value).strip().lower() in ("", "none") else int(value)
    if name == "threshold":
        return float(value)
    if name == "edge_threshold":
        return None if str(value).strip().lower() in ("", "none", "median") else float(value)
    if name in ("start", "end", "format"):
        return None if str(value).strip().lower() in ("", "none") else str(value).strip()
    return str(value).strip()
