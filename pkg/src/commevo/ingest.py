"""Parsing of retweet event files (CSV or JSON lines)."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, List, TextIO, Union

logger = logging.getLogger(__name__)

FIELDS = ("time", "author", "retweeter", "post_id")


class EventParseError(ValueError):
    """A record could not be turned into a :class:`RetweetEvent`."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, order=True)
class RetweetEvent:
    time: int
    author: str
    retweeter: str
    post_id: str


@dataclass
class ParseResult:
    events: List[RetweetEvent]
    dropped: int = 0  # self-retweets
    skipped: int = 0  # malformed records (skip mode only)
    errors: List[EventParseError] = field(default_factory=list)

    @property
    def records(self) -> int:
        return len(self.events) + self.dropped + self.skipped


def parse_timestamp(value: Union[str, int, float]) -> int:
    """Epoch seconds from an integer/float epoch or an ISO-8601 UTC string.

    Sub-second precision is truncated.  Strings must carry an explicit UTC
    designator (``Z`` or ``+00:00``); any other offset is rejected.
    """
    if isinstance(value, bool):
        raise ValueError(f"invalid timestamp {value!r}")
    if isinstance(value, (int, float)):
        t = int(value)
    else:
        text = str(value).strip()
        if not text:
            raise ValueError("empty timestamp")
        try:
            t = int(float(text))
        except (ValueError, OverflowError):
            iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
            try:
                dt = datetime.fromisoformat(iso)
            except ValueError:
                raise ValueError(f"unparseable timestamp {text!r}") from None
            if dt.tzinfo is None or dt.utcoffset().total_seconds() != 0:
                raise ValueError(f"timestamp {text!r} is not UTC")
            t = int(dt.timestamp())
    if t < 0:
        raise ValueError(f"negative timestamp {value!r}")
    return t


def format_timestamp(t: int) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _token(value, name: str) -> str:
    if value is None:
        raise ValueError(f"missing {name}")
    text = str(value).strip()
    if not text:
        raise ValueError(f"empty {name}")
    if any(ch.isspace() for ch in text):
        raise ValueError(f"whitespace in {name} {text!r}")
    return text


def _make_event(record: dict) -> RetweetEvent:
    return RetweetEvent(
        time=parse_timestamp(record.get("time") if record.get("time") is not None else ""),
        author=_token(record.get("author"), "author"),
        retweeter=_token(record.get("retweeter"), "retweeter"),
        post_id=_token(record.get("post_id"), "post_id"),
    )


def _csv_records(stream: TextIO):
    reader = csv.reader(stream)
    header = None
    for row in reader:
        lineno = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if header is None:
            names = [c.strip() for c in row]
            if set(FIELDS) <= set(names):
                header = names
                continue
            # headerless input falls back to the canonical column order
            header = list(FIELDS)
        if len(row) != len(header):
            yield lineno, ValueError(f"expected {len(header)} fields, got {len(row)}")
            continue
        yield lineno, dict(zip(header, row))


def _jsonl_records(stream: TextIO):
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield lineno, ValueError(f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(obj, dict):
            yield lineno, ValueError("record is not a JSON object")
            continue
        yield lineno, obj


def parse_events(stream: Union[TextIO, str], format: str = "csv", on_error: str = "raise") -> ParseResult:
    """Read retweet events from a CSV or JSONL text stream.

    Self-retweets are dropped and counted.  With ``on_error="raise"`` the
    first malformed record raises :class:`EventParseError`; with
    ``on_error="skip"`` such records are counted and collected instead.
    Returned events are sorted by time (stable for equal timestamps).
    """
    if on_error not in ("raise", "skip"):
        raise ValueError(f"on_error must be 'raise' or 'skip', not {on_error!r}")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    if format == "csv":
        records = _csv_records(stream)
    elif format == "jsonl":
        records = _jsonl_records(stream)
    else:
        raise ValueError(f"unknown format {format!r}")

    result = ParseResult(events=[])
    for lineno, rec in records:
        try:
            if isinstance(rec, Exception):
                raise rec
            ev = _make_event(rec)
        except ValueError as exc:
            err = EventParseError(lineno, str(exc))
            if on_error == "raise":
                raise err from None
            result.errors.append(err)
            result.skipped += 1
            continue
        if ev.author == ev.retweeter:
            result.dropped += 1
            continue
        result.events.append(ev)
    result.events.sort(key=lambda e: e.time)
    if result.dropped or result.skipped:
        logger.info("dropped %d self-retweets, skipped %d malformed records", result.dropped, result.skipped)
    return result


def read_events(paths: Iterable, format: str = None, on_error: str = "raise") -> ParseResult:
    """Parse and merge several event files; format is inferred from the suffix."""
    merged = ParseResult(events=[])
    for path in paths:
        path = str(path)
        fmt = format or ("jsonl" if path.endswith((".jsonl", ".json")) else "csv")
        with open(path, encoding="utf-8", newline="") as fh:
            part = parse_events(fh, fmt, on_error)
        merged.events.extend(part.events)
        merged.dropped += part.dropped
        merged.skipped += part.skipped
        merged.errors.extend(part.errors)
    merged.events.sort(key=lambda e: e.time)
    return merged


def write_events(events: Iterable[RetweetEvent], stream: TextIO, format: str = "csv") -> None:
    if format == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(FIELDS)
        for ev in events:
            writer.writerow((format_timestamp(ev.time), ev.author, ev.retweeter, ev.post_id))
    elif format == "jsonl":
        for ev in events:
            stream.write(json.dumps({"time": ev.time, "author": ev.author,
                                     "retweeter": ev.retweeter, "post_id": ev.post_id}) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")
