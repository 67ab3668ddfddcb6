"""Parsing, ordering and quality filtering of raw location-event streams.

Two wire formats are supported:

* CSV with header line ``tag_id,t,x,y`` (UTF-8, ``.`` decimal separator,
  LF or CRLF line endings).
* JSONL with one object per line carrying keys ``tag_id``, ``t``, ``x``
  and ``y``; extra keys are ignored.

Times are relative seconds within a run; positions are meters.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Mapping, Sequence, Union

import numpy as np

from .geometry import TrackGeometry, project_points


class EventFormatError(ValueError):
    """A malformed record in an event stream.

    Carries the 1-based ``line`` number and the offending ``field``
    name when known.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = f" (line {line}" + (f", field {field!r})" if field else ")") if line else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class LocationEvent:
    """One asynchronous position fix for one tag."""

    tag_id: str
    t: float  # seconds, >= 0
    x: float  # meters
    y: float  # meters

    def __post_init__(self):
        if not self.tag_id:
            raise ValueError("tag_id must be non-empty")
        if any(ch in self.tag_id for ch in ",\r\n"):
            raise ValueError(f"tag_id must not contain separators, got {self.tag_id!r}")
        if not math.isfinite(self.t) or self.t < 0.0:
            raise ValueError(f"t must be finite and >= 0, got {self.t!r}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position must be finite, got ({self.x!r}, {self.y!r})")


CSV_HEADER = "tag_id,t,x,y"
_CSV_FIELDS = ("tag_id", "t", "x", "y")


def _decode(source: Union[bytes, BinaryIO, io.IOBase]) -> str:
    data = source if isinstance(source, bytes) else source.read()
    if isinstance(data, str):  # already-decoded text stream
        text = data
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EventFormatError(f"input is not valid UTF-8: {exc}") from None
    return text.lstrip("﻿")


def _event_from_fields(tag_id: str, values: Mapping[str, object], line: int) -> LocationEvent:
    parsed = {}
    for name in ("t", "x", "y"):
        raw = values[name]
        if isinstance(raw, bool):
            raise EventFormatError(f"non-numeric value {raw!r}", line=line, field=name)
        try:
            parsed[name] = float(raw)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise EventFormatError(f"non-numeric value {raw!r}", line=line, field=name) from None
        if not math.isfinite(parsed[name]):
            raise EventFormatError(f"non-finite value {raw!r}", line=line, field=name)
    if parsed["t"] < 0.0:
        raise EventFormatError(f"negative time {parsed['t']!r}", line=line, field="t")
    if not tag_id:
        raise EventFormatError("empty tag_id", line=line, field="tag_id")
    if any(ch in tag_id for ch in ",\r\n"):
        raise EventFormatError(f"tag_id contains separator characters: {tag_id!r}",
                               line=line, field="tag_id")
    return LocationEvent(tag_id=tag_id, t=parsed["t"], x=parsed["x"], y=parsed["y"])


def parse_events(source: Union[bytes, BinaryIO], format: str = "csv") -> list[LocationEvent]:
    """Parse an event stream into :class:`LocationEvent` records.

    Record order is preserved.  Empty input yields an empty list;
    malformed rows raise :class:`EventFormatError` with line context.
    """
    text = _decode(source)
    if format == "csv":
        return _parse_csv(text)
    if format == "jsonl":
        return _parse_jsonl(text)
    raise ValueError(f"unknown event format {format!r} (expected 'csv' or 'jsonl')")


def _parse_csv(text: str) -> list[LocationEvent]:
    lines = text.splitlines()
    if not lines:
        return []
    if lines[0].strip() != CSV_HEADER:
        raise EventFormatError(
            f"expected header {CSV_HEADER!r}, got {lines[0].strip()!r}", line=1)
    events = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise EventFormatError(
                f"expected 4 comma-separated fields, got {len(parts)}", line=number)
        tag_id = parts[0]
        events.append(_event_from_fields(
            tag_id, {"t": parts[1], "x": parts[2], "y": parts[3]}, line=number))
    return events


def _parse_jsonl(text: str) -> list[LocationEvent]:
    events = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EventFormatError(f"invalid JSON: {exc.msg}", line=number) from None
        if not isinstance(obj, dict):
            raise EventFormatError("record is not a JSON object", line=number)
        for key in _CSV_FIELDS:
            if key not in obj:
                raise EventFormatError(f"missing key {key!r}", line=number, field=key)
        tag_id = obj["tag_id"]
        if not isinstance(tag_id, str):
            raise EventFormatError(f"tag_id must be a string, got {tag_id!r}",
                                   line=number, field="tag_id")
        events.append(_event_from_fields(tag_id, obj, line=number))
    return events


def write_events_csv(events: Iterable[LocationEvent], path) -> None:
    """Write events to the CSV wire format (header ``tag_id,t,x,y``)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for ev in events:
            fh.write(f"{ev.tag_id},{ev.t!r},{ev.x!r},{ev.y!r}\n")


@dataclass(frozen=True)
class TagTrack:
    """Time-ordered samples of one tag, strictly increasing in t."""

    DUPLICATE_POLICY = "keep-first"  # equal-t distinct-position resolution

    tag_id: str
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    dropped_exact_duplicates: int = 0
    dropped_time_collisions: int = 0

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class TrackBuildResult:
    tracks: dict[str, TagTrack]
    skipped: dict[str, str] = field(default_factory=dict)  # tag_id -> reason


def build_tracks(events: Sequence[LocationEvent]) -> TrackBuildResult:
    """Group events by tag into t-sorted tracks.

    Exact duplicate (t, x, y) records are dropped.  Equal-t records with
    distinct positions keep the first in input order; the rest are
    dropped and counted on the track.  Tags with fewer than 2 surviving
    samples are excluded and listed in the skip report.
    """
    by_tag: dict[str, list[LocationEvent]] = {}
    for ev in events:
        by_tag.setdefault(ev.tag_id, []).append(ev)

    tracks: dict[str, TagTrack] = {}
    skipped: dict[str, str] = {}
    for tag_id, group in by_tag.items():
        ordered = sorted(group, key=lambda ev: ev.t)  # stable: input order on ties
        times, xs, ys = [], [], []
        seen = set()
        exact_drops = 0
        tie_drops = 0
        for ev in ordered:
            key = (ev.t, ev.x, ev.y)
            if key in seen:
                exact_drops += 1
                continue
            seen.add(key)
            if times and ev.t == times[-1]:
                tie_drops += 1
                continue
            times.append(ev.t)
            xs.append(ev.x)
            ys.append(ev.y)
        if len(times) < 2:
            skipped[tag_id] = f"only {len(times)} usable sample(s), need >= 2"
            continue
        tracks[tag_id] = TagTrack(
            tag_id=tag_id,
            times=np.array(times, dtype=float),
            xs=np.array(xs, dtype=float),
            ys=np.array(ys, dtype=float),
            dropped_exact_duplicates=exact_drops,
            dropped_time_collisions=tie_drops,
        )
    return TrackBuildResult(tracks=tracks, skipped=skipped)


@dataclass(frozen=True)
class QcParams:
    """Track quality thresholds; defaults separate sensor noise from malfunction."""

    margin: float = 0.5             # meters beyond the corridor half-width
    v_max: float = 10.0             # m/s, implausible pedestrian speed
    oob_threshold: float = 0.20     # max tolerated out-of-bounds fraction
    overspeed_threshold: float = 0.05


@dataclass(frozen=True)
class QualityReport:
    tag_id: str
    sample_count: int
    mean_update_rate: float         # Hz, (n - 1) / (t_last - t_first)
    out_of_bounds_fraction: float
    overspeed_fraction: float
    accepted: bool
    reasons: tuple[str, ...] = ()
    dropped_exact_duplicates: int = 0
    dropped_time_collisions: int = 0


def assess_track_quality(track: TagTrack, geometry: TrackGeometry,
                         params: QcParams = QcParams()) -> QualityReport:
    """Score one track against the physical track bounds and speed limit.

    A sample is out of bounds when its lateral distance from the
    centerline exceeds half the corridor width plus ``params.margin``.
    A consecutive pair is overspeed when the implied 2D speed exceeds
    ``params.v_max``.  The verdict is rejected when either fraction
    exceeds its threshold.
    """
    _, d = project_points(geometry, track.xs, track.ys)
    limit = 0.5 * geometry.corridor_width + params.margin
    oob_fraction = float(np.mean(np.abs(d) > limit))

    dt = np.diff(track.times)
    dist = np.hypot(np.diff(track.xs), np.diff(track.ys))
    speeds = dist / dt
    overspeed_fraction = float(np.mean(speeds > params.v_max))

    n = len(track)
    rate = (n - 1) / (track.times[-1] - track.times[0])

    reasons = []
    if oob_fraction > params.oob_threshold:
        reasons.append("out_of_bounds")
    if overspeed_fraction > params.overspeed_threshold:
        reasons.append("overspeed")

    return QualityReport(
        tag_id=track.tag_id,
        sample_count=n,
        mean_update_rate=float(rate),
        out_of_bounds_fraction=oob_fraction,
        overspeed_fraction=overspeed_fraction,
        accepted=not reasons,
        reasons=tuple(reasons),
        dropped_exact_duplicates=track.dropped_exact_duplicates,
        dropped_time_collisions=track.dropped_time_collisions,
    )
