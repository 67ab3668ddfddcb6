"""Detection and timing of measurement-section traversals.

A tag crosses the section once per loop.  Detection walks the running
maximum (monotone envelope) of the unwrapped arc-length series, which is
valid because true motion is forward only; backward excursions are
sensor noise.  Boundary times are then estimated by linear interpolation
between the two raw samples straddling each boundary, and the crossing
velocity is the section length over the enclosed time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import ArcSample, MeasurementSection

#: below this arc-length difference the interpolation denominator is
#: considered degenerate (far below sensor resolution)
DEGENERATE_SPAN = 1e-6


class CrossingError(ValueError):
    """Inconsistent boundary ordering or timing."""


@dataclass(frozen=True)
class BoundaryBracket:
    """The two samples straddling one lifted section boundary."""

    before: ArcSample   # last sample at or before the boundary
    after: ArcSample    # first sample past the boundary (by envelope)
    boundary_s: float   # entry or exit arc length, lifted by loop * L


@dataclass(frozen=True)
class Crossing:
    """One pedestrian's traversal of the section in one loop."""

    tag_id: str
    loop: int
    t_entry: float
    t_exit: float
    velocity: float     # m/s, section length / (t_exit - t_entry)
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class LoopPassage:
    loop: int
    entry: BoundaryBracket
    exit: BoundaryBracket


@dataclass(frozen=True)
class SkippedLoop:
    loop: int
    reason: str  # "started_past_entrance" | "ended_inside_section"


@dataclass(frozen=True)
class CrossingDetection:
    passages: list[LoopPassage]
    skipped: list[SkippedLoop]


def detect_crossings(samples: Sequence[ArcSample], section: MeasurementSection,
                     total_length: float) -> CrossingDetection:
    """Find one entrance/exit bracket pair per fully traversed loop.

    Loops whose entrance lies behind the first sample (trajectory starts
    past it) or whose exit is never reached (trajectory ends inside the
    section) are reported as skipped.
    """
    if len(samples) < 2:
        return CrossingDetection(passages=[], skipped=[])
    L = float(total_length)
    s = np.array([smp.s_unwrapped for smp in samples], dtype=float)
    env = np.maximum.accumulate(s)
    env_first, env_last = float(env[0]), float(env[-1])

    # k_first: earliest loop whose exit boundary is still ahead of the start
    k_first = math.floor((env_first - section.exit_s) / L) + 1
    # k_last: latest loop whose entrance boundary the envelope strictly exceeds
    k_last = math.ceil((env_last - section.entry_s) / L) - 1

    passages: list[LoopPassage] = []
    skipped: list[SkippedLoop] = []
    for k in range(k_first, k_last + 1):
        b_entry = section.entry_s + k * L
        b_exit = section.exit_s + k * L

        idx_entry = int(np.searchsorted(env, b_entry, side="right"))
        if idx_entry == 0:
            if env_last > b_exit:  # section was traversed, entrance unseen
                skipped.append(SkippedLoop(loop=k, reason="started_past_entrance"))
            continue
        idx_exit = int(np.searchsorted(env, b_exit, side="right"))
        if idx_exit >= len(samples):
            skipped.append(SkippedLoop(loop=k, reason="ended_inside_section"))
            continue
        passages.append(LoopPassage(
            loop=k,
            entry=BoundaryBracket(samples[idx_entry - 1], samples[idx_entry], b_entry),
            exit=BoundaryBracket(samples[idx_exit - 1], samples[idx_exit], b_exit),
        ))
    return CrossingDetection(passages=passages, skipped=skipped)


class BoundaryTime(NamedTuple):
    time: float
    degraded: bool


def interpolate_boundary_time(bracket: BoundaryBracket,
                              degenerate_span: float = DEGENERATE_SPAN) -> BoundaryTime:
    """Linearly interpolate the instant the boundary was crossed.

    Uses the unwrapped positions of the bracketing samples.  When the
    positions differ by less than ``degenerate_span`` (or decrease, which
    envelope-selected brackets cannot produce but defensive callers may),
    falls back to the midpoint time and flags the result as degraded.
    """
    t0, t1 = bracket.before.t, bracket.after.t
    s0, s1 = bracket.before.s_unwrapped, bracket.after.s_unwrapped
    if t1 <= t0:
        raise CrossingError(f"bracket times must increase, got {t0!r} -> {t1!r}")
    span = s1 - s0
    if span < degenerate_span:
        return BoundaryTime(time=0.5 * (t0 + t1), degraded=True)
    return BoundaryTime(time=t0 + (t1 - t0) * (bracket.boundary_s - s0) / span,
                        degraded=False)


def crossing_velocity(t_entry: float, t_exit: float, section_length: float) -> float:
    """Average speed over the section: length over enclosed time."""
    if section_length <= 0.0:
        raise CrossingError(f"section_length must be positive, got {section_length!r}")
    if t_exit <= t_entry:
        raise CrossingError(
            f"exit time must follow entry time, got entry={t_entry!r} exit={t_exit!r}")
    return section_length / (t_exit - t_entry)


@dataclass(frozen=True)
class TagCrossings:
    crossings: list[Crossing]
    skipped: list[SkippedLoop]


def extract_crossings(tag_id: str, samples: Sequence[ArcSample],
                      section: MeasurementSection, total_length: float,
                      degenerate_span: float = DEGENERATE_SPAN) -> TagCrossings:
    """Detect, time and score all crossings of one tag."""
    detection = detect_crossings(samples, section, total_length)
    crossings = []
    for passage in detection.passages:
        entry = interpolate_boundary_time(passage.entry, degenerate_span)
        exit_ = interpolate_boundary_time(passage.exit, degenerate_span)
        flags = []
        if entry.degraded:
            flags.append("degraded_entry")
        if exit_.degraded:
            flags.append("degraded_exit")
        crossings.append(Crossing(
            tag_id=tag_id,
            loop=passage.loop,
            t_entry=entry.time,
            t_exit=exit_.time,
            velocity=crossing_velocity(entry.time, exit_.time, section.length),
            flags=tuple(flags),
        ))
    return TagCrossings(crossings=crossings, skipped=detection.skipped)
