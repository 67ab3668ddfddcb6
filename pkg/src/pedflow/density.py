"""Section occupancy and density.

Occupancy N(t) is a right-continuous step function built by sweeping the
entrance (+1) and exit (-1) events of all crossings; simultaneous events
process exits first.  Instantaneous density is N(t) over the section
length, and each crossing's density is the exact time average of that
step function over the crossing window (piecewise-constant integration,
no quadrature error).

Every pedestrian counts itself while inside the section, so a crossing's
density is never below one person per section length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .crossings import Crossing, CrossingError


@dataclass(frozen=True)
class OccupancyProfile:
    """Step function N(t): ``counts[k]`` persons on [times[k], times[k+1])."""

    times: np.ndarray    # strictly increasing breakpoints
    counts: np.ndarray   # occupancy from each breakpoint on
    span: tuple[float, float] | None  # [first entrance, last exit], None if empty

    def occupancy_at(self, t):
        """N(t) with right-continuous steps; 0 outside the run span."""
        t = np.asarray(t, dtype=float)
        if self.times.size == 0:
            n = np.zeros(t.shape, dtype=int)
        else:
            idx = np.searchsorted(self.times, t, side="right") - 1
            n = np.where(idx >= 0, self.counts[np.maximum(idx, 0)], 0)
        return int(n) if t.ndim == 0 else n


def build_occupancy(crossings: Sequence[Crossing]) -> OccupancyProfile:
    """Sweep all entrance/exit events into an occupancy step function."""
    if not crossings:
        return OccupancyProfile(times=np.empty(0), counts=np.empty(0, dtype=int), span=None)
    events = []
    for c in crossings:
        if c.t_exit <= c.t_entry:
            raise CrossingError(
                f"crossing {c.tag_id}/{c.loop} has non-positive duration")
        events.append((c.t_exit, 0, -1))   # exits before entrances on ties
        events.append((c.t_entry, 1, +1))
    events.sort(key=lambda e: (e[0], e[1]))

    times: list[float] = []
    counts: list[int] = []
    level = 0
    for t, _, delta in events:
        level += delta
        if times and times[-1] == t:
            counts[-1] = level
        else:
            times.append(t)
            counts.append(level)
    # drop breakpoints where simultaneous events cancelled out
    keep_times: list[float] = []
    keep_counts: list[int] = []
    for t, n in zip(times, counts):
        if keep_counts and keep_counts[-1] == n:
            continue
        keep_times.append(t)
        keep_counts.append(n)

    span = (min(c.t_entry for c in crossings), max(c.t_exit for c in crossings))
    return OccupancyProfile(times=np.array(keep_times), counts=np.array(keep_counts, dtype=int),
                            span=span)


def instantaneous_density(profile: OccupancyProfile, t: float, section_length: float) -> float:
    """N(t) / section length, persons per meter."""
    if section_length <= 0.0:
        raise ValueError(f"section_length must be positive, got {section_length!r}")
    return profile.occupancy_at(t) / section_length


def mean_occupancy(profile: OccupancyProfile, t_start: float, t_end: float) -> float:
    """Exact time average of N over [t_start, t_end]."""
    if t_end <= t_start:
        raise CrossingError(
            f"window must have positive duration, got [{t_start!r}, {t_end!r}]")
    times, counts = profile.times, profile.counts
    if times.size == 0:
        return 0.0
    # integrate each constant segment clipped to the window
    edges = np.concatenate([[t_start], np.clip(times, t_start, t_end), [t_end]])
    # segment values: 0 before the first breakpoint, counts[k] after times[k]
    values = np.concatenate([[0], counts])
    lengths = np.diff(edges)
    total = float(np.dot(values, lengths))
    return total / (t_end - t_start)


def mean_crossing_density(profile: OccupancyProfile, crossing: Crossing,
                          section_length: float) -> float:
    """Mean density over the crossing window, persons per meter.

    The profile must include the crossing's own entrance and exit events
    (the pedestrian counts itself while inside).
    """
    if section_length <= 0.0:
        raise ValueError(f"section_length must be positive, got {section_length!r}")
    return mean_occupancy(profile, crossing.t_entry, crossing.t_exit) / section_length


@dataclass(frozen=True)
class CrossingMetric:
    """A crossing with its mean density attached."""

    crossing: Crossing
    density: float  # persons per meter


def attach_densities(profile: OccupancyProfile, crossings: Sequence[Crossing],
                     section_length: float, exclude_self: bool = False) -> list[CrossingMetric]:
    """Compute one :class:`CrossingMetric` per crossing.

    With ``exclude_self`` the crossing pedestrian's own presence is
    subtracted, lowering every density by one person per section length.
    """
    correction = 1.0 / section_length if exclude_self else 0.0
    return [
        CrossingMetric(crossing=c,
                       density=mean_crossing_density(profile, c, section_length) - correction)
        for c in crossings
    ]
