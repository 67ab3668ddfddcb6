"""Synthetic single-file scenarios with exact ground truth.

Pedestrians walk the loop under a headway rule: each follows the person
ahead at speed min(v0, max(0, (gap - d0) / tau)), integrated with a
fixed explicit step of 0.01 s.  Starts are uniformly spaced over the
loop excluding the measurement section, so that every pedestrian fully
traverses the section exactly once per loop; each leaves the track (and
the predecessor chain) on completing the configured number of loops.

Location events mimic an asynchronous tag reader: per tag, one fix at
run start, one at departure, and in between fixes separated by
exponential inter-event intervals clipped to a configurable range, each
at the true centerline position plus isotropic Gaussian noise.  Optional
erratic tags emit uniform-random positions over the track's bounding
box.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .crossings import Crossing
from .geometry import MeasurementSection, TrackGeometry, centerline_position, track_bounds
from .ingest import LocationEvent

#: integration step of the walking model, seconds
TIME_STEP = 0.01


class ScenarioError(ValueError):
    """Invalid or infeasible scenario configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: TrackGeometry
    section: MeasurementSection
    n_pedestrians: int
    loops_per_pedestrian: int = 2
    v0_mean: float = 1.33     # m/s, desired-speed distribution
    v0_std: float = 0.13      # m/s
    d0: float = 0.4           # meters, standstill headway
    tau: float = 0.5          # seconds, speed adaptation time
    mean_rate: float = 4.74   # Hz, mean tag update rate
    min_interval: float = 0.05  # seconds, inter-event clip bounds
    max_interval: float = 1.0
    noise_sigma: float = 0.1  # meters per axis
    erratic_tags: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_pedestrians < 1:
            raise ScenarioError(f"n_pedestrians must be >= 1, got {self.n_pedestrians!r}")
        if self.loops_per_pedestrian < 1:
            raise ScenarioError(
                f"loops_per_pedestrian must be >= 1, got {self.loops_per_pedestrian!r}")
        for name in ("v0_mean", "d0", "tau", "mean_rate", "min_interval", "max_interval"):
            if getattr(self, name) <= 0.0:
                raise ScenarioError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("v0_std", "noise_sigma"):
            if getattr(self, name) < 0.0:
                raise ScenarioError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.min_interval > self.max_interval:
            raise ScenarioError("min_interval must not exceed max_interval")
        if self.erratic_tags < 0:
            raise ScenarioError(f"erratic_tags must be >= 0, got {self.erratic_tags!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError(f"seed must be a non-negative 64-bit integer, got {self.seed!r}")
        L = self.geometry.total_length
        if self.n_pedestrians * self.d0 >= L:
            raise ScenarioError(
                f"infeasible packing: n_pedestrians * d0 = "
                f"{self.n_pedestrians * self.d0!r} m must be below the track length {L!r} m")


def pedestrian_tag(index: int) -> str:
    return f"ped{index:02d}"


def erratic_tag(index: int) -> str:
    return f"err{index:02d}"


@dataclass(frozen=True)
class GroundTruth:
    """Exact continuous trajectories and crossing statistics of one run."""

    config: ScenarioConfig
    tag_ids: tuple[str, ...]
    desired_speeds: np.ndarray    # v0 per pedestrian, m/s
    start_positions: np.ndarray   # arc length at t = 0, in [0, L)
    departure_times: np.ndarray   # seconds
    trajectories: tuple[tuple[np.ndarray, np.ndarray], ...]  # (times, s) per pedestrian
    crossings: tuple[Crossing, ...] = field(default=())
    grid_dt: float = TIME_STEP


def headway_speed(gap: float, v0: float, d0: float, tau: float) -> float:
    """Speed under the headway rule: min(v0, max(0, (gap - d0) / tau))."""
    return min(v0, max(0.0, (gap - d0) / tau))


def _start_positions(config: ScenarioConfig) -> np.ndarray:
    """Evenly spaced starts over the loop minus the measurement section.

    Keeping the section clear at t = 0 guarantees every pedestrian
    produces one complete crossing per loop walked.
    """
    L = config.geometry.total_length
    section = config.section
    step = (L - section.length) / config.n_pedestrians
    raw = (section.exit_s + (np.arange(config.n_pedestrians) + 0.5) * step) % L
    return np.sort(raw)


def simulate_run(config: ScenarioConfig) -> GroundTruth:
    """Integrate the walking model and return exact ground truth.

    Positions are recorded on the fixed 0.01 s grid plus one exact final
    point where each pedestrian completes its loops and leaves.
    """
    n = config.n_pedestrians
    L = config.geometry.total_length
    dt = TIME_STEP
    rng = np.random.default_rng([config.seed, 0])

    v0 = np.maximum(rng.normal(config.v0_mean, config.v0_std, n), 0.05)
    start = _start_positions(config)
    stop = start + config.loops_per_pedestrian * L

    # cyclic predecessor chain in start order; index wrap lifts by one loop
    succ = np.roll(np.arange(n), -1)
    prev = np.roll(np.arange(n), 1)
    indices = np.arange(n)
    active = np.ones(n, dtype=bool)

    jam_free_speed = (L / n - config.d0) / config.tau  # > 0 by feasibility
    est_duration = config.loops_per_pedestrian * L / min(float(np.min(v0)), jam_free_speed)
    max_steps = int((50.0 * est_duration + 100.0) / dt)

    s = start.copy()
    snapshots = [s.copy()]
    departure_time = np.zeros(n)
    final_step = np.zeros(n, dtype=int)

    step_idx = 0
    while active.any():
        if step_idx >= max_steps:
            raise RuntimeError("walking model failed to finish within the step budget")
        pred_pos = s[succ] + L * (succ <= indices)
        gaps = pred_pos - s
        speeds = np.minimum(v0, np.maximum(0.0, (gaps - config.d0) / config.tau))
        speeds[~active] = 0.0
        s_new = np.minimum(s + speeds * dt, pred_pos)  # gaps never go below 0
        s_new[~active] = s[~active]

        arriving = active & (s_new >= stop)
        for j in np.nonzero(arriving)[0]:
            departure_time[j] = step_idx * dt + (stop[j] - s[j]) / speeds[j]
            final_step[j] = step_idx
            active[j] = False
            s_new[j] = stop[j]
            succ[prev[j]] = succ[j]
            prev[succ[j]] = prev[j]
        s = s_new
        step_idx += 1
        snapshots.append(s.copy())

    grid = np.arange(step_idx + 1) * dt
    matrix = np.array(snapshots)
    trajectories = []
    for j in range(n):
        k = final_step[j]
        times = np.append(grid[: k + 1], departure_time[j])
        path = np.append(matrix[: k + 1, j], stop[j])
        trajectories.append((times, path))

    truth = GroundTruth(
        config=config,
        tag_ids=tuple(pedestrian_tag(j) for j in range(n)),
        desired_speeds=v0,
        start_positions=start,
        departure_times=departure_time,
        trajectories=tuple(trajectories),
        grid_dt=dt,
    )
    return replace(truth, crossings=tuple(oracle_crossings(truth, config.section)))


def _invert_boundary(times: np.ndarray, path: np.ndarray, boundary: float) -> float:
    """Exact crossing time of a nondecreasing piecewise-linear trajectory."""
    idx = int(np.searchsorted(path, boundary, side="right"))
    lo = idx - 1
    return float(times[lo] + (times[idx] - times[lo])
                 * (boundary - path[lo]) / (path[idx] - path[lo]))


def oracle_crossings(truth: GroundTruth, section: MeasurementSection) -> list[Crossing]:
    """Exact crossing times and section-average speeds from ground truth.

    Boundary passage times are found by linear inversion within the
    integration step, which is exact because the walking speed is
    constant across each step.
    """
    L = truth.config.geometry.total_length
    out: list[Crossing] = []
    for tag_id, (times, path) in zip(truth.tag_ids, truth.trajectories):
        s_first, s_last = float(path[0]), float(path[-1])
        k = math.floor((s_first - section.entry_s) / L) + 1
        while section.entry_s + k * L > s_first and section.exit_s + k * L < s_last:
            t_entry = _invert_boundary(times, path, section.entry_s + k * L)
            t_exit = _invert_boundary(times, path, section.exit_s + k * L)
            out.append(Crossing(tag_id=tag_id, loop=k, t_entry=t_entry, t_exit=t_exit,
                                velocity=section.length / (t_exit - t_entry)))
            k += 1
    return out


def _sample_instants(rng: np.random.Generator, config: ScenarioConfig,
                     duration: float) -> np.ndarray:
    """Fix times for one tag: start, clipped-exponential arrivals, departure."""
    instants = [0.0]
    t = 0.0
    scale = 1.0 / config.mean_rate
    while True:
        t += float(np.clip(rng.exponential(scale), config.min_interval, config.max_interval))
        if t >= duration:
            break
        instants.append(t)
    instants.append(duration)
    return np.array(instants)


def sample_uwb_events(truth: GroundTruth, config: ScenarioConfig) -> list[LocationEvent]:
    """Turn ground truth into an asynchronous noisy location-event stream.

    Events are merged over all tags and sorted by time (ties broken by
    tag id); the result is byte-stable for a fixed configuration.
    """
    geometry = config.geometry
    events: list[LocationEvent] = []

    rng = np.random.default_rng([config.seed, 1])
    for tag_id, t_dep, (times, path) in zip(truth.tag_ids, truth.departure_times,
                                            truth.trajectories):
        instants = _sample_instants(rng, config, float(t_dep))
        positions = centerline_position(geometry, np.interp(instants, times, path))
        positions = positions + rng.normal(0.0, config.noise_sigma, positions.shape)
        events.extend(
            LocationEvent(tag_id=tag_id, t=float(t), x=float(p[0]), y=float(p[1]))
            for t, p in zip(instants, positions))

    if config.erratic_tags:
        rng = np.random.default_rng([config.seed, 2])
        xmin, xmax, ymin, ymax = track_bounds(geometry, pad=0.5 * geometry.corridor_width)
        horizon = float(np.max(truth.departure_times))
        for i in range(config.erratic_tags):
            instants = _sample_instants(rng, config, horizon)
            xs = rng.uniform(xmin, xmax, instants.size)
            ys = rng.uniform(ymin, ymax, instants.size)
            events.extend(
                LocationEvent(tag_id=erratic_tag(i), t=float(t), x=float(x), y=float(y))
                for t, x, y in zip(instants, xs, ys))

    events.sort(key=lambda ev: (ev.t, ev.tag_id))
    return events


GROUND_TRUTH_HEADER = "tag_id,t,s,x,y"
ORACLE_HEADER = "tag_id,loop,t_en,t_ex,v"


def write_ground_truth_csv(truth: GroundTruth, path) -> None:
    """Grid trajectories as ``tag_id,t,s,x,y`` rows (s unwrapped, meters)."""
    geometry = truth.config.geometry
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(GROUND_TRUTH_HEADER + "\n")
        for tag_id, (times, s) in zip(truth.tag_ids, truth.trajectories):
            xy = centerline_position(geometry, s)
            for t, si, p in zip(times, s, xy):
                fh.write(f"{tag_id},{float(t)!r},{float(si)!r},{float(p[0])!r},{float(p[1])!r}\n")


def write_oracle_crossings_csv(crossings: Sequence[Crossing], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ORACLE_HEADER + "\n")
        for c in sorted(crossings, key=lambda c: (c.tag_id, c.loop)):
            fh.write(f"{c.tag_id},{c.loop},{c.t_entry!r},{c.t_exit!r},{c.velocity!r}\n")
