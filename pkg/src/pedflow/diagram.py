"""Fundamental-diagram assembly, free-velocity statistics and CSV export.

Each crossing contributes one (density, velocity) point.  Free velocity
is the pooled mean and sample standard deviation of crossing velocities
from single-pedestrian runs.  Exports are deterministic: identical
inputs produce byte-identical files (floats are written with full
round-trip precision and a ``.`` decimal separator).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .crossings import Crossing
from .density import CrossingMetric, OccupancyProfile
from .ingest import QualityReport

#: commonly cited unconstrained walking speed, m/s (reported for context
#: in summary exports, never computed)
LITERATURE_FREE_VELOCITY = 1.34


@dataclass(frozen=True)
class FdPoint:
    density: float   # persons per meter
    velocity: float  # m/s
    tag_id: str
    loop: int
    run: str


@dataclass(frozen=True)
class RunMeta:
    run_id: str
    participants: int | None = None


@dataclass(frozen=True)
class FundamentalDiagram:
    points: tuple[FdPoint, ...]
    runs: tuple[RunMeta, ...] = ()


def assemble_fd(metrics: Sequence[CrossingMetric], run_id: str = "run",
                participants: int | None = None) -> FundamentalDiagram:
    """One diagram point per crossing, ordered by (tag, loop)."""
    ordered = sorted(metrics, key=lambda m: (m.crossing.tag_id, m.crossing.loop))
    points = tuple(
        FdPoint(density=m.density, velocity=m.crossing.velocity,
                tag_id=m.crossing.tag_id, loop=m.crossing.loop, run=run_id)
        for m in ordered)
    return FundamentalDiagram(points=points, runs=(RunMeta(run_id, participants),))


def merge_diagrams(diagrams: Iterable[FundamentalDiagram]) -> FundamentalDiagram:
    """Pool several runs into one point set, ordered by (run, tag, loop)."""
    points: list[FdPoint] = []
    runs: list[RunMeta] = []
    for diagram in diagrams:
        points.extend(diagram.points)
        runs.extend(diagram.runs)
    points.sort(key=lambda p: (p.run, p.tag_id, p.loop))
    return FundamentalDiagram(points=tuple(points), runs=tuple(runs))


@dataclass(frozen=True)
class FreeVelocityStats:
    mean: float        # m/s
    sample_std: float  # m/s, n-1 denominator; 0 when n == 1
    count: int


def estimate_free_velocity(crossings: Sequence[Crossing]) -> FreeVelocityStats:
    """Pooled mean and sample std of single-pedestrian crossing velocities."""
    if not crossings:
        raise ValueError("free velocity is undefined without crossings")
    v = np.array([c.velocity for c in crossings], dtype=float)
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return FreeVelocityStats(mean=float(np.mean(v)), sample_std=std, count=int(v.size))


@dataclass(frozen=True)
class FdBin:
    center: float    # persons per meter
    v_mean: float
    v_std: float     # sample std, 0 for singleton bins
    count: int


def bin_fd(diagram: FundamentalDiagram, bin_width: float = 0.1) -> list[FdBin]:
    """Group points into density bins [k*w, (k+1)*w); empty bins are omitted."""
    if bin_width <= 0.0:
        raise ValueError(f"bin_width must be positive, got {bin_width!r}")
    groups: dict[int, list[float]] = {}
    for p in diagram.points:
        groups.setdefault(math.floor(p.density / bin_width), []).append(p.velocity)
    bins = []
    for k in sorted(groups):
        v = np.array(groups[k], dtype=float)
        std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        bins.append(FdBin(center=(k + 0.5) * bin_width, v_mean=float(np.mean(v)),
                          v_std=std, count=int(v.size)))
    return bins


CROSSINGS_HEADER = "tag_id,loop,t_en,t_ex,v,rho,flags"
FD_HEADER = "rho,v,tag_id,loop,run"
FD_BINNED_HEADER = "rho_bin_center,v_mean,v_std,count"
OCCUPANCY_HEADER = "t,N,rho"


def _write_lines(path, lines: Iterable[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def export_results(diagram: FundamentalDiagram,
                   free_velocity: FreeVelocityStats | None,
                   metrics: Sequence[CrossingMetric],
                   occupancy: OccupancyProfile,
                   out_dir,
                   *,
                   section_length: float,
                   bin_width: float = 0.1,
                   quality_reports: Sequence[QualityReport] = ()) -> dict[str, str]:
    """Write crossings, diagram, binned diagram, occupancy and summary files.

    Returns the written paths keyed by artifact name.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name + ".csv")
             for name in ("crossings", "fd", "fd_binned", "occupancy")}
    paths["summary"] = os.path.join(out_dir, "summary.txt")

    rows = [CROSSINGS_HEADER]
    for m in sorted(metrics, key=lambda m: (m.crossing.tag_id, m.crossing.loop)):
        c = m.crossing
        rows.append(f"{c.tag_id},{c.loop},{c.t_entry!r},{c.t_exit!r},"
                    f"{c.velocity!r},{m.density!r},{'|'.join(c.flags)}")
    _write_lines(paths["crossings"], rows)

    rows = [FD_HEADER]
    for p in diagram.points:
        rows.append(f"{p.density!r},{p.velocity!r},{p.tag_id},{p.loop},{p.run}")
    _write_lines(paths["fd"], rows)

    rows = [FD_BINNED_HEADER]
    for b in bin_fd(diagram, bin_width):
        rows.append(f"{b.center!r},{b.v_mean!r},{b.v_std!r},{b.count}")
    _write_lines(paths["fd_binned"], rows)

    rows = [OCCUPANCY_HEADER]
    for t, n in zip(occupancy.times, occupancy.counts):
        rows.append(f"{float(t)!r},{int(n)},{(int(n) / section_length)!r}")
    _write_lines(paths["occupancy"], rows)

    lines = [f"crossings: {len(metrics)}", f"diagram points: {len(diagram.points)}"]
    for meta in diagram.runs:
        count = sum(1 for p in diagram.points if p.run == meta.run_id)
        participants = meta.participants if meta.participants is not None else "unknown"
        lines.append(f"run {meta.run_id}: participants={participants} crossings={count}")
    if free_velocity is not None:
        lines.append(f"free velocity mean [m/s]: {free_velocity.mean!r}")
        lines.append(f"free velocity sample std [m/s]: {free_velocity.sample_std!r}")
        lines.append(f"free velocity crossings used: {free_velocity.count}")
    else:
        lines.append("free velocity: not estimated (no single-pedestrian crossings)")
    lines.append(f"literature free velocity reference [m/s]: {LITERATURE_FREE_VELOCITY!r}")
    rejected = [r for r in quality_reports if not r.accepted]
    lines.append("rejected tags: " +
                 (", ".join(f"{r.tag_id}({'+'.join(r.reasons)})" for r in rejected)
                  if rejected else "none"))
    accepted = [r for r in quality_reports if r.accepted]
    if accepted:
        mean_rate = sum(r.mean_update_rate for r in accepted) / len(accepted)
        lines.append(f"mean update rate over accepted tags [Hz]: {mean_rate!r}")
    _write_lines(paths["summary"], lines)
    return paths
