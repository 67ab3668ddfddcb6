"""End-to-end analysis: events in, crossings/densities/diagram out."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .crossings import Crossing, SkippedLoop, extract_crossings
from .density import CrossingMetric, OccupancyProfile, attach_densities, build_occupancy
from .diagram import FreeVelocityStats, FundamentalDiagram, assemble_fd, estimate_free_velocity
from .geometry import MeasurementSection, TrackGeometry, project_points, unwrap_arc_samples
from .ingest import LocationEvent, QcParams, QualityReport, TrackBuildResult, assess_track_quality, build_tracks


@dataclass(frozen=True)
class AnalysisResult:
    build: TrackBuildResult
    quality: dict[str, QualityReport]
    accepted_tags: tuple[str, ...]
    rejected_tags: tuple[str, ...]
    crossings: list[Crossing]                      # all, degraded ones flagged
    skipped_loops: list[tuple[str, SkippedLoop]]   # (tag_id, skip)
    profile: OccupancyProfile
    metrics: list[CrossingMetric]                  # all crossings
    diagram: FundamentalDiagram                    # filtered per include_degraded
    free_velocity: FreeVelocityStats | None
    participants: int
    run_id: str = "run"
    include_degraded: bool = False
    excluded_degraded: int = 0

    def diagnostics(self) -> dict:
        """JSON-serializable account of everything filtered or skipped."""
        return {
            "participants": self.participants,
            "accepted_tags": list(self.accepted_tags),
            "rejected_tags": {
                tag: list(self.quality[tag].reasons) for tag in self.rejected_tags},
            "skipped_tags": dict(self.build.skipped),
            "skipped_crossings": [
                {"tag_id": tag, "loop": skip.loop, "reason": skip.reason}
                for tag, skip in self.skipped_loops],
            "degraded_crossings": [
                {"tag_id": c.tag_id, "loop": c.loop, "flags": list(c.flags)}
                for c in self.crossings if c.flags],
            "excluded_degraded": self.excluded_degraded,
            "dropped_exact_duplicates": {
                tag: r.dropped_exact_duplicates for tag, r in self.quality.items()
                if r.dropped_exact_duplicates},
            "dropped_time_collisions": {
                tag: r.dropped_time_collisions for tag, r in self.quality.items()
                if r.dropped_time_collisions},
            "mean_update_rate_hz": {
                tag: r.mean_update_rate for tag, r in sorted(self.quality.items())},
        }


def analyze_events(events: Sequence[LocationEvent],
                   geometry: TrackGeometry,
                   section: MeasurementSection,
                   qc: QcParams = QcParams(),
                   *,
                   run_id: str = "run",
                   include_degraded: bool = False,
                   exclude_self: bool = False) -> AnalysisResult:
    """Run the full crossing and density analysis on one event stream.

    Tracks are built per tag, quality-filtered, projected to arc length,
    unwrapped across loops and scanned for section crossings; the pooled
    crossings define the occupancy profile, per-crossing densities and
    the fundamental diagram.  Degraded crossings are always computed and
    flagged but enter the diagram only with ``include_degraded``.
    """
    build = build_tracks(events)
    quality: dict[str, QualityReport] = {}
    accepted: list[str] = []
    rejected: list[str] = []
    for tag_id in sorted(build.tracks):
        report = assess_track_quality(build.tracks[tag_id], geometry, qc)
        quality[tag_id] = report
        (accepted if report.accepted else rejected).append(tag_id)

    total_length = geometry.total_length
    crossings: list[Crossing] = []
    skipped_loops: list[tuple[str, SkippedLoop]] = []
    for tag_id in accepted:
        track = build.tracks[tag_id]
        s_raw, d = project_points(geometry, track.xs, track.ys)
        samples = unwrap_arc_samples(zip(track.times, s_raw, d), total_length)
        result = extract_crossings(tag_id, samples, section, total_length)
        crossings.extend(result.crossings)
        skipped_loops.extend((tag_id, skip) for skip in result.skipped)
    crossings.sort(key=lambda c: (c.tag_id, c.loop))

    profile = build_occupancy(crossings)
    metrics = attach_densities(profile, crossings, section.length, exclude_self=exclude_self)
    kept = [m for m in metrics if include_degraded or not m.crossing.flags]
    participants = len(accepted)
    diagram = assemble_fd(kept, run_id=run_id, participants=participants)

    free_velocity = None
    if participants == 1 and kept:
        free_velocity = estimate_free_velocity([m.crossing for m in kept])

    return AnalysisResult(
        build=build,
        quality=quality,
        accepted_tags=tuple(accepted),
        rejected_tags=tuple(rejected),
        crossings=crossings,
        skipped_loops=skipped_loops,
        profile=profile,
        metrics=metrics,
        diagram=diagram,
        free_velocity=free_velocity,
        participants=participants,
        run_id=run_id,
        include_degraded=include_degraded,
        excluded_degraded=len(metrics) - len(kept),
    )
