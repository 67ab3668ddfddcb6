"""Pedestrian trajectory extraction and single-file flow metrics from
asynchronous tag location events, plus a ground-truth scenario simulator."""

from .config import ConfigError, DEFAULTS, RunConfig, load_run_config, run_config_from_mapping
from .crossings import (BoundaryBracket, Crossing, CrossingError, LoopPassage, SkippedLoop,
                        crossing_velocity, detect_crossings, extract_crossings,
                        interpolate_boundary_time)
from .density import (CrossingMetric, OccupancyProfile, attach_densities, build_occupancy,
                      instantaneous_density, mean_crossing_density, mean_occupancy)
from .diagram import (FdBin, FdPoint, FreeVelocityStats, FundamentalDiagram, RunMeta,
                      assemble_fd, bin_fd, estimate_free_velocity, export_results,
                      merge_diagrams)
from .geometry import (ArcSample, GeometryError, MeasurementSection, TrackGeometry,
                       centerline_position, make_section, make_stadium_track,
                       project_points, project_to_track, track_bounds,
                       unwrap_arc_samples, unwrap_coordinate)
from .ingest import (EventFormatError, LocationEvent, QcParams, QualityReport, TagTrack,
                     TrackBuildResult, assess_track_quality, build_tracks, parse_events,
                     write_events_csv)
from .pipeline import AnalysisResult, analyze_events
from .simulate import (GroundTruth, ScenarioConfig, ScenarioError, headway_speed,
                       oracle_crossings, sample_uwb_events, simulate_run)

__version__ = "0.1.0"
