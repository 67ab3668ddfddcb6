"""Stadium loop track geometry and the 1D arc-length coordinate.

The track centerline is a stadium: two parallel straights of length
``straight_length`` joined by two semicircles of ``radius``.  Arc length
``s`` starts at the beginning of the first straight and increases in the
walking direction (counterclockwise in the local frame):

    s in [0, A)                first straight, from (0, 0) to (A, 0)
    s in [A, A + pi*r)         first semicircle, center (A, r)
    s in [A + pi*r, 2A + pi*r) second straight, from (A, 2r) to (0, 2r)
    s in [2A + pi*r, L)        second semicircle, center (0, r)

where A = straight_length, r = radius and L = 2A + 2*pi*r.  Lateral
offset ``d`` is signed positive to the left of the walking direction,
i.e. toward the loop interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class GeometryError(ValueError):
    """Invalid track or section construction."""


@dataclass(frozen=True)
class TrackGeometry:
    """Closed stadium-shaped loop centerline.

    ``origin`` and ``heading`` place the start of the first straight in
    world coordinates; points are transformed into this local frame
    before any arc-length computation.
    """

    straight_length: float  # meters, each of the two straights
    radius: float           # meters, each semicircular end
    corridor_width: float   # meters
    origin: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0    # radians, direction of the first straight

    @property
    def total_length(self) -> float:
        return 2.0 * self.straight_length + 2.0 * math.pi * self.radius

    @property
    def first_straight(self) -> tuple[float, float]:
        """Arc-length span [lo, hi] of the first straight."""
        return (0.0, self.straight_length)

    @property
    def second_straight(self) -> tuple[float, float]:
        """Arc-length span [lo, hi] of the second straight."""
        lo = self.straight_length + math.pi * self.radius
        return (lo, lo + self.straight_length)


def make_stadium_track(
    straight_length: float,
    radius: float,
    corridor_width: float,
    origin: tuple[float, float] = (0.0, 0.0),
    heading: float = 0.0,
) -> TrackGeometry:
    """Build a stadium track; total length is 2*straight + 2*pi*radius."""
    for name, value in (
        ("straight_length", straight_length),
        ("radius", radius),
        ("corridor_width", corridor_width),
    ):
        if not math.isfinite(value) or value <= 0.0:
            raise GeometryError(f"{name} must be positive, got {value!r}")
    return TrackGeometry(
        straight_length=float(straight_length),
        radius=float(radius),
        corridor_width=float(corridor_width),
        origin=(float(origin[0]), float(origin[1])),
        heading=float(heading),
    )


def _to_local(geometry: TrackGeometry, x: np.ndarray, y: np.ndarray):
    ox, oy = geometry.origin
    c, s = math.cos(geometry.heading), math.sin(geometry.heading)
    dx, dy = x - ox, y - oy
    return c * dx + s * dy, -s * dx + c * dy


def _to_world(geometry: TrackGeometry, x: np.ndarray, y: np.ndarray):
    ox, oy = geometry.origin
    c, s = math.cos(geometry.heading), math.sin(geometry.heading)
    return c * x - s * y + ox, s * x + c * y + oy


def centerline_position(geometry: TrackGeometry, s) -> np.ndarray:
    """World coordinates of the centerline point at arc length ``s``.

    ``s`` may be a scalar or an array and is reduced modulo the total
    length, so unwrapped (multi-loop) coordinates are accepted.
    Returns an array of shape (..., 2).
    """
    A = geometry.straight_length
    r = geometry.radius
    L = geometry.total_length
    s = np.asarray(s, dtype=float) % L

    x = np.empty_like(s)
    y = np.empty_like(s)

    m1 = s < A
    x[m1] = s[m1]
    y[m1] = 0.0

    m2 = (s >= A) & (s < A + math.pi * r)
    phi = (s[m2] - A) / r - 0.5 * math.pi
    x[m2] = A + r * np.cos(phi)
    y[m2] = r + r * np.sin(phi)

    m3 = (s >= A + math.pi * r) & (s < 2 * A + math.pi * r)
    x[m3] = A - (s[m3] - A - math.pi * r)
    y[m3] = 2.0 * r

    m4 = s >= 2 * A + math.pi * r
    phi = (s[m4] - 2 * A - math.pi * r) / r + 0.5 * math.pi
    x[m4] = r * np.cos(phi)
    y[m4] = r + r * np.sin(phi)

    wx, wy = _to_world(geometry, x, y)
    return np.stack([wx, wy], axis=-1)


def project_points(geometry: TrackGeometry, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Project 2D points onto the centerline.

    Returns ``(s_raw, d)`` arrays: the arc length of the nearest
    centerline point, in [0, L), and the signed lateral offset
    (positive left of the walking direction).  On the straights this is
    an orthogonal projection; on the semicircles a radial one.  A point
    exactly at a semicircle center projects to the start of that
    semicircle with d = radius.
    """
    A = geometry.straight_length
    r = geometry.radius
    L = geometry.total_length

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    lx, ly = _to_local(geometry, x, y)

    cand_s = np.empty((4, lx.size))
    cand_d = np.empty((4, lx.size))
    cand_dist = np.full((4, lx.size), np.inf)

    # first straight: y = 0, x in [0, A], walking +x, left is +y
    sx = np.clip(lx, 0.0, A)
    dist = np.hypot(lx - sx, ly)
    cand_s[0] = sx
    cand_d[0] = np.where(sx == lx, ly, np.sign(ly) * dist)
    cand_dist[0] = dist

    # first semicircle: center (A, r); valid half-plane x >= A.  A point
    # exactly at the center is equidistant to the whole arc (and to both
    # straights); the documented tie-break maps it to the arc start, so
    # that candidate is forced to win.
    vx, vy = lx - A, ly - r
    rho = np.hypot(vx, vy)
    phi = np.arctan2(vy, vx)
    valid = lx >= A
    at_center = valid & (rho == 0.0)
    cand_s[1] = np.where(at_center, A, A + (phi + 0.5 * math.pi) * r)
    cand_d[1] = np.where(at_center, r, r - rho)
    cand_dist[1] = np.where(at_center, -1.0, np.where(valid, np.abs(r - rho), np.inf))

    # second straight: y = 2r, x in [0, A], walking -x, left is -y
    sx = np.clip(lx, 0.0, A)
    dist = np.hypot(lx - sx, ly - 2.0 * r)
    cand_s[2] = A + math.pi * r + (A - sx)
    cand_d[2] = np.where(sx == lx, 2.0 * r - ly, np.sign(2.0 * r - ly) * dist)
    cand_dist[2] = dist

    # second semicircle: center (0, r); valid half-plane x <= 0; same
    # forced tie-break at the exact center
    vx, vy = lx, ly - r
    rho = np.hypot(vx, vy)
    phi = np.arctan2(vy, vx)
    theta = np.where(phi >= 0.0, phi, phi + 2.0 * math.pi)  # [pi/2, 3pi/2] on arc
    valid = lx <= 0.0
    at_center = valid & (rho == 0.0)
    cand_s[3] = np.where(at_center, 2 * A + math.pi * r,
                         2 * A + math.pi * r + (theta - 0.5 * math.pi) * r)
    cand_d[3] = np.where(at_center, r, r - rho)
    cand_dist[3] = np.where(at_center, -1.0, np.where(valid, np.abs(r - rho), np.inf))

    best = np.argmin(cand_dist, axis=0)
    idx = np.arange(lx.size)
    s_raw = cand_s[best, idx]
    d = cand_d[best, idx]
    s_raw = np.where(s_raw >= L, s_raw - L, s_raw)

    if scalar:
        return float(s_raw[0]), float(d[0])
    return s_raw, d


def project_to_track(point: tuple[float, float], geometry: TrackGeometry) -> tuple[float, float]:
    """Scalar convenience wrapper around :func:`project_points`."""
    px, py = point
    if not (math.isfinite(px) and math.isfinite(py)):
        raise GeometryError(f"point must be finite, got {point!r}")
    return project_points(geometry, px, py)


def track_bounds(geometry: TrackGeometry, pad: float = 0.0) -> tuple[float, float, float, float]:
    """World-frame bounding box (xmin, xmax, ymin, ymax) of the centerline.

    The stadium is the convex hull of its two end circles, so the box is
    exact for any heading.  ``pad`` grows it uniformly (pass half the
    corridor width for the physical track footprint).
    """
    A, r = geometry.straight_length, geometry.radius
    c1 = _to_world(geometry, np.asarray(A), np.asarray(r))
    c2 = _to_world(geometry, np.asarray(0.0), np.asarray(r))
    R = r + pad
    xmin = min(float(c1[0]), float(c2[0])) - R
    xmax = max(float(c1[0]), float(c2[0])) + R
    ymin = min(float(c1[1]), float(c2[1])) - R
    ymax = max(float(c1[1]), float(c2[1])) + R
    return xmin, xmax, ymin, ymax


@dataclass(frozen=True)
class ArcSample:
    """One time-stamped position in arc-length coordinates."""

    t: float
    s_raw: float          # meters, in [0, L)
    s_unwrapped: float    # meters, cumulative across loops
    lateral_offset: float = 0.0


def unwrap_coordinate(s_raw: np.ndarray, total_length: float) -> np.ndarray:
    """Unwrap a modular arc-length series into a cumulative coordinate.

    The first value is kept as-is; each increment is shifted by the
    integer multiple of L that brings it into [-L/2, L/2).
    """
    s_raw = np.asarray(s_raw, dtype=float)
    if s_raw.size == 0:
        return s_raw.copy()
    L = float(total_length)
    steps = np.diff(s_raw)
    steps = steps - np.floor(steps / L + 0.5) * L
    out = np.empty_like(s_raw)
    out[0] = s_raw[0]
    out[1:] = s_raw[0] + np.cumsum(steps)
    return out


def unwrap_arc_samples(samples: Iterable[Sequence[float]], total_length: float) -> list[ArcSample]:
    """Build :class:`ArcSample` records from time-ordered (t, s_raw[, d]) tuples."""
    if total_length <= 0.0:
        raise GeometryError(f"total_length must be positive, got {total_length!r}")
    rows = list(samples)
    s_raw = np.array([row[1] for row in rows], dtype=float)
    s_unwrapped = unwrap_coordinate(s_raw, total_length)
    out = []
    for row, sr, su in zip(rows, s_raw, s_unwrapped):
        d = float(row[2]) if len(row) > 2 else 0.0
        out.append(ArcSample(t=float(row[0]), s_raw=float(sr), s_unwrapped=float(su),
                             lateral_offset=d))
    return out


@dataclass(frozen=True)
class MeasurementSection:
    """Analysis window [entry_s, exit_s] on one straight, in arc length."""

    entry_s: float
    exit_s: float

    @property
    def length(self) -> float:
        return self.exit_s - self.entry_s


def make_section(entry_s: float, exit_s: float, geometry: TrackGeometry) -> MeasurementSection:
    """Validate and build the measurement section.

    Both boundaries must lie within a single straight segment; the
    curves are excluded from analysis.
    """
    if not (math.isfinite(entry_s) and math.isfinite(exit_s)):
        raise GeometryError("section boundaries must be finite")
    if not 0.0 <= entry_s < exit_s:
        raise GeometryError(
            f"section requires 0 <= entry < exit, got entry={entry_s!r} exit={exit_s!r}")
    for lo, hi in (geometry.first_straight, geometry.second_straight):
        if lo <= entry_s and exit_s <= hi:
            return MeasurementSection(entry_s=float(entry_s), exit_s=float(exit_s))
    raise GeometryError(
        f"section [{entry_s!r}, {exit_s!r}] must lie entirely within one straight "
        f"(straights: {geometry.first_straight}, {geometry.second_straight})")
