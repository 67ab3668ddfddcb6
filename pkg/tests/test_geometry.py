import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pedflow.geometry import (
    GeometryError,
    centerline_position,
    make_section,
    make_stadium_track,
    project_points,
    project_to_track,
    track_bounds,
    unwrap_arc_samples,
    unwrap_coordinate,
)


def dense_centerline(geometry, n=200_000):
    """Brute-force polyline oracle: centerline sampled at ~0.1 mm."""
    s = np.linspace(0.0, geometry.total_length, n, endpoint=False)
    return centerline_position(geometry, s)


def brute_force_distance(geometry, points, polyline):
    dmin = np.full(len(points), np.inf)
    for i in range(0, len(points), 512):
        chunk = points[i:i + 512]
        dx = chunk[:, 0:1] - polyline[None, :, 0]
        dy = chunk[:, 1:2] - polyline[None, :, 1]
        dmin[i:i + 512] = np.sqrt((dx * dx + dy * dy).min(axis=1))
    return dmin


geometries = st.builds(
    make_stadium_track,
    straight_length=st.floats(0.5, 50.0),
    radius=st.floats(0.2, 10.0),
    corridor_width=st.floats(0.2, 3.0),
)


class TestMakeStadiumTrack:
    def test_perimeter_default_demo_track(self):
        geo = make_stadium_track(6.0, 1.5, 0.8)
        assert geo.total_length == pytest.approx(12.0 + 3.0 * math.pi, abs=1e-12)

    def test_perimeter_small_track(self):
        geo = make_stadium_track(2.0, 1.0, 0.8)
        assert geo.total_length == pytest.approx(4.0 + 2.0 * math.pi, abs=1e-12)

    @pytest.mark.parametrize("args", [(0.0, 1.5, 0.8), (6.0, -1.0, 0.8), (6.0, 1.5, 0.0)])
    def test_rejects_non_positive_dimensions(self, args):
        with pytest.raises(GeometryError):
            make_stadium_track(*args)

    @given(geometries)
    def test_perimeter_closed_form(self, geo):
        expected = 2 * geo.straight_length + 2 * math.pi * geo.radius
        assert geo.total_length == pytest.approx(expected, rel=1e-12)


class TestProjection:
    def setup_method(self):
        self.geo = make_stadium_track(6.0, 1.5, 0.8)

    def test_point_on_first_straight(self):
        assert project_to_track((1.0, 0.0), self.geo) == (1.0, 0.0)

    def test_lateral_offset_positive_left(self):
        s, d = project_to_track((1.0, 0.3), self.geo)
        assert s == pytest.approx(1.0, abs=1e-12)
        assert d == pytest.approx(0.3, abs=1e-12)

    def test_lateral_offset_negative_right(self):
        _, d = project_to_track((1.0, -0.3), self.geo)
        assert d == pytest.approx(-0.3, abs=1e-12)

    def test_first_semicircle_apex(self):
        # analytic arc-length oracle: quarter arc past the first straight
        expected = 6.0 + 0.5 * math.pi * 1.5
        s, d = project_to_track((6.0 + 1.5, 1.5), self.geo)
        assert s == pytest.approx(expected, abs=1e-9)
        assert d == pytest.approx(0.0, abs=1e-12)

    def test_semicircle_center_tie_break(self):
        assert project_to_track((6.0, 1.5), self.geo) == (6.0, 1.5)
        s, d = project_to_track((0.0, 1.5), self.geo)
        assert s == pytest.approx(12.0 + math.pi * 1.5, abs=1e-12)
        assert d == 1.5

    def test_second_straight_direction_and_sign(self):
        # walking -x on the second straight, left is -y (loop interior)
        s, d = project_to_track((5.0, 2.9), self.geo)
        assert s == pytest.approx(6.0 + math.pi * 1.5 + 1.0, abs=1e-12)
        assert d == pytest.approx(0.1, abs=1e-12)

    def test_rejects_non_finite_point(self):
        with pytest.raises(GeometryError):
            project_to_track((math.nan, 0.0), self.geo)

    @given(geometries, st.floats(0.0, 1.0, exclude_max=True))
    @settings(max_examples=200)
    def test_round_trip_centerline(self, geo, frac):
        s = frac * geo.total_length
        pt = centerline_position(geo, s)
        s2, d2 = project_points(geo, pt[0], pt[1])
        wrap = abs(s2 - s)
        assert min(wrap, geo.total_length - wrap) < 1e-9
        assert abs(d2) < 1e-9

    @given(st.floats(-10.0, 18.0), st.floats(-6.0, 10.0))
    @settings(max_examples=200)
    def test_projection_distance_matches_offset(self, x, y):
        geo = make_stadium_track(6.0, 1.5, 0.8)
        s, d = project_to_track((x, y), geo)
        pt = centerline_position(geo, s)
        assert math.hypot(x - pt[0], y - pt[1]) == pytest.approx(abs(d), abs=1e-9)

    def test_distance_against_polyline_oracle(self):
        geo = make_stadium_track(6.0, 1.5, 0.8)
        rng = np.random.default_rng(42)
        pts = np.column_stack([rng.uniform(-4, 12, 300), rng.uniform(-4, 8, 300)])
        _, d = project_points(geo, pts[:, 0], pts[:, 1])
        oracle = brute_force_distance(geo, pts, dense_centerline(geo))
        np.testing.assert_allclose(np.abs(d), oracle, atol=1e-6)

    def test_transformed_frame_round_trip(self):
        geo = make_stadium_track(6.0, 1.5, 0.8, origin=(3.0, -2.0), heading=0.7)
        s = np.linspace(0.0, geo.total_length, 500, endpoint=False)
        pts = centerline_position(geo, s)
        s2, d2 = project_points(geo, pts[:, 0], pts[:, 1])
        wrap = np.abs(s2 - s)
        np.testing.assert_array_less(np.minimum(wrap, geo.total_length - wrap), 1e-9)
        np.testing.assert_array_less(np.abs(d2), 1e-9)


class TestTrackBounds:
    def test_contains_all_centerline_points(self):
        geo = make_stadium_track(6.0, 1.5, 0.8, origin=(1.0, 2.0), heading=0.3)
        xmin, xmax, ymin, ymax = track_bounds(geo)
        pts = dense_centerline(geo, n=20_000)
        assert pts[:, 0].min() >= xmin - 1e-9 and pts[:, 0].max() <= xmax + 1e-9
        assert pts[:, 1].min() >= ymin - 1e-9 and pts[:, 1].max() <= ymax + 1e-9

    def test_axis_aligned_box_is_tight(self):
        geo = make_stadium_track(6.0, 1.5, 0.8)
        assert track_bounds(geo) == (-1.5, 7.5, 0.0, 3.0)
        assert track_bounds(geo, pad=0.4) == pytest.approx((-1.9, 7.9, -0.4, 3.4), abs=1e-12)


class TestUnwrap:
    L = 12.0 + 3.0 * math.pi  # 21.4248 for the demo track

    def test_forward_wrap(self):
        samples = unwrap_arc_samples([(0.0, 20.0), (1.0, 0.5)], self.L)
        assert samples[0].s_unwrapped == 20.0
        assert samples[1].s_unwrapped == pytest.approx(0.5 + self.L, abs=1e-12)

    def test_backward_jitter_takes_minimal_step(self):
        # minimal-|step| rule: 20.0 is reached by stepping back 1.9248, not
        # forward 19.5, so the unwrapped value drops below zero
        samples = unwrap_arc_samples([(0.0, 0.5), (1.0, 20.0)], self.L)
        assert samples[1].s_unwrapped == pytest.approx(20.0 - self.L, abs=1e-12)
        assert samples[1].s_unwrapped % self.L == pytest.approx(20.0, abs=1e-9)

    def test_constant_input_is_identity(self):
        samples = unwrap_arc_samples([(t, 5.0) for t in range(5)], self.L)
        assert [x.s_unwrapped for x in samples] == [5.0] * 5

    def test_rejects_non_positive_length(self):
        with pytest.raises(GeometryError):
            unwrap_arc_samples([(0.0, 1.0)], 0.0)

    @given(st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=1, max_size=50))
    def test_mod_identity_and_step_bound(self, fracs):
        s_raw = np.array(fracs) * self.L
        unwrapped = unwrap_coordinate(s_raw, self.L)
        residue = np.minimum(np.abs((unwrapped - s_raw) % self.L),
                             self.L - np.abs((unwrapped - s_raw) % self.L))
        np.testing.assert_array_less(residue, 1e-9)
        if len(fracs) > 1:
            steps = np.abs(np.diff(unwrapped))
            np.testing.assert_array_less(steps, self.L / 2 + 1e-12)

    @given(st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=2, max_size=30),
           st.floats(0.0, 1.0, exclude_max=True))
    def test_translation_equivariance(self, fracs, shift_frac):
        s_raw = np.array(fracs) * self.L
        c = shift_frac * self.L
        # the minimal-step rule has a tie at |step| = L/2; float rounding of
        # the shifted modulus can flip sides there, so keep clear of it
        for series in (s_raw, (s_raw + c) % self.L):
            steps = np.abs(np.diff(series)) % self.L
            assume(np.all(np.abs(steps - self.L / 2) > 1e-6))
        base = unwrap_coordinate(s_raw, self.L)
        shifted = unwrap_coordinate((s_raw + c) % self.L, self.L)
        offsets = shifted - base
        # constant offset, congruent to c modulo one loop
        np.testing.assert_allclose(offsets, offsets[0], atol=1e-9)
        residue = abs((offsets[0] - c) % self.L)
        assert min(residue, self.L - residue) < 1e-9

    def test_noiseless_forward_walk_recovers_cumulative_distance(self):
        s_true = np.linspace(0.0, 3.2 * self.L, 400)
        unwrapped = unwrap_coordinate(s_true % self.L, self.L)
        np.testing.assert_allclose(unwrapped, s_true, atol=1e-9)


class TestMakeSection:
    def setup_method(self):
        self.geo = make_stadium_track(6.0, 1.5, 0.8)

    def test_two_meter_window_on_first_straight(self):
        section = make_section(2.0, 4.0, self.geo)
        assert section.length == 2.0

    def test_window_on_second_straight(self):
        lo = 6.0 + math.pi * 1.5
        section = make_section(lo + 1.0, lo + 3.0, self.geo)
        assert section.length == pytest.approx(2.0, abs=1e-12)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(GeometryError):
            make_section(4.0, 2.0, self.geo)

    def test_rejects_window_spanning_a_curve(self):
        with pytest.raises(GeometryError):
            make_section(5.0, 7.5, self.geo)

    def test_rejects_window_on_a_curve(self):
        with pytest.raises(GeometryError):
            make_section(6.5, 7.0, self.geo)
