import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pedflow.crossings import Crossing, CrossingError
from pedflow.density import (
    attach_densities,
    build_occupancy,
    instantaneous_density,
    mean_crossing_density,
    mean_occupancy,
)


def crossing(t_entry, t_exit, tag="T", loop=0):
    return Crossing(tag_id=tag, loop=loop, t_entry=t_entry, t_exit=t_exit,
                    velocity=2.0 / (t_exit - t_entry))


def riemann_mean_density(profile, t0, t1, section_length, dt=1e-4):
    """Independent oracle: Riemann sum over dt-cells, sampled at midpoints.

    Exact for step functions whose breakpoints lie on the dt grid, since
    no cell then straddles a breakpoint.
    """
    cells = int(round((t1 - t0) / dt))
    mids = t0 + (np.arange(cells) + 0.5) * dt
    return float(np.mean(profile.occupancy_at(mids))) / section_length


# grid-aligned times keep the Riemann oracle exact for step functions
grid_times = st.integers(0, 200_000).map(lambda k: k * 1e-4)


def interval_list(draw_count=st.integers(1, 15)):
    return st.lists(
        st.tuples(grid_times, st.integers(1, 30_000)).map(
            lambda p: (p[0], p[0] + p[1] * 1e-4)),
        min_size=1, max_size=15)


class TestBuildOccupancy:
    def test_single_interval(self):
        profile = build_occupancy([crossing(1.0, 3.0)])
        assert profile.occupancy_at(0.5) == 0
        assert profile.occupancy_at(1.0) == 1
        assert profile.occupancy_at(2.9) == 1
        assert profile.occupancy_at(3.0) == 0
        assert profile.span == (1.0, 3.0)

    def test_overlap_sweep(self):
        profile = build_occupancy([crossing(0.0, 2.0), crossing(1.0, 3.0, tag="U")])
        assert [profile.occupancy_at(t) for t in (0.5, 1.5, 2.5, 3.5)] == [1, 2, 1, 0]
        np.testing.assert_array_equal(profile.times, [0.0, 1.0, 2.0, 3.0])
        np.testing.assert_array_equal(profile.counts, [1, 2, 1, 0])

    def test_empty_input(self):
        profile = build_occupancy([])
        assert profile.span is None
        assert profile.occupancy_at(1.0) == 0

    def test_exit_processed_before_entrance_on_tie(self):
        profile = build_occupancy([crossing(0.0, 1.0), crossing(1.0, 2.0, tag="U")])
        # the handoff at t=1 never shows N=2
        assert int(profile.counts.max()) == 1

    def test_rejects_non_positive_duration(self):
        with pytest.raises(CrossingError):
            build_occupancy([Crossing("T", 0, 1.0, 1.0, 1.0)])

    @given(interval_list())
    @settings(max_examples=150)
    def test_matches_interval_stabbing_oracle(self, intervals):
        crossings = [crossing(a, b, tag=f"T{i}") for i, (a, b) in enumerate(intervals)]
        profile = build_occupancy(crossings)
        for t in profile.times:
            stabbed = sum(1 for a, b in intervals if a <= t < b)
            assert profile.occupancy_at(float(t)) == stabbed

    @given(interval_list())
    @settings(max_examples=100)
    def test_balance_and_unit_steps(self, intervals):
        crossings = [crossing(a, b, tag=f"T{i}") for i, (a, b) in enumerate(intervals)]
        profile = build_occupancy(crossings)
        assert np.all(profile.counts >= 0)
        assert profile.counts[-1] == 0  # everyone leaves by run end
        changes = np.diff(np.concatenate([[0], profile.counts]))
        assert np.all(changes != 0)  # every breakpoint changes the level


class TestInstantaneousDensity:
    def setup_method(self):
        self.profile = build_occupancy([crossing(0.0, 2.0), crossing(1.0, 3.0, tag="U"),
                                        crossing(1.5, 2.5, tag="V")])

    def test_direct_formula(self):
        assert instantaneous_density(self.profile, 1.7, 2.0) == 1.5
        profile = build_occupancy([crossing(0.0, 1.0)])
        assert instantaneous_density(profile, 0.5, 2.0) == 0.5

    def test_outside_span_is_zero(self):
        assert instantaneous_density(self.profile, -1.0, 2.0) == 0.0
        assert instantaneous_density(self.profile, 99.0, 2.0) == 0.0

    def test_right_continuous_at_breakpoints(self):
        assert instantaneous_density(self.profile, 1.0, 2.0) == 1.0
        assert instantaneous_density(self.profile, 3.0, 2.0) == 0.0

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            instantaneous_density(self.profile, 1.0, 0.0)


class TestMeanCrossingDensity:
    def test_single_pedestrian_include_self_floor_exact(self):
        own = crossing(1.25, 2.75)
        profile = build_occupancy([own])
        assert mean_crossing_density(profile, own, 2.0) == 0.5

    def test_worked_two_level_example(self):
        # N = 1 on [0,1), 2 on [1,2); window [0.5, 1.5] averages to 1.5
        # persons, i.e. 0.75 1/m over a 2 m section
        c1 = crossing(0.0, 2.0)
        c2 = crossing(1.0, 2.0, tag="U")
        profile = build_occupancy([c1, c2])
        window = crossing(0.5, 1.5, tag="W")
        value = mean_crossing_density(profile, window, 2.0)
        assert value == pytest.approx(0.75, abs=1e-12)
        oracle = riemann_mean_density(profile, 0.5, 1.5, 2.0)
        assert value == pytest.approx(oracle, rel=1e-9)

    def test_rejects_inverted_window(self):
        profile = build_occupancy([crossing(0.0, 2.0)])
        with pytest.raises(CrossingError):
            mean_crossing_density(profile, Crossing("T", 0, 2.0, 2.0, 1.0), 2.0)

    @given(interval_list(), st.integers(0, 14))
    @settings(max_examples=150, deadline=None)
    def test_exact_integration_matches_riemann_oracle(self, intervals, pick):
        crossings = [crossing(a, b, tag=f"T{i}") for i, (a, b) in enumerate(intervals)]
        profile = build_occupancy(crossings)
        target = crossings[pick % len(crossings)]
        value = mean_crossing_density(profile, target, 2.0)
        oracle = riemann_mean_density(profile, target.t_entry, target.t_exit, 2.0)
        assert value == pytest.approx(oracle, rel=1e-6)

    @given(interval_list(), st.integers(0, 14), st.floats(0.1, 0.9))
    @settings(max_examples=100, deadline=None)
    def test_window_split_linearity(self, intervals, pick, frac):
        crossings = [crossing(a, b, tag=f"T{i}") for i, (a, b) in enumerate(intervals)]
        profile = build_occupancy(crossings)
        target = crossings[pick % len(crossings)]
        t0, t1 = target.t_entry, target.t_exit
        u = t0 + frac * (t1 - t0)
        if u <= t0 or u >= t1:
            return
        whole = mean_occupancy(profile, t0, t1) * (t1 - t0)
        parts = (mean_occupancy(profile, t0, u) * (u - t0)
                 + mean_occupancy(profile, u, t1) * (t1 - u))
        assert whole == pytest.approx(parts, rel=1e-9, abs=1e-12)

    @given(interval_list())
    @settings(max_examples=100)
    def test_include_self_floor(self, intervals):
        crossings = [crossing(a, b, tag=f"T{i}") for i, (a, b) in enumerate(intervals)]
        profile = build_occupancy(crossings)
        for metric in attach_densities(profile, crossings, 2.0):
            assert metric.density >= 0.5 - 1e-12  # one self per 2 m section


class TestAttachDensities:
    def test_exclude_self_subtracts_exactly_one_per_length(self):
        crossings = [crossing(0.0, 2.0), crossing(1.0, 3.0, tag="U")]
        profile = build_occupancy(crossings)
        include = attach_densities(profile, crossings, 2.0)
        exclude = attach_densities(profile, crossings, 2.0, exclude_self=True)
        for a, b in zip(include, exclude):
            assert a.density - b.density == pytest.approx(0.5, abs=1e-12)
