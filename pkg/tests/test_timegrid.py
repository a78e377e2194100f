import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from examsched.timegrid import (
    DaySpec,
    ExamPeriodConfig,
    GridConfigError,
    build_grid,
    parse_clock,
    pattern_sets,
)

from oracles import span_filter_windows


def make_config(n_days, n_daytime, nights):
    times = [(480, 660), (690, 870), (900, 1080)][:n_daytime]
    return ExamPeriodConfig(
        days=tuple(DaySpec(f"D{i}", nights[i]) for i in range(n_days)),
        daytime_slot_times=tuple(times),
        night_slot_time=(1140, 1320),
    )


class TestBuildGrid:
    def test_default_config_has_22_slots(self, default_grid):
        assert len(default_grid.slots) == 22

    def test_default_day_structure(self, default_grid):
        per_day = [len(default_grid.slots_of_day(d)) for d in range(6)]
        assert per_day == [4, 4, 4, 4, 3, 3]
        nights = [s for s in default_grid.slots if s.is_night]
        assert [default_grid.day_label(s.day_index) for s in nights] == ["Mon", "Tue", "Wed", "Thu"]

    def test_ids_dense_chronological(self, default_grid):
        starts = [s.start for s in default_grid.slots]
        assert [s.id for s in default_grid.slots] == list(range(22))
        assert starts == sorted(starts)
        assert all(s.end - s.start == 180 for s in default_grid.slots)

    def test_single_slot_grid(self):
        grid = build_grid(make_config(1, 1, [False]))
        assert len(grid.slots) == 1
        ps = pattern_sets(grid)
        assert ps.b2b_pairs == () and ps.pm_to_am_pairs == ()
        assert ps.windows_3in24 == () and ps.windows_4in48 == ()

    def test_seven_day_variant_has_26_slots(self):
        # night-placement rule: nights everywhere except Fri and the last day
        config = ExamPeriodConfig.standard(6).with_day_count(7)
        grid = build_grid(config)
        expected = sum(3 + (1 if d.label != "Fri" and i != 6 else 0) for i, d in enumerate(config.days))
        assert expected == 26
        assert len(grid.slots) == 26

    def test_overlapping_daytime_slots_rejected(self):
        with pytest.raises(GridConfigError):
            ExamPeriodConfig(
                days=(DaySpec("Mon", False),),
                daytime_slot_times=((480, 660), (600, 780)),
                night_slot_time=(1140, 1320),
            )

    def test_unordered_daytime_slots_rejected(self):
        with pytest.raises(GridConfigError):
            ExamPeriodConfig(
                days=(DaySpec("Mon", False),),
                daytime_slot_times=((690, 870), (480, 660)),
                night_slot_time=(1140, 1320),
            )

    def test_wrong_duration_rejected(self):
        with pytest.raises(GridConfigError):
            ExamPeriodConfig(
                days=(DaySpec("Mon", False),),
                daytime_slot_times=((480, 600),),
                night_slot_time=(1140, 1320),
            )

    def test_night_before_daytime_end_rejected(self):
        with pytest.raises(GridConfigError):
            ExamPeriodConfig(
                days=(DaySpec("Mon", True),),
                daytime_slot_times=((480, 660), (690, 870), (900, 1080)),
                night_slot_time=(1020, 1200),
            )

    def test_config_roundtrip(self):
        config = ExamPeriodConfig.standard(6)
        assert ExamPeriodConfig.from_doc(config.to_doc()) == config

    def test_parse_clock(self):
        assert parse_clock("08:00") == 480
        with pytest.raises(GridConfigError):
            parse_clock("25:00")


class TestPatternSets:
    def test_default_pair_counts(self, default_patterns):
        # oracle: count adjacent same-day pairs directly from day shapes;
        # 4 night days of 4 slots and 2 plain days of 3 slots
        assert len(default_patterns.b2b_pairs) == 4 * 3 + 2 * 2 == 16
        assert len(default_patterns.pm_to_am_pairs) == 4

    def test_b2b_pairs_same_day_adjacent(self, default_grid, default_patterns):
        for t0, t1 in default_patterns.b2b_pairs:
            a, b = default_grid.slots[t0], default_grid.slots[t1]
            assert a.day_index == b.day_index
            assert b.seq_in_day == a.seq_in_day + 1

    def test_pm_to_am_pairs_cross_day(self, default_grid, default_patterns):
        for t0, t1 in default_patterns.pm_to_am_pairs:
            a, b = default_grid.slots[t0], default_grid.slots[t1]
            assert a.is_night
            assert b.day_index == a.day_index + 1
            assert b.seq_in_day == 0

    def test_known_20h_window_is_included(self, default_grid, default_patterns):
        # Mon 15:00-18:00, Mon 19:00-22:00, Tue 08:00-11:00: span 20h
        mon = default_grid.slots_of_day(0)
        tue = default_grid.slots_of_day(1)
        window = (mon[2].id, mon[3].id, tue[0].id)
        span = default_grid.slots[window[2]].end - default_grid.slots[window[0]].start
        assert span == 20 * 60
        assert window in set(default_patterns.windows_3in24)

    def test_windows_match_bruteforce_filter_default(self, default_grid, default_patterns):
        assert sorted(default_patterns.windows_3in24) == span_filter_windows(default_grid, 3, 24)
        assert sorted(default_patterns.windows_4in48) == span_filter_windows(default_grid, 4, 48)

    @settings(max_examples=25, deadline=None)
    @given(
        n_days=st.integers(1, 3),
        n_daytime=st.integers(1, 3),
        nights=st.lists(st.booleans(), min_size=3, max_size=3),
    )
    def test_windows_match_bruteforce_filter_random(self, n_days, n_daytime, nights):
        grid = build_grid(make_config(n_days, n_daytime, nights))
        ps = pattern_sets(grid)
        assert sorted(ps.windows_3in24) == span_filter_windows(grid, 3, 24)
        assert sorted(ps.windows_4in48) == span_filter_windows(grid, 4, 48)

    def test_deterministic(self, default_grid):
        assert pattern_sets(default_grid) == pattern_sets(default_grid)

    @settings(max_examples=20, deadline=None)
    @given(
        n_days=st.integers(1, 3),
        n_daytime=st.integers(1, 3),
        nights=st.lists(st.booleans(), min_size=4, max_size=4),
    )
    def test_appending_a_day_preserves_slots_and_pairs(self, n_days, n_daytime, nights):
        config = make_config(n_days, n_daytime, nights)
        grid = build_grid(config)
        bigger = ExamPeriodConfig(
            days=config.days + (DaySpec("EXTRA", nights[3]),),
            daytime_slot_times=config.daytime_slot_times,
            night_slot_time=config.night_slot_time,
        )
        grid2 = build_grid(bigger)
        assert grid2.slots[: len(grid.slots)] == grid.slots
        ps, ps2 = pattern_sets(grid), pattern_sets(grid2)
        assert set(ps.b2b_pairs) <= set(ps2.b2b_pairs)
        assert set(ps.pm_to_am_pairs) <= set(ps2.pm_to_am_pairs)
        assert set(ps.windows_3in24) <= set(ps2.windows_3in24)
        assert set(ps.windows_4in48) <= set(ps2.windows_4in48)


class TestSlotRefs:
    def test_resolve_by_day_and_seq(self, default_grid):
        assert default_grid.resolve_slot_ref("Mon:1") == 0
        assert default_grid.resolve_slot_ref("Tue:1") == 4
        assert default_grid.resolve_slot_ref(21) == 21
        assert default_grid.resolve_slot_ref("21") == 21

    def test_bad_refs(self, default_grid):
        with pytest.raises(KeyError):
            default_grid.resolve_slot_ref("Sun:1")
        with pytest.raises(KeyError):
            default_grid.resolve_slot_ref(22)
