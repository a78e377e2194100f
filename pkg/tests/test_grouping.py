import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from examsched.grouping import (
    GroupingError,
    Meeting,
    Section,
    apply_group_edits,
    build_groups,
    candidate_keys,
    grouping_report_csv,
    meeting_time_key,
    parse_meeting_pattern,
    primary_meeting_kind,
)


def sec(course, sid, pattern, faculty=()):
    return Section(course, sid, parse_meeting_pattern(pattern) if pattern else (), tuple(faculty))


MWF10 = "MWF 10:00-10:50 lecture"


class TestMeetingParsing:
    def test_basic_pattern(self):
        meetings = parse_meeting_pattern(MWF10)
        assert [(m.weekday, m.start, m.end, m.kind) for m in meetings] == [
            (0, 600, 650, "lecture"),
            (2, 600, 650, "lecture"),
            (4, 600, 650, "lecture"),
        ]

    def test_multi_part_pattern(self):
        meetings = parse_meeting_pattern("MWF 10:00-10:50 lecture; T 13:00-16:00 lab")
        assert {m.kind for m in meetings} == {"lecture", "lab"}

    def test_kind_defaults_to_lecture(self):
        assert parse_meeting_pattern("R 09:00-09:50")[0].kind == "lecture"

    def test_bad_weekday_rejected(self):
        with pytest.raises(GroupingError):
            parse_meeting_pattern("X 10:00-10:50 lecture")

    def test_start_after_end_rejected(self):
        with pytest.raises(GroupingError):
            Meeting(0, 700, 650, "lecture")


class TestKeys:
    def test_single_kind_key(self):
        s = sec("HIST140", "01", MWF10)
        assert primary_meeting_kind(s) == "lecture"
        assert meeting_time_key(s.meetings, "lecture") == "MWF-1000"

    def test_lecture_beats_lab(self):
        s = sec("PHYS101", "01", "T 13:00-16:00 lab; MWF 10:00-10:50 lecture")
        assert primary_meeting_kind(s) == "lecture"
        assert candidate_keys(s) == ("MWF-1000", "T-1300")

    def test_multi_start_key(self):
        s = sec("CS200", "01", "MW 09:00-09:50 lecture; F 14:00-14:50 lecture")
        assert meeting_time_key(s.meetings, "lecture") == "MW-0900+F-1400"


def demo_sections():
    return [
        sec("CALC1", "01", "MWF 09:00-09:50 lecture"),
        sec("CALC1", "02", MWF10),
        sec("PHYS101", "01", "MWF 10:00-10:50 lecture; T 13:00-16:00 lab"),
        sec("HIST140", "01", MWF10),
        sec("BIO150", "01", "TR 13:00-14:15 lecture"),
    ]


def demo_enrollments():
    return [
        ("s1", "CALC1", "01"),
        ("s1", "BIO150", "01"),
        ("s2", "CALC1", "02"),
        ("s2", "PHYS101", "01"),
        ("s3", "PHYS101", "01"),
        ("s3", "HIST140", "01"),
        ("s4", "HIST140", "01"),
    ]


class TestBuildGroups:
    def test_coordinated_course_forms_one_group(self):
        result = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
        calc = result.group_by_label("CALC1")
        assert calc.kind == "coordinated"
        assert set(calc.section_ids) == {"CALC1/01", "CALC1/02"}
        assert calc.n_students == 2

    def test_meeting_time_group_key(self):
        result = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
        mwf = result.group_by_label("MWF-1000")
        assert {"PHYS101/01", "HIST140/01"} <= set(mwf.section_ids)

    def test_lab_section_flagged_ambiguous_with_provisional_group(self):
        result = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
        flagged = dict(result.ambiguous_sections)
        assert "PHYS101/01" in flagged
        assert flagged["PHYS101/01"] == ("MWF-1000", "T-1300")
        assert "PHYS101/01" in result.group_by_label("MWF-1000").section_ids

    def test_meeting_less_section_gets_singleton_and_flag(self):
        sections = demo_sections() + [sec("IND300", "01", "")]
        result = build_groups(sections, demo_enrollments() + [("s5", "IND300", "01")], ["CALC1"])
        flagged = dict(result.ambiguous_sections)
        assert "IND300/01" in flagged
        single = result.group_by_label("UNSCHEDULED-IND300/01")
        assert single.section_ids == ("IND300/01",)

    def test_unknown_coordinated_course_rejected(self):
        with pytest.raises(GroupingError):
            build_groups(demo_sections(), demo_enrollments(), ["NOPE1"])

    def test_partition_property(self):
        sections = demo_sections()
        result = build_groups(sections, demo_enrollments(), ["CALC1"])
        placed = [s for g in result.groups for s in g.section_ids]
        assert sorted(placed) == sorted(s.key for s in sections)

    def test_forced_overlap_detected(self):
        # s3 takes PHYS101 and HIST140: same MWF-1000 group, meetings collide
        result = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
        assert ("s3", "HIST140", "PHYS101") in result.forced_overlap_pairs

    def test_forced_overlap_matches_naive_pairwise_check(self):
        sections = demo_sections()
        enrollments = demo_enrollments()
        result = build_groups(sections, enrollments, ["CALC1"])
        by_key = {s.key: s for s in sections}
        sec_group = result.group_of_section()
        by_student = {}
        for student, course, sid in enrollments:
            by_student.setdefault(student, []).append(f"{course}/{sid}")
        expected = set()
        for student, keys in by_student.items():
            for i, ka in enumerate(keys):
                for kb in keys[i + 1 :]:
                    if sec_group[ka] != sec_group[kb]:
                        continue
                    sa, sb = by_key[ka], by_key[kb]
                    if sa.course_code == sb.course_code:
                        continue
                    collides = any(
                        ma.weekday == mb.weekday and ma.start < mb.end and mb.start < ma.end
                        for ma in sa.meetings
                        for mb in sb.meetings
                    )
                    if collides:
                        a, b = sorted((sa.course_code, sb.course_code))
                        expected.add((student, a, b))
        assert set(result.forced_overlap_pairs) == expected

    def test_deterministic(self):
        a = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
        b = build_groups(list(reversed(demo_sections())), list(reversed(demo_enrollments())), ["CALC1"])
        assert a.groups == b.groups


class TestEdits:
    def test_move_clears_ambiguity(self):
        sections = demo_sections()
        enrollments = demo_enrollments()
        result = build_groups(sections, enrollments, ["CALC1"])
        edited = apply_group_edits(result, [("PHYS101/01", "T-1300")], sections, enrollments)
        assert "PHYS101/01" not in dict(edited.ambiguous_sections)
        assert "PHYS101/01" in edited.group_by_label("T-1300").section_ids

    def test_noop_edit_is_identity(self):
        sections = demo_sections()
        enrollments = demo_enrollments()
        result = build_groups(sections, enrollments, ["CALC1"])
        assert apply_group_edits(result, [], sections, enrollments) == result

    def test_merge_recounts_distinct_students(self):
        sections = [sec("A1", "01", "M 09:00-09:50 lecture"), sec("B1", "01", "T 09:00-09:50 lecture")]
        enrollments = [("s1", "A1", "01"), ("s2", "A1", "01"), ("s1", "B1", "01")]
        result = build_groups(sections, enrollments, [])
        assert [g.n_students for g in result.groups] == [2, 1]
        merged = apply_group_edits(result, [("B1/01", "M-0900")], sections, enrollments)
        assert len(merged.groups) == 1
        # distinct recount: s1 counted once across both sections
        assert merged.groups[0].n_students == 2

    def test_empty_groups_dropped_and_ids_dense(self):
        sections = demo_sections()
        enrollments = demo_enrollments()
        result = build_groups(sections, enrollments, ["CALC1"])
        edited = apply_group_edits(result, [("BIO150/01", "MWF-1000")], sections, enrollments)
        assert "TR-1300" not in {g.label for g in edited.groups}
        assert [g.id for g in edited.groups] == list(range(len(edited.groups)))

    def test_unknown_section_rejected_with_code(self):
        result = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
        with pytest.raises(GroupingError) as exc:
            apply_group_edits(result, [("GHOST/00", "MWF-1000")], demo_sections(), demo_enrollments())
        assert exc.value.code == "unknown-section"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3)), min_size=1, max_size=12, unique=True))
def test_partition_property_random(pairs):
    # random sections across 5 courses x up to 4 meeting shapes
    shapes = [MWF10, "TR 09:30-10:45 lecture", "MW 14:00-15:15 lecture", "F 09:00-11:50 lab"]
    sections = [sec(f"C{c}", f"{i:02d}", shapes[m]) for i, (c, m) in enumerate(pairs)]
    enrollments = [(f"s{i}", s.course_code, s.section_id) for i, s in enumerate(sections)]
    result = build_groups(sections, enrollments, [])
    placed = [k for g in result.groups for k in g.section_ids]
    assert sorted(placed) == sorted(s.key for s in sections)
    assert len(set(placed)) == len(placed)


def test_report_csv_lists_every_section():
    result = build_groups(demo_sections(), demo_enrollments(), ["CALC1"])
    report = grouping_report_csv(result)
    for s in demo_sections():
        assert s.key in report
    assert "ambiguous" in report.splitlines()[0]
