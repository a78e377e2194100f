"""Partition course sections into course groups.

Two-stage rule: every course on the coordinated list becomes one group
holding all of its sections; every remaining section joins the group keyed
by its primary meeting time.  Sections whose meetings span more than one
meeting kind (say a lecture plus a lab) get a provisional group from the
highest-priority kind and are flagged ambiguous for a human to confirm.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

WEEKDAY_CODES = "MTWRFSU"  # Mon Tue Wed Thu Fri Sat Sun

MEETING_KINDS = ("lecture", "lab", "evening", "other")
# Which meeting kind anchors a section's group when it has several.
_KIND_PRIORITY = {"lecture": 0, "other": 1, "evening": 2, "lab": 3}


class GroupingError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Meeting:
    weekday: int  # 0 = Monday
    start: int  # minutes after midnight
    end: int
    kind: str

    def __post_init__(self) -> None:
        if not 0 <= self.weekday < 7:
            raise GroupingError("bad-weekday", f"weekday {self.weekday} out of range")
        if self.start >= self.end:
            raise GroupingError("bad-meeting-time", "meeting start must precede end")
        if self.kind not in MEETING_KINDS:
            raise GroupingError("bad-meeting-kind", f"unknown meeting kind {self.kind!r}")


@dataclass(frozen=True)
class Section:
    course_code: str
    section_id: str
    meetings: tuple[Meeting, ...]
    faculty_ids: tuple[str, ...] = ()

    @property
    def key(self) -> str:
        return f"{self.course_code}/{self.section_id}"


def parse_clock_minutes(text: str) -> int:
    hh, mm = text.strip().split(":")
    return int(hh) * 60 + int(mm)


def parse_meeting_pattern(pattern: str) -> tuple[Meeting, ...]:
    """Parse 'MWF 10:00-10:50 lecture; T 13:00-16:00 lab' into meetings.

    The kind token is optional and defaults to 'lecture'.
    """
    meetings: list[Meeting] = []
    for part in pattern.split(";"):
        part = part.strip()
        if not part:
            continue
        tokens = part.split()
        if len(tokens) < 2:
            raise GroupingError("bad-meeting-pattern", f"cannot parse meeting {part!r}")
        day_token, time_token = tokens[0], tokens[1]
        kind = tokens[2].lower() if len(tokens) > 2 else "lecture"
        try:
            start_s, end_s = time_token.split("-")
            start, end = parse_clock_minutes(start_s), parse_clock_minutes(end_s)
        except ValueError as exc:
            raise GroupingError("bad-meeting-pattern", f"cannot parse time in {part!r}") from exc
        for ch in day_token:
            if ch not in WEEKDAY_CODES:
                raise GroupingError("bad-meeting-pattern", f"unknown weekday code {ch!r} in {part!r}")
            meetings.append(Meeting(WEEKDAY_CODES.index(ch), start, end, kind))
    return tuple(meetings)


@dataclass(frozen=True)
class CourseGroup:
    id: int
    label: str
    kind: str  # "coordinated" | "meeting-time"
    section_ids: tuple[str, ...]
    n_students: int


@dataclass(frozen=True)
class GroupingResult:
    groups: tuple[CourseGroup, ...]
    # (section key, candidate meeting-time keys) for human review
    ambiguous_sections: tuple[tuple[str, tuple[str, ...]], ...]
    # (student, course A, course B): same group, meetings overlap in time
    forced_overlap_pairs: tuple[tuple[str, str, str], ...]

    def group_of_section(self) -> dict[str, int]:
        return {sec: g.id for g in self.groups for sec in g.section_ids}

    def group_by_label(self, label: str) -> CourseGroup:
        for g in self.groups:
            if g.label == label:
                return g
        raise KeyError(label)


def meeting_time_key(meetings: tuple[Meeting, ...], kind: str) -> str:
    """Group key for the meetings of one kind: weekday letters per distinct
    start time, e.g. 'MWF-1000' or 'TR-0900+W-1400'."""
    chosen = sorted((m for m in meetings if m.kind == kind), key=lambda m: (m.start, m.weekday))
    by_start: dict[int, list[int]] = {}
    for m in chosen:
        by_start.setdefault(m.start, []).append(m.weekday)
    parts = []
    for start in sorted(by_start):
        days = "".join(WEEKDAY_CODES[d] for d in sorted(set(by_start[start])))
        parts.append(f"{days}-{start // 60:02d}{start % 60:02d}")
    return "+".join(parts)


def primary_meeting_kind(section: Section) -> str | None:
    if not section.meetings:
        return None
    return min((m.kind for m in section.meetings), key=lambda k: _KIND_PRIORITY[k])


def candidate_keys(section: Section) -> tuple[str, ...]:
    kinds = sorted({m.kind for m in section.meetings}, key=lambda k: _KIND_PRIORITY[k])
    return tuple(meeting_time_key(section.meetings, k) for k in kinds)


def _meetings_overlap(a: Meeting, b: Meeting) -> bool:
    return a.weekday == b.weekday and a.start < b.end and b.start < a.end


def _sections_overlap(a: Section, b: Section) -> bool:
    return any(_meetings_overlap(ma, mb) for ma in a.meetings for mb in b.meetings)


def _forced_pairs(
    membership: dict[str, list[str]],
    sections_by_key: dict[str, Section],
    enrollments_by_student: dict[str, set[str]],
) -> tuple[tuple[str, str, str], ...]:
    """Same-group course pairs a student must sit simultaneously because the
    underlying meetings overlap.  Schedule-independent by construction."""
    pairs: set[tuple[str, str, str]] = set()
    section_group = {sec: label for label, secs in membership.items() for sec in secs}
    for student, sec_keys in enrollments_by_student.items():
        keys = sorted(k for k in sec_keys if k in section_group)
        for i, ka in enumerate(keys):
            for kb in keys[i + 1 :]:
                if section_group[ka] != section_group[kb]:
                    continue
                sa, sb = sections_by_key[ka], sections_by_key[kb]
                if sa.course_code == sb.course_code:
                    continue
                if _sections_overlap(sa, sb):
                    a, b = sorted((sa.course_code, sb.course_code))
                    pairs.add((student, a, b))
    return tuple(sorted(pairs))


def _finalize(
    membership: dict[str, list[str]],
    group_kind: dict[str, str],
    ambiguous: list[tuple[str, tuple[str, ...]]],
    sections_by_key: dict[str, Section],
    enroll_students: dict[str, set[str]],
) -> GroupingResult:
    """Assign dense ids (coordinated groups first, then by label), count
    distinct students, drop empty-membership labels."""
    students_of_section: dict[str, set[str]] = {}
    for student, secs in enroll_students.items():
        for sec in secs:
            students_of_section.setdefault(sec, set()).add(student)

    labels = [label for label, secs in membership.items() if secs]
    labels.sort(key=lambda lb: (0 if group_kind[lb] == "coordinated" else 1, lb))
    groups = []
    for gid, label in enumerate(labels):
        secs = tuple(sorted(membership[label]))
        students: set[str] = set()
        for sec in secs:
            students |= students_of_section.get(sec, set())
        groups.append(
            CourseGroup(
                id=gid,
                label=label,
                kind=group_kind[label],
                section_ids=secs,
                n_students=len(students),
            )
        )
    return GroupingResult(
        groups=tuple(groups),
        ambiguous_sections=tuple(sorted(ambiguous)),
        forced_overlap_pairs=_forced_pairs(membership, sections_by_key, enroll_students),
    )


def _enrollments_by_student(enrollments) -> dict[str, set[str]]:
    by_student: dict[str, set[str]] = {}
    for student, course, section in enrollments:
        by_student.setdefault(student, set()).add(f"{course}/{section}")
    return by_student


def build_groups(
    sections: list[Section],
    enrollments: list[tuple[str, str, str]],
    coordinated_courses: list[str],
) -> GroupingResult:
    """Partition `sections` into course groups.

    enrollments: (student_id, course_code, section_id) rows, already deduped.
    """
    sections_by_key = {s.key: s for s in sections}
    courses_present = {s.course_code for s in sections}
    for course in coordinated_courses:
        if course not in courses_present:
            raise GroupingError("unknown-coordinated-course", f"coordinated course {course!r} has no sections")
    coordinated = set(coordinated_courses)

    membership: dict[str, list[str]] = {}
    group_kind: dict[str, str] = {}
    ambiguous: list[tuple[str, tuple[str, ...]]] = []

    for sec in sorted(sections, key=lambda s: s.key):
        if sec.course_code in coordinated:
            label = sec.course_code
            group_kind.setdefault(label, "coordinated")
            membership.setdefault(label, []).append(sec.key)
            continue
        kind = primary_meeting_kind(sec)
        if kind is None:
            # no meetings to key on: singleton provisional group, flagged
            label = f"UNSCHEDULED-{sec.key}"
            group_kind.setdefault(label, "meeting-time")
            membership.setdefault(label, []).append(sec.key)
            ambiguous.append((sec.key, ()))
            continue
        keys = candidate_keys(sec)
        label = keys[0]
        group_kind.setdefault(label, "meeting-time")
        membership.setdefault(label, []).append(sec.key)
        if len(keys) > 1:
            ambiguous.append((sec.key, keys))

    return _finalize(membership, group_kind, ambiguous, sections_by_key, _enrollments_by_student(enrollments))


def apply_group_edits(
    result: GroupingResult,
    edits: list[tuple[str, str]],
    sections: list[Section],
    enrollments: list[tuple[str, str, str]],
) -> GroupingResult:
    """Move sections between groups: edits are (section key, target group
    label), creating groups named by new labels.  Counts, forced pairs and
    ids are recomputed; emptied groups disappear; edited sections lose
    their ambiguity flag."""
    sections_by_key = {s.key: s for s in sections}
    membership: dict[str, list[str]] = {g.label: list(g.section_ids) for g in result.groups}
    group_kind: dict[str, str] = {g.label: g.kind for g in result.groups}

    edited: set[str] = set()
    for sec_key, target_label in edits:
        if sec_key not in sections_by_key:
            raise GroupingError("unknown-section", f"edit references unknown section {sec_key!r}")
        for secs in membership.values():
            if sec_key in secs:
                secs.remove(sec_key)
        membership.setdefault(target_label, []).append(sec_key)
        group_kind.setdefault(target_label, "meeting-time")
        edited.add(sec_key)

    ambiguous = [(k, cands) for k, cands in result.ambiguous_sections if k not in edited]
    return _finalize(membership, group_kind, ambiguous, sections_by_key, _enrollments_by_student(enrollments))


def grouping_report_csv(result: GroupingResult) -> str:
    """Delimited review export: one row per section with its group and flag."""
    ambiguous_keys = {k for k, _ in result.ambiguous_sections}
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["group_id", "group_label", "group_kind", "n_students", "section", "ambiguous"])
    for g in result.groups:
        for sec in g.section_ids:
            writer.writerow([g.id, g.label, g.kind, g.n_students, sec, "yes" if sec in ambiguous_keys else ""])
    return buf.getvalue()
