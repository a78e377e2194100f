"""Schedule inconvenience metrics.

Mirrors the penalty accounting of the binary program exactly: overlap,
back-to-back and night-to-morning penalties accrue once per (person,
occurrence); the 3-exams-in-24h, 4-exams-in-48h and both faculty penalties
accrue at most once per person.  Head counts (persons hit at least once)
are reported alongside for the summary rows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ingest import Instance, Weights, canonical_json_bytes

REPORT_ROW_LABELS = (
    "Students with an Unforced Overlap",
    "Students with 3 Exams in 24 Hours",
    "Students with 4 Exams in 48 Hours",
    "Students with Back-to-Back Exams",
    "Students with Night-to-Morning Exams",
    "Students with at Least One Inconvenience",
    "Faculty with an Unforced Overlap",
    "Faculty with Back-to-Back Exams",
)

_ROW_METRICS = (
    "students_unforced_overlap",
    "students_3in24",
    "students_4in48",
    "students_b2b",
    "students_pm_to_am",
    "students_any",
    "faculty_unforced_overlap",
    "faculty_b2b",
)


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Total assignment of course groups to slots (group id -> slot id)."""

    assignment: dict[int, int]

    def slot_of(self, group_id: int) -> int:
        return self.assignment[group_id]

    def moved(self, group_id: int, slot_id: int) -> "Schedule":
        new = dict(self.assignment)
        new[group_id] = slot_id
        return Schedule(new)

    def to_doc(self, instance: Instance) -> dict:
        return {
            "schema_version": 1,
            "kind": "schedule",
            "instance_digest": instance.digest(),
            "assignment": {
                instance.groups[g].label: int(t) for g, t in sorted(self.assignment.items())
            },
        }

    def canonical_bytes(self, instance: Instance) -> bytes:
        return canonical_json_bytes(self.to_doc(instance))

    @staticmethod
    def from_doc(doc: dict, instance: Instance) -> "Schedule":
        if doc.get("kind") != "schedule":
            raise ValueError("document is not a schedule")
        label_to_id = {g.label: g.id for g in instance.groups}
        return Schedule({label_to_id[lb]: int(t) for lb, t in doc["assignment"].items()})

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.assignment.items())))


def save_schedule(schedule: Schedule, instance: Instance, path: str | Path) -> None:
    Path(path).write_bytes(schedule.canonical_bytes(instance))


def load_schedule(path: str | Path, instance: Instance) -> Schedule:
    with open(path, encoding="utf-8") as fh:
        return Schedule.from_doc(json.load(fh), instance)


@dataclass(frozen=True)
class InconvenienceReport:
    head_counts: dict[str, int]  # keyed by _ROW_METRICS
    overlap_occurrences: int
    b2b_occurrences: int
    pm_to_am_occurrences: int
    fac_overlap_occurrences: int
    fac_b2b_occurrences: int
    forced_overlap_count: int
    weighted_objective: float
    weights: Weights
    details: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, int]]:
        """The eight summary rows, in report order."""
        return [(label, self.head_counts[m]) for label, m in zip(REPORT_ROW_LABELS, _ROW_METRICS)]

    def to_doc(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "inconvenience_report",
            "rows": {label: count for label, count in self.rows()},
            "head_counts": dict(self.head_counts),
            "occurrences": {
                "overlap": self.overlap_occurrences,
                "b2b": self.b2b_occurrences,
                "pm_to_am": self.pm_to_am_occurrences,
                "fac_overlap": self.fac_overlap_occurrences,
                "fac_b2b": self.fac_b2b_occurrences,
            },
            "forced_overlap_count": self.forced_overlap_count,
            "weighted_objective": self.weighted_objective,
            "weights": self.weights.to_doc(),
            "details": {k: list(v) for k, v in self.details.items()},
        }

    def delta(self, other: "InconvenienceReport") -> dict:
        """Per-metric change of `self` relative to `other` (new - old)."""
        return {
            "head_counts": {
                m: self.head_counts[m] - other.head_counts[m] for m in _ROW_METRICS
            },
            "occurrences": {
                "overlap": self.overlap_occurrences - other.overlap_occurrences,
                "b2b": self.b2b_occurrences - other.b2b_occurrences,
                "pm_to_am": self.pm_to_am_occurrences - other.pm_to_am_occurrences,
                "fac_overlap": self.fac_overlap_occurrences - other.fac_overlap_occurrences,
                "fac_b2b": self.fac_b2b_occurrences - other.fac_b2b_occurrences,
            },
            "weighted_objective": self.weighted_objective - other.weighted_objective,
        }


def _slot_presence(instance: Instance, schedule: Schedule, incidence: np.ndarray) -> np.ndarray:
    """Exam multiplicity per (person, slot) from a person x group incidence."""
    counts = np.zeros((incidence.shape[0], instance.num_slots), dtype=np.int32)
    for g in range(instance.num_groups):
        counts[:, schedule.slot_of(g)] += incidence[:, g]
    return counts


def evaluate_schedule(
    instance: Instance, schedule: Schedule, weights: Weights | None = None
) -> InconvenienceReport:
    """Compute every inconvenience metric and the weighted objective."""
    w = weights or instance.weights
    if set(schedule.assignment.keys()) != set(range(instance.num_groups)):
        raise EvaluationError("schedule must assign every course group exactly once")
    for g, t in schedule.assignment.items():
        if not 0 <= t < instance.num_slots:
            raise EvaluationError(f"group {g} assigned to nonexistent slot {t}")
        if not instance.a[t]:
            raise EvaluationError(f"group {g} assigned to unavailable slot {t}")

    pat = instance.patterns
    counts = _slot_presence(instance, schedule, instance.b)
    v = counts > 0

    # overlap: one occurrence per exam beyond the first in a slot
    overlap_occ = int(np.maximum(counts - 1, 0).sum())
    s_overlap = counts.max(axis=1) >= 2 if counts.size else np.zeros(0, dtype=bool)

    def pair_hits(pairs) -> tuple[int, np.ndarray]:
        if not pairs or not v.size:
            return 0, np.zeros(v.shape[0], dtype=bool)
        t0 = np.array([p[0] for p in pairs])
        t1 = np.array([p[1] for p in pairs])
        active = v[:, t0] & v[:, t1]
        return int(active.sum()), active.any(axis=1)

    b2b_occ, s_b2b = pair_hits(pat.b2b_pairs)
    pm_occ, s_pm = pair_hits(pat.pm_to_am_pairs)

    def window_hits(windows, size) -> np.ndarray:
        if not windows or not v.size:
            return np.zeros(v.shape[0], dtype=bool)
        members = np.array(windows)  # (n_windows, size)
        full = v[:, members].sum(axis=2) == size
        return full.any(axis=1)

    s_3 = window_hits(pat.windows_3in24, 3)
    s_4 = window_hits(pat.windows_4in48, 4)
    s_any = s_overlap | s_b2b | s_pm | s_3 | s_4

    fcounts = _slot_presence(instance, schedule, instance.d)
    fv = fcounts > 0
    fac_overlap_occ = int(np.maximum(fcounts - 1, 0).sum())
    f_overlap = fcounts.max(axis=1) >= 2 if fcounts.size else np.zeros(0, dtype=bool)
    if pat.b2b_pairs and fv.size:
        t0 = np.array([p[0] for p in pat.b2b_pairs])
        t1 = np.array([p[1] for p in pat.b2b_pairs])
        f_pair_active = fv[:, t0] & fv[:, t1]
        fac_b2b_occ = int(f_pair_active.sum())
        f_b2b = f_pair_active.any(axis=1)
    else:
        fac_b2b_occ = 0
        f_b2b = np.zeros(fv.shape[0], dtype=bool)

    head_counts = {
        "students_unforced_overlap": int(s_overlap.sum()),
        "students_3in24": int(s_3.sum()),
        "students_4in48": int(s_4.sum()),
        "students_b2b": int(s_b2b.sum()),
        "students_pm_to_am": int(s_pm.sum()),
        "students_any": int(s_any.sum()),
        "faculty_unforced_overlap": int(f_overlap.sum()),
        "faculty_b2b": int(f_b2b.sum()),
    }

    objective = (
        w.overlap * overlap_occ
        + w.b2b * b2b_occ
        + w.pm_to_am * pm_occ
        + w.three_in_24 * head_counts["students_3in24"]
        + w.four_in_48 * head_counts["students_4in48"]
        + w.fac_overlap * head_counts["faculty_unforced_overlap"]
        + w.fac_b2b * head_counts["faculty_b2b"]
    )

    students = np.array(instance.students)
    faculty = np.array(instance.faculty) if instance.num_faculty else np.zeros(0, dtype=str)
    details = {
        "students_unforced_overlap": tuple(students[s_overlap]),
        "students_3in24": tuple(students[s_3]),
        "students_4in48": tuple(students[s_4]),
        "students_b2b": tuple(students[s_b2b]),
        "students_pm_to_am": tuple(students[s_pm]),
        "students_any": tuple(students[s_any]),
        "faculty_unforced_overlap": tuple(faculty[f_overlap]) if instance.num_faculty else (),
        "faculty_b2b": tuple(faculty[f_b2b]) if instance.num_faculty else (),
    }

    return InconvenienceReport(
        head_counts=head_counts,
        overlap_occurrences=overlap_occ,
        b2b_occurrences=b2b_occ,
        pm_to_am_occurrences=pm_occ,
        fac_overlap_occurrences=fac_overlap_occ,
        fac_b2b_occurrences=fac_b2b_occ,
        forced_overlap_count=len(instance.forced_overlap_pairs),
        weighted_objective=float(objective),
        weights=w,
        details=details,
    )


def hard_violations(instance: Instance, schedule: Schedule) -> list[str]:
    """Independent check of the hard rules a solver must honor: totality,
    availability, per-slot seat cap, pins, blocks, and the two-exam caps
    per student and per faculty member in any one slot."""
    problems: list[str] = []
    assigned = schedule.assignment
    if set(assigned.keys()) != set(range(instance.num_groups)):
        problems.append("assignment is not total over course groups")
        return problems
    seats = np.zeros(instance.num_slots, dtype=np.int64)
    for g, t in assigned.items():
        if not 0 <= t < instance.num_slots:
            problems.append(f"group {g} at nonexistent slot {t}")
            return problems
        if not instance.a[t]:
            problems.append(f"group {g} at unavailable slot {t}")
        if instance.q[g, t]:
            problems.append(f"group {g} at blocked slot {t}")
        pins = np.nonzero(instance.r[g])[0]
        if pins.size and t != int(pins[0]):
            problems.append(f"group {g} pinned to slot {int(pins[0])} but placed at {t}")
        seats[t] += instance.groups[g].n_students
    for t in np.nonzero(seats > instance.m1)[0]:
        problems.append(f"slot {int(t)} seats {int(seats[t])} students, cap {instance.m1}")
    counts = _slot_presence(instance, schedule, instance.b)
    for s, t in zip(*np.nonzero(counts > 2)):
        problems.append(f"student {instance.students[s]!r} has {int(counts[s, t])} exams in slot {int(t)}")
    if instance.num_faculty:
        fcounts = _slot_presence(instance, schedule, instance.d)
        for f, t in zip(*np.nonzero(fcounts > 2)):
            problems.append(f"faculty {instance.faculty[f]!r} has {int(fcounts[f, t])} exams in slot {int(t)}")
    return problems


# --- pairwise co-enrollment matrix ---------------------------------------


@dataclass(frozen=True)
class OverlapMatrix:
    labels: tuple[str, ...]
    current: np.ndarray  # co-enrollment counts, diagonal = group size
    historical: np.ndarray | None  # same shape, -1 where no match

    def cell(self, label_a: str, label_b: str) -> tuple[int, int | None]:
        i, j = self.labels.index(label_a), self.labels.index(label_b)
        hist = None
        if self.historical is not None and self.historical[i, j] >= 0:
            hist = int(self.historical[i, j])
        return int(self.current[i, j]), hist

    def to_doc(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "overlap_matrix",
            "labels": list(self.labels),
            "current": self.current.tolist(),
            "historical": self.historical.tolist() if self.historical is not None else None,
        }


def overlap_matrix(instance: Instance, historical: Instance | None = None) -> OverlapMatrix:
    """Students concurrently enrolled in each pair of course groups, with an
    optional prior-term comparison matched by group label."""
    b = instance.b.astype(np.int64)
    current = b.T @ b
    hist = None
    if historical is not None:
        hb = historical.b.astype(np.int64)
        hmat = hb.T @ hb
        hist_by_label = {g.label: g.id for g in historical.groups}
        hist = -np.ones_like(current)
        for gi in instance.groups:
            for gj in instance.groups:
                hi, hj = hist_by_label.get(gi.label), hist_by_label.get(gj.label)
                if hi is not None and hj is not None:
                    hist[gi.id, gj.id] = hmat[hi, hj]
    return OverlapMatrix(
        labels=tuple(g.label for g in instance.groups),
        current=current,
        historical=hist,
    )


# --- exports ---------------------------------------------------------------


def report_csv(report: InconvenienceReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["metric", "count"])
    for label, count in report.rows():
        writer.writerow([label, count])
    writer.writerow(["Weighted Objective", report.weighted_objective])
    writer.writerow(["Forced Overlaps (excluded above)", report.forced_overlap_count])
    return buf.getvalue()


def matrix_csv(matrix: OverlapMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["group_a", "group_b", "current", "historical"])
    labels = matrix.labels
    for i, la in enumerate(labels):
        for j, lb in enumerate(labels):
            if j < i:
                continue
            hist = ""
            if matrix.historical is not None and matrix.historical[i, j] >= 0:
                hist = int(matrix.historical[i, j])
            writer.writerow([la, lb, int(matrix.current[i, j]), hist])
    return buf.getvalue()


def schedule_csv(instance: Instance, schedule: Schedule) -> str:
    """Final exam schedule as a delimited document, one row per group."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["group", "kind", "day", "slot", "sections"])
    grid = instance.grid
    for g in instance.groups:
        t = schedule.slot_of(g.id)
        slot = grid.slots[t]
        writer.writerow(
            [
                g.label,
                g.kind,
                grid.day_label(slot.day_index),
                grid.slot_name(t),
                ";".join(g.section_ids),
            ]
        )
    return buf.getvalue()
