"""Load, validate, and persist scheduling instances.

An Instance is an immutable snapshot: students, faculty, course groups,
the slot grid with its pattern sets, the student/faculty incidence
matrices, slot availability, per-group pins and blocks, the per-slot
seat cap, and a default penalty weight set.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grouping import (
    CourseGroup,
    GroupingError,
    GroupingResult,
    Section,
    build_groups,
    parse_meeting_pattern,
)
from .timegrid import ExamPeriodConfig, PatternSets, TimeGrid, build_grid, pattern_sets

SCHEMA_VERSION = 1


class IngestError(ValueError):
    def __init__(self, findings):
        msgs = "; ".join(f.message for f in findings)
        super().__init__(f"instance load failed: {msgs}")
        self.findings = findings


@dataclass(frozen=True)
class Finding:
    code: str
    severity: str  # "error" | "warning"
    message: str


def _err(code: str, message: str) -> Finding:
    return Finding(code, "error", message)


def _warn(code: str, message: str) -> Finding:
    return Finding(code, "warning", message)


@dataclass(frozen=True)
class Weights:
    """Penalty weights, one per inconvenience family."""

    overlap: float = 100.0
    b2b: float = 10.0
    pm_to_am: float = 8.0
    three_in_24: float = 30.0
    four_in_48: float = 20.0
    fac_overlap: float = 25.0
    fac_b2b: float = 5.0

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.as_tuple()):
            raise ValueError("penalty weights must be non-negative")

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.overlap,
            self.b2b,
            self.pm_to_am,
            self.three_in_24,
            self.four_in_48,
            self.fac_overlap,
            self.fac_b2b,
        )

    def to_doc(self) -> dict:
        return {
            "overlap": self.overlap,
            "b2b": self.b2b,
            "pm_to_am": self.pm_to_am,
            "three_in_24": self.three_in_24,
            "four_in_48": self.four_in_48,
            "fac_overlap": self.fac_overlap,
            "fac_b2b": self.fac_b2b,
        }

    @staticmethod
    def from_doc(doc: dict) -> "Weights":
        return Weights(**{k: float(v) for k, v in doc.items()})


@dataclass(frozen=True)
class ConstraintSpec:
    """Pins/blocks by group label, slot availability overrides, seat cap."""

    pins: tuple[tuple[str, str], ...] = ()  # (group_label, slot ref)
    blocks: tuple[tuple[str, str], ...] = ()
    unavailable_slots: tuple[str, ...] = ()
    m1: int | None = None


@dataclass(frozen=True, eq=False)
class Instance:
    students: tuple[str, ...]
    faculty: tuple[str, ...]
    groups: tuple[CourseGroup, ...]
    grid: TimeGrid
    patterns: PatternSets
    b: np.ndarray  # students x groups incidence
    d: np.ndarray  # faculty x groups incidence
    a: np.ndarray  # slot availability
    r: np.ndarray  # groups x slots required
    q: np.ndarray  # groups x slots forbidden
    m1: int
    weights: Weights = field(default_factory=Weights)
    forced_overlap_pairs: tuple[tuple[str, str, str], ...] = ()

    @property
    def num_students(self) -> int:
        return len(self.students)

    @property
    def num_faculty(self) -> int:
        return len(self.faculty)

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def num_slots(self) -> int:
        return len(self.grid.slots)

    @property
    def n_g(self) -> np.ndarray:
        return np.array([g.n_students for g in self.groups], dtype=np.int64)

    @property
    def m2(self) -> int:
        """Tightest valid big-M for student-slot linking: the largest number
        of groups any one student belongs to."""
        if self.num_students == 0:
            return 1
        return max(1, int(self.b.sum(axis=1).max()))

    @property
    def m3(self) -> int:
        if self.num_faculty == 0:
            return 1
        return max(1, int(self.d.sum(axis=1).max()))

    def group_by_label(self, label: str) -> CourseGroup:
        for g in self.groups:
            if g.label == label:
                return g
        raise KeyError(f"no group labeled {label!r}")

    # --- canonical serialization ---------------------------------------

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "instance",
            "grid_config": self.grid.config.to_doc(),
            "students": list(self.students),
            "faculty": list(self.faculty),
            "groups": [
                {
                    "id": g.id,
                    "label": g.label,
                    "kind": g.kind,
                    "sections": list(g.section_ids),
                    "n_students": g.n_students,
                }
                for g in self.groups
            ],
            "enrollment": {
                g.label: [self.students[s] for s in np.nonzero(self.b[:, g.id])[0]]
                for g in self.groups
            },
            "teaching": {
                g.label: [self.faculty[f] for f in np.nonzero(self.d[:, g.id])[0]]
                for g in self.groups
            },
            "available_slots": [int(t) for t in np.nonzero(self.a)[0]],
            "pins": {g.label: int(np.nonzero(self.r[g.id])[0][0]) for g in self.groups if self.r[g.id].any()},
            "blocks": {g.label: [int(t) for t in np.nonzero(self.q[g.id])[0]] for g in self.groups if self.q[g.id].any()},
            "m1": self.m1,
            "weights": self.weights.to_doc(),
            "forced_overlap_pairs": [list(p) for p in self.forced_overlap_pairs],
        }

    @staticmethod
    def from_doc(doc: dict) -> "Instance":
        if doc.get("kind") != "instance":
            raise ValueError("document is not an instance")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported instance schema_version {doc.get('schema_version')!r}")
        grid = build_grid(ExamPeriodConfig.from_doc(doc["grid_config"]))
        students = tuple(doc["students"])
        faculty = tuple(doc["faculty"])
        groups = tuple(
            CourseGroup(
                id=g["id"],
                label=g["label"],
                kind=g["kind"],
                section_ids=tuple(g["sections"]),
                n_students=g["n_students"],
            )
            for g in doc["groups"]
        )
        s_index = {s: i for i, s in enumerate(students)}
        f_index = {f: i for i, f in enumerate(faculty)}
        n_t = len(grid.slots)
        b = np.zeros((len(students), len(groups)), dtype=bool)
        d = np.zeros((len(faculty), len(groups)), dtype=bool)
        for g in groups:
            for s in doc["enrollment"].get(g.label, []):
                b[s_index[s], g.id] = True
            for f in doc["teaching"].get(g.label, []):
                d[f_index[f], g.id] = True
        a = np.zeros(n_t, dtype=bool)
        a[doc["available_slots"]] = True
        r = np.zeros((len(groups), n_t), dtype=bool)
        q = np.zeros((len(groups), n_t), dtype=bool)
        label_to_id = {g.label: g.id for g in groups}
        for label, t in doc.get("pins", {}).items():
            r[label_to_id[label], t] = True
        for label, slots in doc.get("blocks", {}).items():
            q[label_to_id[label], slots] = True
        return Instance(
            students=students,
            faculty=faculty,
            groups=groups,
            grid=grid,
            patterns=pattern_sets(grid),
            b=b,
            d=d,
            a=a,
            r=r,
            q=q,
            m1=int(doc["m1"]),
            weights=Weights.from_doc(doc["weights"]),
            forced_overlap_pairs=tuple(tuple(p) for p in doc.get("forced_overlap_pairs", [])),
        )

    def canonical_bytes(self) -> bytes:
        return canonical_json_bytes(self.to_doc())

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, Instance) and self.canonical_bytes() == other.canonical_bytes()

    def __hash__(self) -> int:
        return hash(self.digest())


def canonical_json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_bytes(instance.canonical_bytes())


def load_saved_instance(path: str | Path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return Instance.from_doc(json.load(fh))


# --- delimited input files ----------------------------------------------


def read_enrollments(path_or_text: str | Path) -> tuple[list[tuple[str, str, str]], list[Finding]]:
    """Rows of (student_id, course_code, section_id); duplicate
    (student, section) rows are deduped with a warning."""
    rows, findings = [], []
    seen: set[tuple[str, str, str]] = set()
    for lineno, rec in _iter_csv(path_or_text, ("student_id", "course_code", "section_id")):
        key = (rec["student_id"], rec["course_code"], rec["section_id"])
        if key in seen:
            findings.append(_warn("duplicate-enrollment", f"line {lineno}: duplicate row {key} dropped"))
            continue
        seen.add(key)
        rows.append(key)
    return rows, findings


def read_sections(path_or_text: str | Path) -> tuple[list[Section], list[Finding]]:
    sections, findings = [], []
    seen: set[str] = set()
    for lineno, rec in _iter_csv(path_or_text, ("course_code", "section_id", "meeting_pattern", "faculty_ids")):
        try:
            meetings = parse_meeting_pattern(rec["meeting_pattern"]) if rec["meeting_pattern"] else ()
        except GroupingError as exc:
            findings.append(_err(exc.code, f"line {lineno}: {exc}"))
            continue
        faculty = tuple(f for f in rec["faculty_ids"].split("|") if f)
        sec = Section(rec["course_code"], rec["section_id"], meetings, faculty)
        if sec.key in seen:
            findings.append(_err("duplicate-section", f"line {lineno}: section {sec.key} defined twice"))
            continue
        seen.add(sec.key)
        sections.append(sec)
    return sections, findings


def read_coordinated(path_or_text: str | Path) -> list[str]:
    text = _read_text(path_or_text)
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def read_constraints(path_or_text: str | Path) -> tuple[ConstraintSpec, list[Finding]]:
    """Rows: kind in {require, forbid, unavailable, capacity}.

    require/forbid rows carry (group_label, slot); unavailable rows a slot
    reference; capacity rows the per-slot seat cap M1.
    """
    pins, blocks, unavailable = [], [], []
    m1 = None
    findings: list[Finding] = []
    for lineno, rec in _iter_csv(path_or_text, ("kind", "group_label", "slot")):
        kind = rec["kind"].strip().lower()
        if kind == "require":
            pins.append((rec["group_label"], rec["slot"]))
        elif kind == "forbid":
            blocks.append((rec["group_label"], rec["slot"]))
        elif kind == "unavailable":
            unavailable.append(rec["slot"])
        elif kind == "capacity":
            m1 = int(rec["slot"])
        else:
            findings.append(_err("bad-constraint-kind", f"line {lineno}: unknown kind {kind!r}"))
    return ConstraintSpec(tuple(pins), tuple(blocks), tuple(unavailable), m1), findings


def _read_text(path_or_text: str | Path) -> str:
    if isinstance(path_or_text, Path):
        return path_or_text.read_text(encoding="utf-8")
    text = str(path_or_text)
    if "\n" not in text and Path(text).exists():
        return Path(text).read_text(encoding="utf-8")
    return text


def _iter_csv(path_or_text, columns):
    text = _read_text(path_or_text)
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None:
        return
    missing = [c for c in columns if c not in reader.fieldnames]
    if missing:
        raise IngestError([_err("missing-columns", f"missing columns {missing} (have {reader.fieldnames})")])
    for lineno, rec in enumerate(reader, start=2):
        yield lineno, {c: (rec.get(c) or "").strip() for c in columns}


# --- instance assembly ---------------------------------------------------


def build_instance(
    grouping: GroupingResult,
    sections: list[Section],
    enrollments: list[tuple[str, str, str]],
    grid: TimeGrid,
    constraints: ConstraintSpec = ConstraintSpec(),
    weights: Weights | None = None,
) -> tuple[Instance | None, list[Finding]]:
    """Assemble an Instance from grouped sections; returns (instance,
    findings).  Instance is None when any finding is an error."""
    findings: list[Finding] = []
    section_keys = {s.key for s in sections}

    group_of_section = grouping.group_of_section()
    # drop groups with no enrolled students: they need no exam slot
    live_groups = []
    enrolled_sections: dict[str, set[str]] = {}
    for student, course, section in enrollments:
        key = f"{course}/{section}"
        if key not in section_keys:
            findings.append(_err("unknown-course", f"enrollment references unknown section {key}"))
            continue
        enrolled_sections.setdefault(key, set()).add(student)
    if any(f.severity == "error" for f in findings):
        return None, findings

    for g in grouping.groups:
        if g.n_students == 0:
            findings.append(_warn("empty-group-dropped", f"group {g.label!r} has no enrolled students"))
        else:
            live_groups.append(g)

    groups = tuple(
        CourseGroup(
            id=new_id,
            label=g.label,
            kind=g.kind,
            section_ids=g.section_ids,
            n_students=g.n_students,
        )
        for new_id, g in enumerate(live_groups)
    )
    label_to_id = {g.label: g.id for g in groups}

    students = tuple(sorted({s for s, _, _ in enrollments}))
    s_index = {s: i for i, s in enumerate(students)}
    faculty = tuple(sorted({f for sec in sections for f in sec.faculty_ids}))
    f_index = {f: i for i, f in enumerate(faculty)}

    b = np.zeros((len(students), len(groups)), dtype=bool)
    old_to_label = {g.id: g.label for g in grouping.groups}
    for student, course, section in enrollments:
        key = f"{course}/{section}"
        label = old_to_label[group_of_section[key]]
        if label in label_to_id:
            b[s_index[student], label_to_id[label]] = True

    d = np.zeros((len(faculty), len(groups)), dtype=bool)
    for sec in sections:
        old_gid = group_of_section.get(sec.key)
        if old_gid is None:
            continue
        label = old_to_label[old_gid]
        if label not in label_to_id:
            continue
        for f in sec.faculty_ids:
            d[f_index[f], label_to_id[label]] = True

    n_t = len(grid.slots)
    a = np.ones(n_t, dtype=bool)
    for ref in constraints.unavailable_slots:
        try:
            a[grid.resolve_slot_ref(ref)] = False
        except KeyError as exc:
            findings.append(_err("bad-slot-ref", str(exc)))

    r = np.zeros((len(groups), n_t), dtype=bool)
    q = np.zeros((len(groups), n_t), dtype=bool)
    for label, ref in constraints.pins:
        gid = label_to_id.get(label)
        if gid is None:
            findings.append(_err("unknown-group", f"pin references unknown group {label!r}"))
            continue
        try:
            r[gid, grid.resolve_slot_ref(ref)] = True
        except KeyError as exc:
            findings.append(_err("bad-slot-ref", str(exc)))
    for label, ref in constraints.blocks:
        gid = label_to_id.get(label)
        if gid is None:
            findings.append(_err("unknown-group", f"block references unknown group {label!r}"))
            continue
        try:
            q[gid, grid.resolve_slot_ref(ref)] = True
        except KeyError as exc:
            findings.append(_err("bad-slot-ref", str(exc)))

    if any(f.severity == "error" for f in findings):
        return None, findings

    instance = Instance(
        students=students,
        faculty=faculty,
        groups=groups,
        grid=grid,
        patterns=pattern_sets(grid),
        b=b,
        d=d,
        a=a,
        r=r,
        q=q,
        m1=constraints.m1 if constraints.m1 is not None else max(1, len(students)),
        weights=weights or Weights(),
        forced_overlap_pairs=grouping.forced_overlap_pairs,
    )
    findings.extend(validate_instance(instance))
    if any(f.severity == "error" for f in findings):
        return None, findings
    return instance, findings


def load_instance_report(
    enrollments_file: str | Path,
    sections_file: str | Path,
    constraints_file: str | Path | None,
    grid_config: ExamPeriodConfig | str | Path,
    coordinated_file: str | Path | None = None,
    weights: Weights | None = None,
) -> tuple[Instance | None, list[Finding], GroupingResult | None]:
    """Full load pipeline returning (instance, findings, grouping)."""
    findings: list[Finding] = []
    enrollments, f1 = read_enrollments(enrollments_file)
    sections, f2 = read_sections(sections_file)
    findings += f1 + f2
    if constraints_file is not None:
        constraints, f3 = read_constraints(constraints_file)
        findings += f3
    else:
        constraints = ConstraintSpec()
    coordinated = read_coordinated(coordinated_file) if coordinated_file is not None else []
    if any(f.severity == "error" for f in findings):
        return None, findings, None

    if isinstance(grid_config, ExamPeriodConfig):
        config = grid_config
    else:
        from .timegrid import load_grid_config

        config = load_grid_config(grid_config)
    grid = build_grid(config)

    try:
        grouping = build_groups(sections, enrollments, coordinated)
    except GroupingError as exc:
        findings.append(_err(exc.code, str(exc)))
        return None, findings, None

    instance, f4 = build_instance(grouping, sections, enrollments, grid, constraints, weights)
    findings += f4
    return instance, findings, grouping


def load_instance(
    enrollments_file: str | Path,
    sections_file: str | Path,
    constraints_file: str | Path | None,
    grid_config: ExamPeriodConfig | str | Path,
    coordinated_file: str | Path | None = None,
    weights: Weights | None = None,
) -> Instance:
    instance, findings, _ = load_instance_report(
        enrollments_file, sections_file, constraints_file, grid_config, coordinated_file, weights
    )
    if instance is None:
        raise IngestError([f for f in findings if f.severity == "error"])
    return instance


# --- validation -----------------------------------------------------------


def validate_instance(instance: Instance) -> list[Finding]:
    """Machine-checkable findings; an empty error list means the instance
    satisfies every structural invariant and obvious feasibility guard."""
    findings: list[Finding] = []
    n_g = instance.n_g

    both = instance.r & instance.q
    for gid, t in zip(*np.nonzero(both)):
        findings.append(
            _err(
                "pin-block-conflict",
                f"group {instance.groups[gid].label!r} is both required and forbidden at slot {int(t)}",
            )
        )

    for gid in range(instance.num_groups):
        pins = np.nonzero(instance.r[gid])[0]
        if len(pins) > 1:
            findings.append(
                _err("multiple-pins", f"group {instance.groups[gid].label!r} pinned to {len(pins)} slots")
            )
        for t in pins:
            if not instance.a[t]:
                findings.append(
                    _err(
                        "pin-unavailable",
                        f"group {instance.groups[gid].label!r} pinned to unavailable slot {int(t)}",
                    )
                )

    if not instance.a.any():
        findings.append(_err("no-available-slots", "every slot is marked unavailable"))

    if instance.num_groups and instance.m1 < int(n_g.max()):
        gid = int(n_g.argmax())
        findings.append(
            _err(
                "capacity-infeasible",
                f"seat cap {instance.m1} is below group {instance.groups[gid].label!r} "
                f"enrollment {int(n_g.max())} (per-slot cap cannot hold)",
            )
        )

    # students forced into >2 exams in one slot by pins: the 2-per-slot cap
    # would be violated by any completion
    pinned = [(gid, int(np.nonzero(instance.r[gid])[0][0])) for gid in range(instance.num_groups) if instance.r[gid].any()]
    if pinned:
        by_slot: dict[int, list[int]] = {}
        for gid, t in pinned:
            by_slot.setdefault(t, []).append(gid)
        for t, gids in by_slot.items():
            if len(gids) < 3:
                continue
            count = instance.b[:, gids].sum(axis=1)
            bad = np.nonzero(count > 2)[0]
            for s in bad:
                findings.append(
                    _err(
                        "overlap-cap-infeasible",
                        f"student {instance.students[s]!r} is pinned into {int(count[s])} exams at slot {t} "
                        "(at most two exams may share a slot)",
                    )
                )
            if instance.num_faculty:
                fcount = instance.d[:, gids].sum(axis=1)
                for f in np.nonzero(fcount > 2)[0]:
                    findings.append(
                        _err(
                            "fac-overlap-cap-infeasible",
                            f"faculty {instance.faculty[f]!r} is pinned into {int(fcount[f])} exams at slot {t}",
                        )
                    )
            if n_g[gids].sum() > instance.m1:
                findings.append(
                    _err(
                        "capacity-infeasible",
                        f"groups pinned to slot {t} enroll {int(n_g[gids].sum())} students, above the cap {instance.m1}",
                    )
                )

    for g in instance.groups:
        if not instance.b[:, g.id].any():
            findings.append(_warn("empty-group", f"group {g.label!r} has no enrolled students"))
        if instance.a.any() and not (instance.a & ~instance.q[g.id]).any():
            findings.append(
                _err("fully-blocked-group", f"group {g.label!r} has no available unblocked slot")
            )

    return findings
