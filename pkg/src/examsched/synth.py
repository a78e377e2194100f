"""Synthetic instances: desk-scale randoms for oracle tests, a deterministic
tiny fixture, and a seeded generator at realistic term scale (about 4,000
students across some 70 course groups and 550 courses on the 22-slot
default grid).  Distribution choices in the big generator are editorial;
only those headline scale targets are externally meaningful.
"""

from __future__ import annotations

import numpy as np

from .evaluate import Schedule
from .grouping import CourseGroup
from .ingest import Instance, Weights
from .timegrid import DaySpec, ExamPeriodConfig, build_grid, pattern_sets


def _instance_from_incidence(
    grid,
    b: np.ndarray,
    d: np.ndarray,
    group_labels: list[str],
    group_sections: list[tuple[str, ...]],
    group_kinds: list[str],
    weights: Weights,
    m1: int | None = None,
    pins: dict[int, int] | None = None,
    blocks: list[tuple[int, int]] | None = None,
    unavailable: list[int] | None = None,
) -> Instance:
    n_students, n_groups = b.shape
    students = tuple(f"s{i:04d}" for i in range(n_students))
    faculty = tuple(f"f{i:03d}" for i in range(d.shape[0]))
    groups = tuple(
        CourseGroup(
            id=g,
            label=group_labels[g],
            kind=group_kinds[g],
            section_ids=group_sections[g],
            n_students=int(b[:, g].sum()),
        )
        for g in range(n_groups)
    )
    n_t = len(grid.slots)
    a = np.ones(n_t, dtype=bool)
    for t in unavailable or []:
        a[t] = False
    r = np.zeros((n_groups, n_t), dtype=bool)
    for g, t in (pins or {}).items():
        r[g, t] = True
    q = np.zeros((n_groups, n_t), dtype=bool)
    for g, t in blocks or []:
        q[g, t] = True
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
        m1=m1 if m1 is not None else max(1, n_students),
        weights=weights,
    )


def _random_small_grid(rng: np.random.Generator, max_slots: int):
    """A 1-2 day grid with 2..max_slots three-hour slots."""
    while True:
        n_days = int(rng.integers(1, 3))
        n_daytime = int(rng.integers(1, 4))
        nights = [bool(rng.integers(0, 2)) for _ in range(n_days)]
        total = n_days * n_daytime + sum(nights)
        if 2 <= total <= max_slots:
            break
    times = [("08:00", "11:00"), ("11:30", "14:30"), ("15:00", "18:00")][:n_daytime]
    config = ExamPeriodConfig(
        days=tuple(DaySpec(f"D{i}", nights[i]) for i in range(n_days)),
        daytime_slot_times=tuple(
            (int(a[:2]) * 60 + int(a[3:]), int(b[:2]) * 60 + int(b[3:])) for a, b in times
        ),
        night_slot_time=(19 * 60, 22 * 60),
    )
    return build_grid(config)


def tiny_instance(
    seed: int,
    max_groups: int = 6,
    max_slots: int = 5,
    max_students: int = 12,
    max_faculty: int = 2,
    allow_pins: bool = True,
) -> Instance:
    """Random desk-scale instance safe for exhaustive enumeration.

    Always hard-feasible: the seat cap never binds, every group keeps at
    least one open slot, at most two pins land on any one slot, and
    faculty teach at most two groups.  Weights are integer-valued so all
    objective arithmetic is exact.
    """
    rng = np.random.default_rng(seed)
    grid = _random_small_grid(rng, max_slots)
    n_t = len(grid.slots)
    n_groups = int(rng.integers(2, max_groups + 1))
    n_students = int(rng.integers(4, max_students + 1))
    n_faculty = int(rng.integers(0, max_faculty + 1))

    b = np.zeros((n_students, n_groups), dtype=bool)
    for s in range(n_students):
        k = int(rng.integers(1, min(3, n_groups) + 1))
        b[s, rng.choice(n_groups, size=k, replace=False)] = True
    for g in range(n_groups):
        if not b[:, g].any():
            b[int(rng.integers(0, n_students)), g] = True

    d = np.zeros((n_faculty, n_groups), dtype=bool)
    for f in range(n_faculty):
        k = int(rng.integers(1, min(2, n_groups) + 1))
        d[f, rng.choice(n_groups, size=k, replace=False)] = True

    pins: dict[int, int] = {}
    blocks: list[tuple[int, int]] = []
    if allow_pins and rng.random() < 0.4:
        pins[int(rng.integers(0, n_groups))] = int(rng.integers(0, n_t))
    if rng.random() < 0.4:
        g = int(rng.integers(0, n_groups))
        t = int(rng.integers(0, n_t))
        if pins.get(g) != t:
            blocks.append((g, t))

    weights = Weights(
        overlap=float(rng.integers(5, 101)),
        b2b=float(rng.integers(0, 21)),
        pm_to_am=float(rng.integers(0, 21)),
        three_in_24=float(rng.integers(0, 41)),
        four_in_48=float(rng.integers(0, 31)),
        fac_overlap=float(rng.integers(0, 31)),
        fac_b2b=float(rng.integers(0, 11)),
    )
    return _instance_from_incidence(
        grid,
        b,
        d,
        group_labels=[f"G{g:02d}" for g in range(n_groups)],
        group_sections=[(f"C{g:02d}/01",) for g in range(n_groups)],
        group_kinds=["meeting-time"] * n_groups,
        weights=weights,
        m1=int(b.sum()),  # truly non-binding even on 2-slot grids
        pins=pins,
        blocks=blocks,
    )


def tiny_fixture() -> Instance:
    """The bundled deterministic desk instance: 2 days x 4 slots, five
    groups, ten students, two faculty."""
    config = ExamPeriodConfig(
        days=(DaySpec("Mon", True), DaySpec("Tue", False)),
        daytime_slot_times=((8 * 60, 11 * 60), (11 * 60 + 30, 14 * 60 + 30), (15 * 60, 18 * 60)),
        night_slot_time=(19 * 60, 22 * 60),
    )
    grid = build_grid(config)
    n_groups, n_students = 5, 10
    b = np.zeros((n_students, n_groups), dtype=bool)
    enrollment = [
        (0, 1), (0, 2),
        (1, 0), (1, 2), (1, 3),
        (2, 0), (2, 1),
        (3, 3), (3, 4),
        (4, 0), (4, 4),
        (5, 1), (5, 3),
        (6, 2), (6, 4),
        (7, 0),
        (8, 1), (8, 4),
        (9, 2), (9, 3),
    ]
    for s, g in enrollment:
        b[s, g] = True
    d = np.zeros((2, n_groups), dtype=bool)
    d[0, 0] = d[0, 3] = True
    d[1, 1] = d[1, 4] = True
    return _instance_from_incidence(
        grid,
        b,
        d,
        group_labels=[f"G{g:02d}" for g in range(n_groups)],
        group_sections=[(f"C{g:02d}/01",) for g in range(n_groups)],
        group_kinds=["coordinated", "meeting-time", "meeting-time", "meeting-time", "meeting-time"],
        weights=Weights(overlap=100, b2b=10, pm_to_am=8, three_in_24=30, four_in_48=20, fac_overlap=25, fac_b2b=5),
        m1=int(b.sum()),
    )


def term_scale_instance(
    seed: int = 0,
    n_students: int = 4000,
    n_groups: int = 70,
    n_coordinated: int = 20,
) -> Instance:
    """Seeded term-scale instance on the default 22-slot grid.

    Enrollment: each student sits 3-6 exams, drawn over groups with a
    popularity skew so coordinated groups run large.  Courses: coordinated
    groups hold one multi-section course each; meeting-time groups hold
    several single-section courses (about 550 courses overall).  Faculty
    teach at most two groups, so any phase-1 placement stays completable.
    """
    rng = np.random.default_rng(seed)
    grid = build_grid(ExamPeriodConfig.standard(6))

    popularity = np.empty(n_groups)
    popularity[:n_coordinated] = rng.uniform(2.0, 6.0, n_coordinated)
    popularity[n_coordinated:] = rng.uniform(0.3, 2.0, n_groups - n_coordinated)
    popularity /= popularity.sum()

    b = np.zeros((n_students, n_groups), dtype=bool)
    exam_counts = rng.integers(3, 7, size=n_students)
    for s in range(n_students):
        chosen = rng.choice(n_groups, size=int(exam_counts[s]), replace=False, p=popularity)
        b[s, chosen] = True
    for g in range(n_groups):
        if not b[:, g].any():
            b[int(rng.integers(0, n_students)), g] = True

    labels, sections, kinds = [], [], []
    for g in range(n_groups):
        if g < n_coordinated:
            labels.append(f"COORD{g:02d}")
            kinds.append("coordinated")
            n_sec = int(rng.integers(3, 11))
            sections.append(tuple(f"COORD{g:02d}/{i + 1:02d}" for i in range(n_sec)))
        else:
            labels.append(f"MT{g - n_coordinated:02d}")
            kinds.append("meeting-time")
            n_courses = int(rng.integers(6, 15))
            sections.append(tuple(f"MT{g - n_coordinated:02d}C{i:02d}/01" for i in range(n_courses)))

    n_faculty = 450
    d = np.zeros((n_faculty, n_groups), dtype=bool)
    for f in range(n_faculty):
        k = int(rng.integers(1, 3))
        d[f, rng.choice(n_groups, size=k, replace=False)] = True

    return _instance_from_incidence(
        grid,
        b,
        d,
        group_labels=labels,
        group_sections=sections,
        group_kinds=kinds,
        weights=Weights(overlap=100, b2b=10, pm_to_am=8, three_in_24=30, four_in_48=20, fac_overlap=25, fac_b2b=5),
    )


def _placement_allowed(instance: Instance, counts, fcounts, seats, g: int, t: int) -> bool:
    if not instance.a[t] or instance.q[g, t]:
        return False
    pins = np.nonzero(instance.r[g])[0]
    if pins.size and t != int(pins[0]):
        return False
    if seats[t] + instance.groups[g].n_students > instance.m1:
        return False
    if (counts[instance.b[:, g], t] >= 2).any():
        return False
    if instance.num_faculty and (fcounts[instance.d[:, g], t] >= 2).any():
        return False
    return True


def _commit(instance: Instance, counts, fcounts, seats, g: int, t: int) -> None:
    counts[instance.b[:, g], t] += 1
    if instance.num_faculty:
        fcounts[instance.d[:, g], t] += 1
    seats[t] += instance.groups[g].n_students


def greedy_baseline(instance: Instance) -> Schedule:
    """Meeting-time-style naive schedule: groups in label order dealt
    round-robin across available slots, skipping hard-infeasible spots.
    The optimizer is expected to beat this."""
    n_t = instance.num_slots
    counts = np.zeros((instance.num_students, n_t), dtype=np.int32)
    fcounts = np.zeros((instance.num_faculty, n_t), dtype=np.int32)
    seats = np.zeros(n_t, dtype=np.int64)
    assignment: dict[int, int] = {}
    order = sorted(range(instance.num_groups), key=lambda g: instance.groups[g].label)

    pointer = 0
    for g in order:
        pins = np.nonzero(instance.r[g])[0]
        if pins.size:
            t = int(pins[0])
            if not _placement_allowed(instance, counts, fcounts, seats, g, t):
                raise ValueError(f"baseline cannot honor pin of group {g}")
            assignment[g] = t
            _commit(instance, counts, fcounts, seats, g, t)
            continue
        placed = False
        for probe in range(n_t):
            t = (pointer + probe) % n_t
            if _placement_allowed(instance, counts, fcounts, seats, g, t):
                assignment[g] = t
                _commit(instance, counts, fcounts, seats, g, t)
                pointer = (t + 1) % n_t
                placed = True
                break
        if not placed:
            raise ValueError(f"baseline found no feasible slot for group {g}")
    return Schedule(assignment)


def random_feasible_schedule(instance: Instance, rng: np.random.Generator, max_tries: int = 200) -> Schedule:
    """Uniform-ish random hard-feasible schedule for consistency tests."""
    n_t = instance.num_slots
    for _ in range(max_tries):
        counts = np.zeros((instance.num_students, n_t), dtype=np.int32)
        fcounts = np.zeros((instance.num_faculty, n_t), dtype=np.int32)
        seats = np.zeros(n_t, dtype=np.int64)
        assignment: dict[int, int] = {}
        ok = True
        for g in rng.permutation(instance.num_groups):
            g = int(g)
            slots = [t for t in rng.permutation(n_t) if _placement_allowed(instance, counts, fcounts, seats, g, int(t))]
            if not slots:
                ok = False
                break
            t = int(slots[0])
            assignment[g] = t
            _commit(instance, counts, fcounts, seats, g, t)
        if ok:
            return Schedule(assignment)
    raise ValueError("could not sample a feasible schedule")
