"""HTTP API for the full scheduling workflow.

State is an in-memory workspace: uploaded instances (with their raw data,
so grouping edits and constraint changes re-derive the instance and bump
its revision), named schedules pinned to the revision they were built
against, and background portfolio jobs on a bounded executor.  Moves on
one schedule are serialized behind a per-schedule lock; metric deltas are
always the difference of two full evaluations.
"""

from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

import numpy as np

from .evaluate import (
    InconvenienceReport,
    Schedule,
    evaluate_schedule,
    hard_violations,
    matrix_csv,
    overlap_matrix,
    report_csv,
    schedule_csv,
)
from .grouping import GroupingError, GroupingResult, Section, apply_group_edits, build_groups
from .heuristic import TwoPhaseConfig
from .ingest import (
    ConstraintSpec,
    Finding,
    Instance,
    Weights,
    build_instance,
    read_constraints,
    read_coordinated,
    read_enrollments,
    read_sections,
    validate_instance,
)
from .portfolio import (
    PortfolioResult,
    WeightSetCatalog,
    default_catalog,
    portfolio_manifest_doc,
    run_portfolio,
)
from .timegrid import ExamPeriodConfig, build_grid
from .whatif import whatif_days

MAX_SOLVER_JOBS = 4


class InstanceUpload(BaseModel):
    enrollments: str
    sections: str
    constraints: str | None = None
    coordinated: str | None = None
    grid_config: dict | None = None
    weights: dict | None = None


class GroupEditsBody(BaseModel):
    edits: list[tuple[str, str]]


class ConstraintsBody(BaseModel):
    pins: dict[str, int | str] = {}
    blocks: dict[str, list[int | str]] = {}
    unavailable_slots: list[int | str] = []
    m1: int | None = None


class PortfolioBody(BaseModel):
    k_range: list[int] | None = None
    seed: int = 0
    max_parallel: int = MAX_SOLVER_JOBS
    serial: bool = False
    catalog: dict | None = None
    phase1_initial_limit: float = 20.0
    phase1_extension: float = 10.0
    phase1_hard_cap: float = 60.0
    phase2_limit: float = 30.0


class ScheduleCreate(BaseModel):
    assignment: dict[str, int]
    name: str | None = None


class MoveBody(BaseModel):
    group: str
    target_slot: int | str


class WhatIfBody(BaseModel):
    day_delta: int
    phase1_initial_limit: float = 20.0
    phase1_extension: float = 10.0
    phase1_hard_cap: float = 60.0
    phase2_limit: float = 30.0
    k_fixed: int = 19


@dataclass
class InstanceEntry:
    id: str
    instance: Instance
    revision: int
    sections: list[Section]
    enrollments: list[tuple[str, str, str]]
    coordinated: list[str]
    constraints: ConstraintSpec
    grouping: GroupingResult
    findings: list[Finding]
    weights: Weights
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class ScheduleEntry:
    id: str
    instance_id: str
    revision: int
    name: str
    schedule: Schedule
    report: InconvenienceReport
    history: list[tuple[int, int, int]] = field(default_factory=list)  # (group, prev, new)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class JobEntry:
    id: str
    status: str  # pending | running | done | failed
    result: dict | None = None
    error: str | None = None


class Workspace:
    def __init__(self) -> None:
        self.instances: dict[str, InstanceEntry] = {}
        self.schedules: dict[str, ScheduleEntry] = {}
        self.jobs: dict[str, JobEntry] = {}
        self.executor = ThreadPoolExecutor(max_workers=MAX_SOLVER_JOBS)
        self._counter = itertools.count(1)
        self.lock = threading.Lock()

    def next_id(self, prefix: str) -> str:
        with self.lock:
            return f"{prefix}{next(self._counter)}"


def _finding_doc(f: Finding) -> dict:
    return {"code": f.code, "severity": f.severity, "message": f.message}


def _grid_doc(instance: Instance) -> dict:
    grid = instance.grid
    return {
        "days": [{"index": i, "label": d.label, "has_night": d.has_night} for i, d in enumerate(grid.config.days)],
        "slots": [
            {
                "id": s.id,
                "day": s.day_index,
                "seq": s.seq_in_day,
                "label": grid.slot_name(s.id),
                "night": s.is_night,
                "available": bool(instance.a[s.id]),
            }
            for s in grid.slots
        ],
    }


def _grouping_doc(entry: InstanceEntry) -> dict:
    g = entry.grouping
    pinned = {
        entry.instance.groups[gid].label: int(np.nonzero(entry.instance.r[gid])[0][0])
        for gid in range(entry.instance.num_groups)
        if entry.instance.r[gid].any()
    }
    blocked = {
        entry.instance.groups[gid].label: [int(t) for t in np.nonzero(entry.instance.q[gid])[0]]
        for gid in range(entry.instance.num_groups)
        if entry.instance.q[gid].any()
    }
    return {
        "revision": entry.revision,
        "groups": [
            {
                "id": grp.id,
                "label": grp.label,
                "kind": grp.kind,
                "sections": list(grp.section_ids),
                "n_students": grp.n_students,
                "pinned_slot": pinned.get(grp.label),
                "blocked_slots": blocked.get(grp.label, []),
            }
            for grp in g.groups
        ],
        "ambiguous_sections": [
            {"section": key, "candidates": list(cands)} for key, cands in g.ambiguous_sections
        ],
        "forced_overlap_pairs": [list(p) for p in g.forced_overlap_pairs],
    }


def _schedule_doc(entry: ScheduleEntry, instance: Instance, stale: bool) -> dict:
    return {
        "schedule_id": entry.id,
        "name": entry.name,
        "instance_id": entry.instance_id,
        "revision": entry.revision,
        "stale": stale,
        "assignment": {instance.groups[g].label: int(t) for g, t in sorted(entry.schedule.assignment.items())},
        "report": entry.report.to_doc(),
        "undo_depth": len(entry.history),
    }


def create_app() -> FastAPI:
    app = FastAPI(title="examsched service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    ws = Workspace()
    app.state.workspace = ws

    def get_instance(instance_id: str) -> InstanceEntry:
        entry = ws.instances.get(instance_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no instance {instance_id}")
        return entry

    def get_schedule(schedule_id: str) -> ScheduleEntry:
        entry = ws.schedules.get(schedule_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no schedule {schedule_id}")
        return entry

    def rebuild(entry: InstanceEntry) -> list[Finding]:
        """Re-derive the Instance from raw parts after an edit; bump the
        revision only when the rebuild succeeds."""
        instance, findings = build_instance(
            entry.grouping,
            entry.sections,
            entry.enrollments,
            entry.instance.grid,
            entry.constraints,
            entry.weights,
        )
        if instance is None:
            raise HTTPException(
                status_code=422,
                detail={"errors": [_finding_doc(f) for f in findings if f.severity == "error"]},
            )
        entry.instance = instance
        entry.revision += 1
        entry.findings = findings
        return findings

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/instances")
    def upload_instance(body: InstanceUpload) -> dict:
        enrollments, f1 = read_enrollments(body.enrollments)
        sections, f2 = read_sections(body.sections)
        findings = f1 + f2
        constraints = ConstraintSpec()
        if body.constraints:
            constraints, f3 = read_constraints(body.constraints)
            findings += f3
        coordinated = read_coordinated(body.coordinated) if body.coordinated else []
        errors = [f for f in findings if f.severity == "error"]
        if errors:
            raise HTTPException(status_code=422, detail={"errors": [_finding_doc(f) for f in errors]})
        config = (
            ExamPeriodConfig.from_doc(body.grid_config) if body.grid_config else ExamPeriodConfig.standard(6)
        )
        grid = build_grid(config)
        weights = Weights.from_doc(body.weights) if body.weights else Weights()
        try:
            grouping = build_groups(sections, enrollments, coordinated)
        except GroupingError as exc:
            raise HTTPException(status_code=422, detail={"errors": [{"code": exc.code, "message": str(exc)}]})
        instance, f4 = build_instance(grouping, sections, enrollments, grid, constraints, weights)
        findings += f4
        if instance is None:
            raise HTTPException(
                status_code=422,
                detail={"errors": [_finding_doc(f) for f in findings if f.severity == "error"]},
            )
        entry = InstanceEntry(
            id=ws.next_id("inst"),
            instance=instance,
            revision=1,
            sections=sections,
            enrollments=enrollments,
            coordinated=coordinated,
            constraints=constraints,
            grouping=grouping,
            findings=findings,
            weights=weights,
        )
        ws.instances[entry.id] = entry
        return {
            "instance_id": entry.id,
            "revision": entry.revision,
            "findings": [_finding_doc(f) for f in findings],
            "summary": _summary(entry),
        }

    def _summary(entry: InstanceEntry) -> dict:
        inst = entry.instance
        return {
            "students": inst.num_students,
            "faculty": inst.num_faculty,
            "groups": inst.num_groups,
            "slots": inst.num_slots,
            "m1": inst.m1,
            "weights": inst.weights.to_doc(),
            "digest": inst.digest(),
        }

    @app.get("/instances/{instance_id}")
    def instance_summary(instance_id: str) -> dict:
        entry = get_instance(instance_id)
        return {
            "instance_id": entry.id,
            "revision": entry.revision,
            "summary": _summary(entry),
            "grid": _grid_doc(entry.instance),
        }

    @app.get("/instances/{instance_id}/validation")
    def instance_validation(instance_id: str) -> dict:
        entry = get_instance(instance_id)
        findings = validate_instance(entry.instance)
        return {
            "revision": entry.revision,
            "findings": [_finding_doc(f) for f in findings],
            "ok": not any(f.severity == "error" for f in findings),
        }

    @app.get("/instances/{instance_id}/groups")
    def get_groups(instance_id: str) -> dict:
        return _grouping_doc(get_instance(instance_id))

    @app.put("/instances/{instance_id}/groups")
    def put_groups(instance_id: str, body: GroupEditsBody) -> dict:
        entry = get_instance(instance_id)
        with entry.lock:
            try:
                entry.grouping = apply_group_edits(
                    entry.grouping, body.edits, entry.sections, entry.enrollments
                )
            except GroupingError as exc:
                raise HTTPException(status_code=422, detail={"code": exc.code, "message": str(exc)})
            rebuild(entry)
            return _grouping_doc(entry)

    @app.get("/instances/{instance_id}/overlap-matrix")
    def get_overlap_matrix(instance_id: str, historical: str | None = Query(default=None)) -> dict:
        entry = get_instance(instance_id)
        hist = ws.instances.get(historical).instance if historical and historical in ws.instances else None
        if historical and hist is None:
            raise HTTPException(status_code=404, detail=f"no instance {historical}")
        return overlap_matrix(entry.instance, hist).to_doc()

    @app.put("/instances/{instance_id}/constraints")
    def put_constraints(instance_id: str, body: ConstraintsBody) -> dict:
        entry = get_instance(instance_id)
        with entry.lock:
            entry.constraints = ConstraintSpec(
                pins=tuple((label, str(ref)) for label, ref in body.pins.items()),
                blocks=tuple((label, str(ref)) for label, refs in body.blocks.items() for ref in refs),
                unavailable_slots=tuple(str(ref) for ref in body.unavailable_slots),
                m1=body.m1,
            )
            findings = rebuild(entry)
            return {
                "revision": entry.revision,
                "findings": [_finding_doc(f) for f in findings],
            }

    def register_schedule(entry: InstanceEntry, schedule: Schedule, name: str) -> ScheduleEntry:
        sched = ScheduleEntry(
            id=ws.next_id("sched"),
            instance_id=entry.id,
            revision=entry.revision,
            name=name,
            schedule=schedule,
            report=evaluate_schedule(entry.instance, schedule),
        )
        ws.schedules[sched.id] = sched
        return sched

    @app.post("/instances/{instance_id}/portfolio")
    def start_portfolio(instance_id: str, body: PortfolioBody) -> dict:
        entry = get_instance(instance_id)
        job = JobEntry(id=ws.next_id("job"), status="pending")
        ws.jobs[job.id] = job
        catalog = WeightSetCatalog.from_doc(body.catalog) if body.catalog else default_catalog()
        k_range = tuple(body.k_range) if body.k_range else (17, 18, 19, 20, 21)
        cfg = TwoPhaseConfig(
            phase1_initial_limit=body.phase1_initial_limit,
            phase1_extension=body.phase1_extension,
            phase1_hard_cap=body.phase1_hard_cap,
            phase2_limit=body.phase2_limit,
        )

        def work() -> None:
            job.status = "running"
            try:
                result: PortfolioResult = run_portfolio(
                    entry.instance,
                    catalog,
                    k_range,
                    max_parallel=1,  # the job itself occupies one executor worker
                    seed=body.seed,
                    base_config=cfg,
                    serial=True,
                )
                manifest = portfolio_manifest_doc(result, entry.instance)
                schedule_ids = {}
                for name, best in sorted(result.best.items()):
                    sched = register_schedule(entry, best.schedule, f"best_{name}")
                    schedule_ids[name] = sched.id
                job.result = {"manifest": manifest, "schedules": schedule_ids}
                job.status = "done"
            except Exception as exc:  # noqa: BLE001 - job errors surface via polling
                job.status = "failed"
                job.error = str(exc)

        ws.executor.submit(work)
        return {"job_id": job.id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str) -> dict:
        job = ws.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return {"job_id": job.id, "status": job.status, "result": job.result, "error": job.error}

    @app.post("/instances/{instance_id}/schedules")
    def create_schedule(instance_id: str, body: ScheduleCreate) -> dict:
        entry = get_instance(instance_id)
        label_to_id = {g.label: g.id for g in entry.instance.groups}
        try:
            schedule = Schedule({label_to_id[label]: int(t) for label, t in body.assignment.items()})
        except KeyError as exc:
            raise HTTPException(status_code=422, detail=f"unknown group {exc.args[0]!r}")
        problems = hard_violations(entry.instance, schedule)
        if problems:
            raise HTTPException(status_code=422, detail={"hard_violations": problems})
        sched = register_schedule(entry, schedule, body.name or "manual")
        return _schedule_doc(sched, entry.instance, stale=False)

    def _stale(entry: ScheduleEntry) -> bool:
        return ws.instances[entry.instance_id].revision != entry.revision

    @app.get("/schedules/{schedule_id}")
    def get_schedule_doc(schedule_id: str) -> dict:
        entry = get_schedule(schedule_id)
        instance = ws.instances[entry.instance_id].instance
        with entry.lock:  # schedule and report swap together under the lock
            return _schedule_doc(entry, instance, _stale(entry))

    @app.post("/schedules/{schedule_id}/moves")
    def apply_move(schedule_id: str, body: MoveBody) -> dict:
        entry = get_schedule(schedule_id)
        inst_entry = ws.instances[entry.instance_id]
        instance = inst_entry.instance
        if _stale(entry):
            raise HTTPException(status_code=409, detail={"rule": "stale-revision"})
        try:
            group = instance.group_by_label(body.group)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown group {body.group!r}")
        try:
            target = instance.grid.resolve_slot_ref(body.target_slot)
        except KeyError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if not instance.a[target]:
            raise HTTPException(status_code=409, detail={"rule": "slot-unavailable", "slot": target})
        if instance.q[group.id, target]:
            raise HTTPException(
                status_code=409,
                detail={"rule": "blocked", "group": group.label, "slot": target},
            )
        pins = np.nonzero(instance.r[group.id])[0]
        if pins.size and target != int(pins[0]):
            raise HTTPException(
                status_code=409,
                detail={"rule": "pinned", "group": group.label, "slot": int(pins[0])},
            )
        with entry.lock:
            previous_report = entry.report
            prev_slot = entry.schedule.slot_of(group.id)
            entry.schedule = entry.schedule.moved(group.id, target)
            entry.report = evaluate_schedule(instance, entry.schedule)
            entry.history.append((group.id, prev_slot, target))
            return {
                **_schedule_doc(entry, instance, stale=False),
                "delta": entry.report.delta(previous_report),
            }

    @app.post("/schedules/{schedule_id}/undo")
    def undo_move(schedule_id: str) -> dict:
        entry = get_schedule(schedule_id)
        instance = ws.instances[entry.instance_id].instance
        with entry.lock:
            if not entry.history:
                raise HTTPException(status_code=409, detail={"rule": "nothing-to-undo"})
            group_id, prev_slot, _ = entry.history.pop()
            previous_report = entry.report
            entry.schedule = entry.schedule.moved(group_id, prev_slot)
            entry.report = evaluate_schedule(instance, entry.schedule)
            return {
                **_schedule_doc(entry, instance, _stale(entry)),
                "delta": entry.report.delta(previous_report),
            }

    @app.post("/instances/{instance_id}/whatif")
    def whatif(instance_id: str, body: WhatIfBody) -> dict:
        entry = get_instance(instance_id)
        if len(entry.instance.grid.config.days) + body.day_delta < 1:
            raise HTTPException(status_code=422, detail="resulting period would have no days")
        cfg = TwoPhaseConfig(
            k_fixed=body.k_fixed,
            phase1_initial_limit=body.phase1_initial_limit,
            phase1_extension=body.phase1_extension,
            phase1_hard_cap=body.phase1_hard_cap,
            phase2_limit=body.phase2_limit,
        )
        try:
            result = whatif_days(entry.instance, body.day_delta, config=cfg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return result.to_doc()

    @app.get("/schedules/{schedule_id}/export")
    def export_schedule(schedule_id: str, format: str = Query(default="json")) -> dict:
        entry = get_schedule(schedule_id)
        instance = ws.instances[entry.instance_id].instance
        if format == "csv":
            return {
                "schedule_csv": schedule_csv(instance, entry.schedule),
                "report_csv": report_csv(entry.report),
            }
        if format == "json":
            return {
                "schedule": entry.schedule.to_doc(instance),
                "report": entry.report.to_doc(),
            }
        raise HTTPException(status_code=422, detail=f"unknown format {format!r}")

    @app.get("/instances/{instance_id}/overlap-matrix.csv")
    def get_overlap_matrix_csv(instance_id: str, historical: str | None = Query(default=None)) -> dict:
        entry = get_instance(instance_id)
        hist = ws.instances.get(historical).instance if historical and historical in ws.instances else None
        return {"matrix_csv": matrix_csv(overlap_matrix(entry.instance, hist))}

    return app


app = create_app()
