"""Solving the assignment program.

Three backends behind one contract:

* ``builtin`` — exact depth-first branch and bound specialized to the
  program's structure: it branches on group placements (largest enrollment
  first), keeps incremental penalty state, and prunes with the partial
  objective, which is a valid lower bound because every penalty is
  monotone in the set of placed groups.
* ``scipy`` — hands the assembled matrix to scipy.optimize.milp (HiGHS).
* ``external`` — writes MPS text and shells out to a solver binary named
  by the EXAMSCHED_SOLVER_BIN environment variable.

``brute_force_optimal`` is the desk-scale oracle: plain enumeration of all
assignments, scored by the evaluator, ties broken lexicographically.
"""

from __future__ import annotations

import itertools
import math
import os
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .evaluate import Schedule, evaluate_schedule, hard_violations
from .ingest import Instance, Weights
from .model import MilpModel, PHASE_FULL, build_full_model, write_model_file

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE_LIMIT = "feasible-limit"
STATUS_INFEASIBLE = "infeasible"
STATUS_ERROR = "error"


@dataclass
class SolveLimits:
    time_limit: float = 600.0
    gap_tolerance: float = 0.0
    incumbent_callback: Callable[[float, float], None] | None = None
    deterministic_seed: int = 0
    # builtin backend: push the deadline out after each new incumbent
    extend_on_incumbent: float | None = None
    hard_cap: float | None = None

    def __post_init__(self) -> None:
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.gap_tolerance < 0:
            raise ValueError("gap_tolerance must be non-negative")


@dataclass
class SolveOutcome:
    status: str
    best_assignment: Schedule | None
    objective: float | None
    bound: float | None
    runtime: float
    incumbent_log: list[tuple[float, float]] = field(default_factory=list)
    message: str = ""


class _Timeout(Exception):
    pass


class _Record:
    __slots__ = ("gpos", "slot", "newly", "flip3", "flip4", "fnew", "fov_flips", "fb_flips", "d7")

    def __init__(self, gpos, slot, newly, flip3, flip4, fnew, fov_flips, fb_flips, d7):
        self.gpos = gpos
        self.slot = slot
        self.newly = newly
        self.flip3 = flip3
        self.flip4 = flip4
        self.fnew = fnew
        self.fov_flips = fov_flips
        self.fb_flips = fb_flips
        self.d7 = d7


_EMPTY = np.zeros(0, dtype=np.int64)


class _BranchAndBound:
    """Exact search over group placements with incremental penalty state."""

    def __init__(self, model: MilpModel, limits: SolveLimits):
        inst = model.instance
        self.model = model
        self.limits = limits
        self.T = inst.num_slots
        self.full = model.phase == PHASE_FULL
        mg = np.array(model.group_ids, dtype=np.int64)
        self.mg = mg
        self.Gm = len(mg)
        self.n_g = inst.n_g[mg] if self.Gm else _EMPTY
        self.m1 = inst.m1

        B = inst.b[:, mg] if self.Gm else np.zeros((inst.num_students, 0), dtype=bool)
        D = inst.d[:, mg] if self.Gm else np.zeros((inst.num_faculty, 0), dtype=bool)
        self.students_of = [np.nonzero(B[:, j])[0] for j in range(self.Gm)]
        self.fac_of = [np.nonzero(D[:, j])[0] for j in range(self.Gm)]
        S, F, T = B.shape[0], D.shape[0], self.T

        pat = inst.patterns
        self.P2 = np.zeros((T, T), dtype=np.int32)
        for t0, t1 in pat.b2b_pairs:
            self.P2[t0, t1] = self.P2[t1, t0] = 1
        self.PP = np.zeros((T, T), dtype=np.int32)
        for t0, t1 in pat.pm_to_am_pairs:
            self.PP[t0, t1] = self.PP[t1, t0] = 1
        self.partners2 = [np.nonzero(self.P2[t])[0] for t in range(T)]
        self.partnersp = [np.nonzero(self.PP[t])[0] for t in range(T)]

        # consecutive max-span intervals: M3[i, t] == slot t lies within
        # 24h of slot i's start; a 3-exam cluster exists iff some interval
        # holds >= 3 attended slots (same for 48h / 4 exams)
        starts = np.array([s.start for s in inst.grid.slots])
        ends = np.array([s.end for s in inst.grid.slots])
        self.M3 = ((starts[:, None] <= starts[None, :]) & (ends[None, :] <= starts[:, None] + 24 * 60)).astype(np.int8)
        self.M4 = ((starts[:, None] <= starts[None, :]) & (ends[None, :] <= starts[:, None] + 48 * 60)).astype(np.int8)

        self.count = np.zeros((S, T), dtype=np.int8)
        self.V = np.zeros((S, T), dtype=bool)
        self.cnt3 = np.zeros((S, T), dtype=np.int8)
        self.cnt4 = np.zeros((S, T), dtype=np.int8)
        self.z3 = np.zeros(S, dtype=bool)
        self.z4 = np.zeros(S, dtype=bool)
        self.fcount = np.zeros((F, T), dtype=np.int8)
        self.FV = np.zeros((F, T), dtype=bool)
        self.zfov = np.zeros(F, dtype=bool)
        self.zfb = np.zeros(F, dtype=bool)
        self.slot_seats = np.zeros(T, dtype=np.int64)
        self.counts7 = np.zeros(7, dtype=np.int64)

        w = model.weights
        if self.full:
            self.wv = np.array(w.as_tuple(), dtype=np.float64)
        else:
            self.wv = np.array([w.overlap, w.b2b, w.pm_to_am, 0.0, 0.0, 0.0, 0.0])

        self.pin_slot = np.full(self.Gm, -1, dtype=np.int64)
        for j in range(self.Gm):
            pins = np.nonzero(model.r_eff[mg[j]])[0]
            if pins.size:
                self.pin_slot[j] = int(pins[0])
        self.base_allowed = []
        for j in range(self.Gm):
            mask = inst.a & ~inst.q[mg[j]]
            if self.pin_slot[j] >= 0:
                pin_only = np.zeros(T, dtype=bool)
                pin_only[self.pin_slot[j]] = mask[self.pin_slot[j]]
                mask = pin_only
            self.base_allowed.append(mask)

        pinned = [j for j in range(self.Gm) if self.pin_slot[j] >= 0]
        free = [j for j in range(self.Gm) if self.pin_slot[j] < 0]
        free.sort(key=lambda j: (-int(self.n_g[j]), int(mg[j])))
        self.order = pinned + free

        self.best_obj = math.inf
        self.best: dict[int, int] | None = None
        self.assignment = np.full(self.Gm, -1, dtype=np.int64)
        self.incumbent_log: list[tuple[float, float]] = []
        self.nodes = 0

    def total(self) -> float:
        return float(self.counts7 @ self.wv)

    def deltas(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Weighted objective increase per candidate slot and the
        hard-feasibility mask, for placing group position j now."""
        T = self.T
        allowed = self.base_allowed[j] & (self.slot_seats + int(self.n_g[j]) <= self.m1)
        d7 = np.zeros((7, T), dtype=np.int64)
        S_g = self.students_of[j]
        if S_g.size:
            cnt = self.count[S_g]
            allowed = allowed & ~(cnt == 2).any(axis=0)
            flip = cnt == 0
            d7[0] = (cnt == 1).sum(axis=0)
            Vg = self.V[S_g].astype(np.int32)
            d7[1] = (flip * (Vg @ self.P2)).sum(axis=0)
            d7[2] = (flip * (Vg @ self.PP)).sum(axis=0)
            if self.full:
                act3 = (self.cnt3[S_g][:, :, None] + self.M3[None, :, :] >= 3).any(axis=1)
                d7[3] = (flip & act3 & ~self.z3[S_g][:, None]).sum(axis=0)
                act4 = (self.cnt4[S_g][:, :, None] + self.M4[None, :, :] >= 4).any(axis=1)
                d7[4] = (flip & act4 & ~self.z4[S_g][:, None]).sum(axis=0)
        F_g = self.fac_of[j]
        if self.full and F_g.size:
            fc = self.fcount[F_g]
            allowed = allowed & ~(fc == 2).any(axis=0)
            d7[5] = ((fc == 1) & ~self.zfov[F_g][:, None]).sum(axis=0)
            fflip = fc == 0
            FVg = self.FV[F_g].astype(np.int32)
            d7[6] = (fflip & ((FVg @ self.P2) > 0) & ~self.zfb[F_g][:, None]).sum(axis=0)
        return self.wv @ d7, allowed

    def place(self, j: int, t: int) -> _Record:
        S_g = self.students_of[j]
        d7 = np.zeros(7, dtype=np.int64)
        newly = flip3 = flip4 = fnew = fov_flips = fb_flips = _EMPTY
        if S_g.size:
            cnt_col = self.count[S_g, t]
            newly = S_g[cnt_col == 0]
            d7[0] = int((cnt_col == 1).sum())
            self.count[S_g, t] = cnt_col + 1
            if newly.size:
                for u in self.partners2[t]:
                    d7[1] += int(self.V[newly, u].sum())
                for u in self.partnersp[t]:
                    d7[2] += int(self.V[newly, u].sum())
                self.V[newly, t] = True
                if self.full:
                    self.cnt3[newly] += self.M3[:, t]
                    self.cnt4[newly] += self.M4[:, t]
                    cand = newly[~self.z3[newly]]
                    flip3 = cand[(self.cnt3[cand] >= 3).any(axis=1)]
                    self.z3[flip3] = True
                    d7[3] = len(flip3)
                    cand = newly[~self.z4[newly]]
                    flip4 = cand[(self.cnt4[cand] >= 4).any(axis=1)]
                    self.z4[flip4] = True
                    d7[4] = len(flip4)
        F_g = self.fac_of[j]
        if self.full and F_g.size:
            fc_col = self.fcount[F_g, t]
            fnew = F_g[fc_col == 0]
            fov_flips = F_g[(fc_col == 1) & ~self.zfov[F_g]]
            self.zfov[fov_flips] = True
            d7[5] = len(fov_flips)
            self.fcount[F_g, t] = fc_col + 1
            if fnew.size:
                has_pair = np.zeros(len(fnew), dtype=bool)
                for u in self.partners2[t]:
                    has_pair |= self.FV[fnew, u]
                fb_flips = fnew[has_pair & ~self.zfb[fnew]]
                self.zfb[fb_flips] = True
                d7[6] = len(fb_flips)
                self.FV[fnew, t] = True
        self.slot_seats[t] += int(self.n_g[j])
        self.counts7 += d7
        self.assignment[j] = t
        return _Record(j, t, newly, flip3, flip4, fnew, fov_flips, fb_flips, d7)

    def unplace(self, rec: _Record) -> None:
        j, t = rec.gpos, rec.slot
        S_g = self.students_of[j]
        if S_g.size:
            self.count[S_g, t] -= 1
            if rec.newly.size:
                self.V[rec.newly, t] = False
                if self.full:
                    self.cnt3[rec.newly] -= self.M3[:, t]
                    self.cnt4[rec.newly] -= self.M4[:, t]
                    self.z3[rec.flip3] = False
                    self.z4[rec.flip4] = False
        F_g = self.fac_of[j]
        if self.full and F_g.size:
            self.fcount[F_g, t] -= 1
            self.zfov[rec.fov_flips] = False
            if rec.fnew.size:
                self.FV[rec.fnew, t] = False
                self.zfb[rec.fb_flips] = False
        self.slot_seats[t] -= int(self.n_g[j])
        self.counts7 -= rec.d7
        self.assignment[j] = -1

    def _snapshot(self) -> dict[int, int]:
        return {int(self.mg[j]): int(self.assignment[j]) for j in range(self.Gm)}

    def run(self) -> SolveOutcome:
        start = time.monotonic()
        deadline = start + self.limits.time_limit
        hard_cap = self.limits.hard_cap

        def on_incumbent(obj: float) -> None:
            nonlocal deadline
            elapsed = time.monotonic() - start
            self.incumbent_log.append((elapsed, obj))
            if self.limits.incumbent_callback is not None:
                self.limits.incumbent_callback(elapsed, obj)
            if self.limits.extend_on_incumbent is not None:
                deadline = max(deadline, start + elapsed + self.limits.extend_on_incumbent)
                if hard_cap is not None:
                    deadline = min(deadline, start + hard_cap)

        def search(i: int) -> None:
            self.nodes += 1
            if time.monotonic() > deadline:
                raise _Timeout
            if i == len(self.order):
                obj = self.total()
                if obj < self.best_obj:
                    self.best_obj = obj
                    self.best = self._snapshot()
                    on_incumbent(obj)
                return
            j = self.order[i]
            delta, allowed = self.deltas(j)
            cand = np.nonzero(allowed)[0]
            if not cand.size:
                return
            cand = cand[np.lexsort((cand, delta[cand]))]
            cur = self.total()
            for t in cand:
                if cur + float(delta[t]) >= self.best_obj:
                    break
                rec = self.place(j, int(t))
                search(i + 1)
                self.unplace(rec)

        timed_out = False
        try:
            search(0)
        except _Timeout:
            timed_out = True
        runtime = time.monotonic() - start

        if self.best is None:
            if timed_out:
                return SolveOutcome(
                    STATUS_FEASIBLE_LIMIT, None, None, 0.0, runtime, self.incumbent_log,
                    "time limit hit before any feasible assignment was found",
                )
            return SolveOutcome(
                STATUS_INFEASIBLE, None, None, None, runtime, self.incumbent_log,
                "search exhausted without a feasible assignment",
            )
        schedule = Schedule(self.best)
        if timed_out:
            return SolveOutcome(
                STATUS_FEASIBLE_LIMIT, schedule, self.best_obj, 0.0, runtime, self.incumbent_log,
                f"time limit after {self.nodes} nodes",
            )
        return SolveOutcome(
            STATUS_OPTIMAL, schedule, self.best_obj, self.best_obj, runtime, self.incumbent_log,
            f"proved optimal after {self.nodes} nodes",
        )

    def greedy_dive(self) -> dict[int, int] | None:
        """First depth-first dive only: cheapest marginal penalty at every
        step.  Used for degraded completions."""
        recs = []
        for i in range(len(self.order)):
            j = self.order[i]
            delta, allowed = self.deltas(j)
            cand = np.nonzero(allowed)[0]
            if not cand.size:
                for rec in reversed(recs):
                    self.unplace(rec)
                return None
            cand = cand[np.lexsort((cand, delta[cand]))]
            recs.append(self.place(j, int(cand[0])))
        snap = self._snapshot()
        for rec in reversed(recs):
            self.unplace(rec)
        return snap


def solve_model(model: MilpModel, limits: SolveLimits | None = None, backend: str = "builtin") -> SolveOutcome:
    limits = limits or SolveLimits()
    if backend == "builtin":
        return _BranchAndBound(model, limits).run()
    if backend == "scipy":
        return _solve_scipy(model, limits)
    if backend == "external":
        return _solve_external(model, limits)
    return SolveOutcome(STATUS_ERROR, None, None, None, 0.0, [], f"unknown backend {backend!r}")


def _schedule_from_x(model: MilpModel, values_by_name: dict[str, float]) -> Schedule | None:
    T = model.instance.num_slots
    assignment: dict[int, int] = {}
    for g in model.group_ids:
        chosen = [t for t in range(T) if values_by_name.get(f"x_g{g}_t{t}", 0.0) > 0.5]
        if len(chosen) != 1:
            return None
        assignment[g] = chosen[0]
    return Schedule(assignment)


def _solve_scipy(model: MilpModel, limits: SolveLimits) -> SolveOutcome:
    try:
        from scipy.optimize import LinearConstraint, milp
    except ImportError:  # pragma: no cover - scipy is a package dependency
        return SolveOutcome(STATUS_ERROR, None, None, None, 0.0, [], "scipy backend unavailable")
    start = time.monotonic()
    A, senses, rhs, obj = model.matrix()
    lb = np.where(senses == "L", -np.inf, rhs)
    ub = np.where(senses == "G", np.inf, rhs)
    res = milp(
        c=obj,
        constraints=LinearConstraint(A, lb, ub),
        integrality=np.ones(model.num_variables),
        bounds=(0, 1),
        options={"time_limit": limits.time_limit, "mip_rel_gap": limits.gap_tolerance},
    )
    runtime = time.monotonic() - start
    if res.status == 2:
        return SolveOutcome(STATUS_INFEASIBLE, None, None, None, runtime, [], res.message)
    if res.x is None:
        return SolveOutcome(STATUS_FEASIBLE_LIMIT, None, None, 0.0, runtime, [], res.message)
    values = {model.var_name(j): float(res.x[j]) for j in range(model.num_variables)}
    schedule = _schedule_from_x(model, values)
    if schedule is None:
        return SolveOutcome(STATUS_ERROR, None, None, None, runtime, [], "backend returned a fractional assignment")
    objective = _model_objective(model, schedule)
    bound = objective if res.status == 0 else float(res.mip_dual_bound or 0.0)
    status = STATUS_OPTIMAL if res.status == 0 else STATUS_FEASIBLE_LIMIT
    return SolveOutcome(status, schedule, objective, bound, runtime, [(runtime, objective)], res.message)


def _model_objective(model: MilpModel, schedule: Schedule) -> float:
    return model.objective_at(schedule)


SOLVER_BIN_ENV = "EXAMSCHED_SOLVER_BIN"


def _solve_external(model: MilpModel, limits: SolveLimits) -> SolveOutcome:
    """Adapter contract: <binary> <model.mps> <solution.sol> <time_limit>.

    The solution file holds one status line (optimal | feasible | infeasible)
    followed by 'variable value' pairs.
    """
    binary = os.environ.get(SOLVER_BIN_ENV)
    if not binary:
        return SolveOutcome(STATUS_ERROR, None, None, None, 0.0, [], f"{SOLVER_BIN_ENV} is not set")
    start = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="examsched-solve-") as tmp:
        mps_path = Path(tmp) / "model.mps"
        sol_path = Path(tmp) / "solution.sol"
        write_model_file(model, mps_path, "mps")
        try:
            subprocess.run(
                [binary, str(mps_path), str(sol_path), str(limits.time_limit)],
                check=True,
                capture_output=True,
                timeout=limits.time_limit + 120,
            )
        except (subprocess.CalledProcessError, subprocess.TimeoutExpired, OSError) as exc:
            return SolveOutcome(STATUS_ERROR, None, None, None, time.monotonic() - start, [], f"backend failed: {exc}")
        runtime = time.monotonic() - start
        if not sol_path.exists():
            return SolveOutcome(STATUS_ERROR, None, None, None, runtime, [], "backend produced no solution file")
        lines = sol_path.read_text(encoding="utf-8").splitlines()
        if not lines:
            return SolveOutcome(STATUS_ERROR, None, None, None, runtime, [], "empty solution file")
        status_token = lines[0].strip().lower()
        if status_token == "infeasible":
            return SolveOutcome(STATUS_INFEASIBLE, None, None, None, runtime, [], "")
        values: dict[str, float] = {}
        for line in lines[1:]:
            parts = line.split()
            if len(parts) >= 2:
                values[parts[0]] = float(parts[1])
        schedule = _schedule_from_x(model, values)
        if schedule is None:
            return SolveOutcome(STATUS_ERROR, None, None, None, runtime, [], "solution file lacks a complete assignment")
        objective = _model_objective(model, schedule)
        status = STATUS_OPTIMAL if status_token == "optimal" else STATUS_FEASIBLE_LIMIT
        bound = objective if status == STATUS_OPTIMAL else 0.0
        return SolveOutcome(status, schedule, objective, bound, runtime, [(runtime, objective)], "")


class BruteForceBudgetError(ValueError):
    pass


def brute_force_optimal(
    instance: Instance, weights: Weights | None = None, budget: int = 10_000_000
) -> tuple[Schedule, float]:
    """Global optimum by plain enumeration, scored with the evaluator.

    Ties break to the lexicographically smallest assignment vector in
    group-id order.  Refuses when the pruned search space exceeds budget.
    """
    w = weights or instance.weights
    allowed: list[list[int]] = []
    for g in range(instance.num_groups):
        pins = np.nonzero(instance.r[g])[0]
        slots = [
            t
            for t in range(instance.num_slots)
            if instance.a[t] and not instance.q[g, t] and (not pins.size or t == int(pins[0]))
        ]
        if not slots:
            raise BruteForceBudgetError(f"group {g} has no permitted slot")
        allowed.append(slots)
    space = math.prod(len(s) for s in allowed)
    if space > budget:
        raise BruteForceBudgetError(f"search space {space} exceeds budget {budget}")

    best: Schedule | None = None
    best_obj = math.inf
    for combo in itertools.product(*allowed):
        schedule = Schedule(dict(enumerate(combo)))
        if hard_violations(instance, schedule):
            continue
        obj = evaluate_schedule(instance, schedule, w).weighted_objective
        if obj < best_obj:
            best_obj = obj
            best = schedule
    if best is None:
        raise BruteForceBudgetError("no hard-feasible assignment exists")
    return best, best_obj


def solve_instance(
    instance: Instance,
    weights: Weights | None = None,
    limits: SolveLimits | None = None,
    backend: str = "builtin",
) -> SolveOutcome:
    """Build the full program for an instance and solve it."""
    return solve_model(build_full_model(instance, weights), limits, backend)
