"""Two-phase fix-and-optimize.

Phase 1 schedules only the largest-enrollment course groups (plus every
pinned group) under the overlap, back-to-back, and night-to-morning
penalties, with a time limit that stretches while new incumbents keep
arriving.  Phase 2 solves the complete program with the phase-1 placements
fixed as pins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evaluate import Schedule, evaluate_schedule
from .ingest import Instance, Weights
from .model import FixSet, build_full_model, build_phase1_model
from .solve import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    SolveLimits,
    SolveOutcome,
    _BranchAndBound,
    solve_model,
)


@dataclass(frozen=True)
class TwoPhaseConfig:
    k_fixed: int = 19
    phase1_initial_limit: float = 600.0
    phase1_extension: float = 600.0
    phase1_hard_cap: float = 7200.0
    phase2_limit: float = 4 * 3600.0
    backend: str = "builtin"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_fixed < 0:
            raise ValueError("k_fixed must be non-negative")
        for name in ("phase1_initial_limit", "phase1_extension", "phase1_hard_cap", "phase2_limit"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_doc(self) -> dict:
        return {
            "k_fixed": self.k_fixed,
            "phase1_initial_limit": self.phase1_initial_limit,
            "phase1_extension": self.phase1_extension,
            "phase1_hard_cap": self.phase1_hard_cap,
            "phase2_limit": self.phase2_limit,
            "backend": self.backend,
            "seed": self.seed,
        }


def select_phase1_groups(instance: Instance, k: int) -> list[int]:
    """Top-k groups by enrollment (ties to the smaller id) plus every
    group with a pinned slot."""
    if not 0 <= k <= instance.num_groups:
        raise ValueError(f"k must lie in [0, {instance.num_groups}]")
    n_g = instance.n_g
    ranked = sorted(range(instance.num_groups), key=lambda g: (-int(n_g[g]), g))
    chosen = set(ranked[:k])
    chosen.update(int(g) for g in np.nonzero(instance.r.any(axis=1))[0])
    return sorted(chosen)


@dataclass
class TwoPhaseResult:
    status: str  # "ok" | "degraded" | "infeasible"
    schedule: Schedule | None
    phase1: SolveOutcome
    phase2: SolveOutcome | None
    phase1_groups: list[int]
    final_objective: float | None
    gap_report: dict
    config: TwoPhaseConfig
    weights: Weights

    def to_doc(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "two_phase_log",
            "status": self.status,
            "config": self.config.to_doc(),
            "weights": self.weights.to_doc(),
            "phase1_groups": list(self.phase1_groups),
            "phase1": _outcome_doc(self.phase1),
            "phase2": _outcome_doc(self.phase2) if self.phase2 else None,
            "final_objective": self.final_objective,
            "gap_report": self.gap_report,
        }

    def write_log(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _outcome_doc(outcome: SolveOutcome) -> dict:
    return {
        "status": outcome.status,
        "objective": outcome.objective,
        "bound": outcome.bound,
        "runtime": outcome.runtime,
        "incumbents": [[t, obj] for t, obj in outcome.incumbent_log],
        "message": outcome.message,
    }


def _gap(objective: float | None, bound: float | None) -> float | None:
    if objective is None or bound is None:
        return None
    return (objective - bound) / max(1.0, abs(objective))


def run_two_phase(
    instance: Instance, weights: Weights | None = None, config: TwoPhaseConfig | None = None
) -> TwoPhaseResult:
    w = weights or instance.weights
    cfg = config or TwoPhaseConfig()
    k = min(cfg.k_fixed, instance.num_groups)
    phase1_groups = select_phase1_groups(instance, k)

    p1_model = build_phase1_model(instance, w, phase1_groups)
    p1 = solve_model(
        p1_model,
        SolveLimits(
            time_limit=cfg.phase1_initial_limit,
            extend_on_incumbent=cfg.phase1_extension,
            hard_cap=cfg.phase1_hard_cap,
            deterministic_seed=cfg.seed,
        ),
        cfg.backend,
    )
    if p1.best_assignment is None:
        return TwoPhaseResult(
            status="infeasible",
            schedule=None,
            phase1=p1,
            phase2=None,
            phase1_groups=phase1_groups,
            final_objective=None,
            gap_report={"phase1_gap": _gap(p1.objective, p1.bound), "phase2_gap": None},
            config=cfg,
            weights=w,
        )

    fixes = FixSet.from_schedule(p1.best_assignment)
    p2_model = build_full_model(instance, w, fixes)
    p2 = solve_model(
        p2_model,
        SolveLimits(time_limit=cfg.phase2_limit, deterministic_seed=cfg.seed),
        cfg.backend,
    )

    status = "ok"
    schedule = p2.best_assignment
    if schedule is None:
        if p2.status == STATUS_INFEASIBLE:
            return TwoPhaseResult(
                status="infeasible",
                schedule=None,
                phase1=p1,
                phase2=p2,
                phase1_groups=phase1_groups,
                final_objective=None,
                gap_report={
                    "phase1_gap": _gap(p1.objective, p1.bound),
                    "phase2_gap": None,
                },
                config=cfg,
                weights=w,
            )
        # timed out with nothing: finish the fixed model greedily so the
        # caller always gets a schedule to inspect
        dive = _BranchAndBound(p2_model, SolveLimits(time_limit=60.0)).greedy_dive()
        if dive is None:
            status = "infeasible"
        else:
            schedule = Schedule(dive)
            status = "degraded"

    final_objective = None
    if schedule is not None:
        final_objective = evaluate_schedule(instance, schedule, w).weighted_objective
    return TwoPhaseResult(
        status=status,
        schedule=schedule,
        phase1=p1,
        phase2=p2,
        phase1_groups=phase1_groups,
        final_objective=final_objective,
        gap_report={
            "phase1_objective": p1.objective,
            "phase1_bound": p1.bound,
            "phase1_gap": _gap(p1.objective, p1.bound),
            "phase2_objective": p2.objective,
            "phase2_bound": p2.bound,
            "phase2_gap": _gap(p2.objective, p2.bound),
            "phase1_proved_optimal": p1.status == STATUS_OPTIMAL,
            "phase2_proved_optimal": p2.status == STATUS_OPTIMAL,
        },
        config=cfg,
        weights=w,
    )
