"""What-if analysis over the exam-period length.

Rebuilds the slot grid one day longer or shorter (night slots recomputed
by the standard placement rule), carries pins and blocks across by (day,
position-in-day) identity, re-runs the two-phase heuristic per weight set,
and lays the familiar eight metric rows side by side.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .evaluate import REPORT_ROW_LABELS, evaluate_schedule
from .ingest import Instance
from .heuristic import TwoPhaseConfig, run_two_phase
from .portfolio import WeightSetCatalog, default_catalog
from .timegrid import build_grid, pattern_sets


@dataclass(frozen=True)
class DayChangeResult:
    instance: Instance | None
    reason: str | None  # set when the change is infeasible


def rebuild_for_days(instance: Instance, day_delta: int) -> DayChangeResult:
    """Same enrollment data on a period day_delta days longer/shorter.
    Slots keep their (day, position) identity; a pin whose slot disappears
    makes the change infeasible."""
    num_days = len(instance.grid.config.days) + day_delta
    if num_days < 1:
        return DayChangeResult(None, "exam period must keep at least one day")
    new_grid = build_grid(instance.grid.config.with_day_count(num_days))

    old_index = {(s.day_index, s.seq_in_day): s.id for s in instance.grid.slots}
    new_index = {(s.day_index, s.seq_in_day): s.id for s in new_grid.slots}
    slot_map = {old_id: new_index[key] for key, old_id in old_index.items() if key in new_index}

    n_t = len(new_grid.slots)
    a = np.ones(n_t, dtype=bool)
    for old_id, available in enumerate(instance.a):
        if not available and old_id in slot_map:
            a[slot_map[old_id]] = False
    r = np.zeros((instance.num_groups, n_t), dtype=bool)
    q = np.zeros((instance.num_groups, n_t), dtype=bool)
    for g in range(instance.num_groups):
        for t in np.nonzero(instance.r[g])[0]:
            if int(t) not in slot_map:
                return DayChangeResult(
                    None,
                    f"group {instance.groups[g].label!r} is pinned to a slot the shorter period drops",
                )
            r[g, slot_map[int(t)]] = True
        for t in np.nonzero(instance.q[g])[0]:
            if int(t) in slot_map:
                q[g, slot_map[int(t)]] = True

    return DayChangeResult(
        Instance(
            students=instance.students,
            faculty=instance.faculty,
            groups=instance.groups,
            grid=new_grid,
            patterns=pattern_sets(new_grid),
            b=instance.b,
            d=instance.d,
            a=a,
            r=r,
            q=q,
            m1=instance.m1,
            weights=instance.weights,
            forced_overlap_pairs=instance.forced_overlap_pairs,
        ),
        None,
    )


@dataclass
class WhatIfColumn:
    label: str
    feasible: bool
    rows: dict[str, int] | None  # REPORT_ROW_LABELS -> count
    objective: float | None
    reason: str | None = None


@dataclass
class WhatIfResult:
    day_delta: int
    per_weight_set: dict[str, tuple[WhatIfColumn, WhatIfColumn]]  # (base, modified)

    def to_doc(self) -> dict:
        def col(c: WhatIfColumn) -> dict:
            return {
                "label": c.label,
                "feasible": c.feasible,
                "rows": c.rows,
                "objective": c.objective,
                "reason": c.reason,
            }

        return {
            "schema_version": 1,
            "kind": "whatif_days",
            "day_delta": self.day_delta,
            "metric_rows": list(REPORT_ROW_LABELS),
            "weight_sets": {
                name: {"base": col(base), "modified": col(mod)}
                for name, (base, mod) in self.per_weight_set.items()
            },
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        names = list(self.per_weight_set.keys())
        header = ["metric"]
        for name in names:
            base, mod = self.per_weight_set[name]
            header += [f"{name}: {base.label}", f"{name}: {mod.label}"]
        writer.writerow(header)
        for label in REPORT_ROW_LABELS:
            row = [label]
            for name in names:
                for col in self.per_weight_set[name]:
                    if col.feasible and col.rows is not None:
                        row.append(col.rows[label])
                    else:
                        row.append("infeasible")
            writer.writerow(row)
        return buf.getvalue()


def _column(instance: Instance, label: str, weights, config: TwoPhaseConfig) -> WhatIfColumn:
    result = run_two_phase(instance, weights, config)
    if result.schedule is None:
        return WhatIfColumn(label, False, None, None, reason=f"two-phase run ended {result.status}")
    report = evaluate_schedule(instance, result.schedule, weights)
    return WhatIfColumn(
        label,
        True,
        {lab: count for lab, count in report.rows()},
        report.weighted_objective,
    )


def whatif_days(
    instance: Instance,
    day_delta: int,
    catalog: WeightSetCatalog | None = None,
    config: TwoPhaseConfig | None = None,
) -> WhatIfResult:
    if day_delta not in (-1, 1):
        raise ValueError("day_delta must be -1 or +1")
    cat = catalog or default_catalog()
    cfg = config or TwoPhaseConfig()
    base_days = len(instance.grid.config.days)
    base_label = f"{base_days} exam days (current)"
    change = rebuild_for_days(instance, day_delta)
    mod_label = f"{base_days + day_delta} exam days"

    per_ws: dict[str, tuple[WhatIfColumn, WhatIfColumn]] = {}
    for wi, (name, weights) in enumerate(cat.entries):
        ws_cfg = replace(cfg, seed=cfg.seed * 7919 + wi)
        base_col = _column(instance, base_label, weights, ws_cfg)
        if change.instance is None:
            mod_col = WhatIfColumn(mod_label, False, None, None, reason=change.reason)
        else:
            mod_col = _column(change.instance, mod_label, weights, ws_cfg)
        per_ws[name] = (base_col, mod_col)
    return WhatIfResult(day_delta=day_delta, per_weight_set=per_ws)
