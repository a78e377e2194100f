"""Portfolio runs: several weight sets, several phase-1 sizes.

The default sweep pairs four weight sets with five fixed-group counts,
twenty runs total, and reports one best schedule per weight set, verified
by re-evaluation rather than trusting the solver's claimed objective.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .evaluate import InconvenienceReport, Schedule, evaluate_schedule, report_csv, save_schedule
from .ingest import Instance, Weights, canonical_json_bytes
from .heuristic import TwoPhaseConfig, TwoPhaseResult, run_two_phase

DEFAULT_K_RANGE = (17, 18, 19, 20, 21)


@dataclass(frozen=True)
class WeightSetCatalog:
    """Named weight sets; exactly one is tagged as the survey-derived set.
    The shipped numbers are editorial defaults, not measured values."""

    entries: tuple[tuple[str, Weights], ...]
    survey_tag: str = "survey"

    def __post_init__(self) -> None:
        names = [name for name, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("weight set names must be unique")

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def get(self, name: str) -> Weights:
        for n, w in self.entries:
            if n == name:
                return w
        raise KeyError(name)

    def to_doc(self) -> dict:
        return {
            "survey_tag": self.survey_tag,
            "entries": {name: w.to_doc() for name, w in self.entries},
        }

    @staticmethod
    def from_doc(doc: dict) -> "WeightSetCatalog":
        return WeightSetCatalog(
            entries=tuple((name, Weights.from_doc(w)) for name, w in doc["entries"].items()),
            survey_tag=doc.get("survey_tag", "survey"),
        )


def default_catalog() -> WeightSetCatalog:
    return WeightSetCatalog(
        entries=(
            ("survey", Weights(overlap=100, b2b=10, pm_to_am=8, three_in_24=30, four_in_48=20, fac_overlap=25, fac_b2b=5)),
            ("overlap_dominant", Weights(overlap=1000, b2b=10, pm_to_am=8, three_in_24=40, four_in_48=25, fac_overlap=50, fac_b2b=5)),
            ("student_only", Weights(overlap=100, b2b=10, pm_to_am=8, three_in_24=30, four_in_48=20, fac_overlap=0, fac_b2b=0)),
            ("balanced", Weights(overlap=10, b2b=10, pm_to_am=10, three_in_24=10, four_in_48=10, fac_overlap=10, fac_b2b=10)),
        ),
        survey_tag="survey",
    )


@dataclass
class RunRecord:
    weight_set: str
    k: int
    seed: int
    status: str  # two-phase status, or "failed"
    objective: float | None  # re-evaluated, not the solver's claim
    schedule: Schedule | None
    result: TwoPhaseResult | None
    error: str | None = None
    runtime: float = 0.0


@dataclass
class BestEntry:
    schedule: Schedule
    report: InconvenienceReport
    k: int
    objective: float


@dataclass
class PortfolioResult:
    best: dict[str, BestEntry]
    runs: list[RunRecord]
    wall_clock: float
    seed: int
    k_values: tuple[int, ...]
    catalog: WeightSetCatalog


def run_seed(portfolio_seed: int, weight_set_index: int, k: int) -> int:
    """Stable per-run seed so parallel execution cannot reorder randomness."""
    return portfolio_seed * 1_000_003 + weight_set_index * 101 + k


def run_portfolio(
    instance: Instance,
    catalog: WeightSetCatalog | None = None,
    k_range=DEFAULT_K_RANGE,
    max_parallel: int = 4,
    seed: int = 0,
    base_config: TwoPhaseConfig | None = None,
    serial: bool = False,
) -> PortfolioResult:
    cat = catalog or default_catalog()
    k_values = tuple(int(k) for k in k_range)
    if not k_values:
        raise ValueError("k_range must be non-empty")
    if max_parallel < 1:
        raise ValueError("max_parallel must be at least 1")
    base = base_config or TwoPhaseConfig()

    tasks = [
        (wi, name, weights, k)
        for wi, (name, weights) in enumerate(cat.entries)
        for k in k_values
    ]

    def execute(task) -> RunRecord:
        wi, name, weights, k = task
        k_eff = min(k, instance.num_groups)
        cfg = replace(base, k_fixed=k_eff, seed=run_seed(seed, wi, k))
        started = time.monotonic()
        try:
            result = run_two_phase(instance, weights, cfg)
        except Exception as exc:  # noqa: BLE001 - a failed run must not sink the portfolio
            return RunRecord(name, k, cfg.seed, "failed", None, None, None, str(exc), time.monotonic() - started)
        objective = None
        if result.schedule is not None:
            objective = evaluate_schedule(instance, result.schedule, weights).weighted_objective
        return RunRecord(
            weight_set=name,
            k=k,
            seed=cfg.seed,
            status=result.status,
            objective=objective,
            schedule=result.schedule,
            result=result,
            runtime=time.monotonic() - started,
        )

    started = time.monotonic()
    if serial or max_parallel == 1:
        records = [execute(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=max_parallel) as pool:
            records = list(pool.map(execute, tasks))
    wall_clock = time.monotonic() - started

    best: dict[str, BestEntry] = {}
    for name, weights in cat.entries:
        usable = [r for r in records if r.weight_set == name and r.schedule is not None and r.objective is not None]
        if not usable:
            continue
        top = min(usable, key=lambda r: (r.objective, r.k))
        best[name] = BestEntry(
            schedule=top.schedule,
            report=evaluate_schedule(instance, top.schedule, weights),
            k=top.k,
            objective=top.objective,
        )
    return PortfolioResult(
        best=best,
        runs=records,
        wall_clock=wall_clock,
        seed=seed,
        k_values=k_values,
        catalog=cat,
    )


def portfolio_manifest_doc(result: PortfolioResult, instance: Instance) -> dict:
    """Deterministic manifest: everything except wall-clock measurements,
    which live in the timings document."""
    return {
        "schema_version": 1,
        "kind": "portfolio_manifest",
        "instance_digest": instance.digest(),
        "seed": result.seed,
        "k_range": list(result.k_values),
        "weight_sets": result.catalog.to_doc(),
        "runs": [
            {
                "weight_set": r.weight_set,
                "k": r.k,
                "seed": r.seed,
                "status": r.status,
                "objective": r.objective,
                "schedule_file": _run_schedule_name(r) if r.schedule is not None else None,
                "error": r.error,
            }
            for r in result.runs
        ],
        "best": {
            name: {
                "k": entry.k,
                "objective": entry.objective,
                "schedule_file": f"schedule_best_{name}.json",
                "report_rows": {label: count for label, count in entry.report.rows()},
            }
            for name, entry in sorted(result.best.items())
        },
    }


def portfolio_timings_doc(result: PortfolioResult) -> dict:
    return {
        "schema_version": 1,
        "kind": "portfolio_timings",
        "wall_clock": result.wall_clock,
        "runs": [
            {
                "weight_set": r.weight_set,
                "k": r.k,
                "runtime": r.runtime,
                "incumbents": {
                    "phase1": [[t, obj] for t, obj in r.result.phase1.incumbent_log] if r.result else [],
                    "phase2": [[t, obj] for t, obj in r.result.phase2.incumbent_log]
                    if r.result and r.result.phase2
                    else [],
                },
            }
            for r in result.runs
        ],
    }


def _run_schedule_name(record: RunRecord) -> str:
    return f"schedule_{record.weight_set}_k{record.k}.json"


def write_portfolio(result: PortfolioResult, instance: Instance, out_dir: str | Path) -> Path:
    """Write the manifest, timing sidecar, per-run and best schedule
    documents, and best-schedule reports.  Returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "portfolio.json"
    manifest_path.write_bytes(canonical_json_bytes(portfolio_manifest_doc(result, instance)))
    (out / "timings.json").write_text(
        json.dumps(portfolio_timings_doc(result), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for record in result.runs:
        if record.schedule is not None:
            save_schedule(record.schedule, instance, out / _run_schedule_name(record))
        if record.result is not None:
            record.result.write_log(out / f"log_{record.weight_set}_k{record.k}.json")
    for name, entry in result.best.items():
        save_schedule(entry.schedule, instance, out / f"schedule_best_{name}.json")
        (out / f"report_best_{name}.json").write_bytes(canonical_json_bytes(entry.report.to_doc()))
        (out / f"report_best_{name}.csv").write_text(report_csv(entry.report), encoding="utf-8")
    return manifest_path
