"""Headless driver: the same pipeline the service runs, as subcommands.

Subcommands compose ingest -> group -> solve/portfolio -> evaluate ->
whatif -> export, writing the same documents the service serves.  With
--serial and a fixed --seed the artifacts are byte-identical across runs.
Failures exit nonzero and print one JSON error object to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .evaluate import (
    evaluate_schedule,
    load_schedule,
    matrix_csv,
    overlap_matrix,
    report_csv,
    save_schedule,
    schedule_csv,
)
from .grouping import build_groups, grouping_report_csv
from .heuristic import TwoPhaseConfig
from .ingest import (
    Weights,
    canonical_json_bytes,
    load_instance_report,
    load_saved_instance,
    read_coordinated,
    read_enrollments,
    read_sections,
    save_instance,
    validate_instance,
)
from .model import build_full_model, write_model_file
from .portfolio import WeightSetCatalog, default_catalog, run_portfolio, write_portfolio
from .solve import SolveLimits, solve_model
from .synth import term_scale_instance, tiny_fixture
from .whatif import whatif_days


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: str, message: str) -> int:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return 2


def _resolve_weights(name_or_path: str | None) -> Weights | None:
    if name_or_path is None:
        return None
    catalog = default_catalog()
    if name_or_path in catalog.names():
        return catalog.get(name_or_path)
    path = Path(name_or_path)
    if path.exists():
        return Weights.from_doc(json.loads(path.read_text(encoding="utf-8")))
    raise CliError("unknown-weights", f"--weights {name_or_path!r} is neither a named set {catalog.names()} nor a file")


def _resolve_catalog(name_or_path: str | None) -> WeightSetCatalog:
    if name_or_path is None or name_or_path == "default":
        return default_catalog()
    path = Path(name_or_path)
    if path.exists():
        return WeightSetCatalog.from_doc(json.loads(path.read_text(encoding="utf-8")))
    raise CliError("unknown-catalog", f"--weights {name_or_path!r} is neither 'default' nor a catalog file")


def _parse_k_range(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(","))


def _two_phase_config(args) -> TwoPhaseConfig:
    cfg = TwoPhaseConfig()
    return replace(
        cfg,
        k_fixed=getattr(args, "k_fixed", cfg.k_fixed),
        phase1_initial_limit=args.time_limit_phase1,
        phase1_extension=max(1.0, args.time_limit_phase1 / 2),
        phase1_hard_cap=args.time_limit_phase1 * 4,
        phase2_limit=args.time_limit_phase2,
        backend=args.backend,
        seed=args.seed,
    )


def cmd_ingest(args) -> int:
    instance, findings, grouping = load_instance_report(
        Path(args.enrollments),
        Path(args.sections),
        Path(args.constraints) if args.constraints else None,
        Path(args.grid_config) if args.grid_config else _default_grid(),
        Path(args.coordinated) if args.coordinated else None,
        _resolve_weights(args.weights),
    )
    for f in findings:
        print(json.dumps({"severity": f.severity, "code": f.code, "message": f.message}))
    if instance is None:
        return _fail("validation-failed", "instance did not validate; see findings above")
    save_instance(instance, args.out)
    if args.grouping_report and grouping is not None:
        Path(args.grouping_report).write_text(grouping_report_csv(grouping), encoding="utf-8")
    print(json.dumps({"instance": str(args.out), "digest": instance.digest()}))
    return 0


def _default_grid():
    from .timegrid import ExamPeriodConfig

    return ExamPeriodConfig.standard(6)


def cmd_group(args) -> int:
    enrollments, f1 = read_enrollments(Path(args.enrollments))
    sections, f2 = read_sections(Path(args.sections))
    errors = [f for f in f1 + f2 if f.severity == "error"]
    if errors:
        return _fail(errors[0].code, errors[0].message)
    coordinated = read_coordinated(Path(args.coordinated)) if args.coordinated else []
    result = build_groups(sections, enrollments, coordinated)
    if args.edits:
        from .grouping import apply_group_edits

        rows = [line.split(",", 1) for line in Path(args.edits).read_text(encoding="utf-8").splitlines() if line.strip()]
        result = apply_group_edits(result, [(a.strip(), b.strip()) for a, b in rows], sections, enrollments)
    out = Path(args.out)
    out.write_text(grouping_report_csv(result), encoding="utf-8")
    print(
        json.dumps(
            {
                "groups": len(result.groups),
                "ambiguous_sections": [key for key, _ in result.ambiguous_sections],
                "forced_overlap_pairs": len(result.forced_overlap_pairs),
                "report": str(out),
            }
        )
    )
    return 0


def cmd_solve(args) -> int:
    instance = load_saved_instance(args.instance)
    weights = _resolve_weights(args.weights)
    model = build_full_model(instance, weights)
    outcome = solve_model(model, SolveLimits(time_limit=args.time_limit, deterministic_seed=args.seed), args.backend)
    if outcome.best_assignment is None:
        return _fail("solve-" + outcome.status, outcome.message or outcome.status)
    save_schedule(outcome.best_assignment, instance, args.out)
    report = evaluate_schedule(instance, outcome.best_assignment, weights)
    print(
        json.dumps(
            {
                "status": outcome.status,
                "objective": report.weighted_objective,
                "bound": outcome.bound,
                "schedule": str(args.out),
            }
        )
    )
    return 0


def cmd_portfolio(args) -> int:
    instance = load_saved_instance(args.instance)
    catalog = _resolve_catalog(args.weights)
    result = run_portfolio(
        instance,
        catalog,
        _parse_k_range(args.k),
        max_parallel=1 if args.serial else args.max_parallel,
        seed=args.seed,
        base_config=_two_phase_config(args),
        serial=args.serial,
    )
    manifest = write_portfolio(result, instance, args.out_dir)
    failed = [r for r in result.runs if r.status == "failed"]
    print(
        json.dumps(
            {
                "runs": len(result.runs),
                "reported": sorted(result.best.keys()),
                "failed_runs": len(failed),
                "manifest": str(manifest),
            }
        )
    )
    return 0 if result.best and not failed else (0 if result.best else _fail("portfolio-empty", "no run produced a schedule"))


def cmd_evaluate(args) -> int:
    instance = load_saved_instance(args.instance)
    schedule = load_schedule(args.schedule, instance)
    report = evaluate_schedule(instance, schedule, _resolve_weights(args.weights))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(canonical_json_bytes(report.to_doc()))
        (out / "report.csv").write_text(report_csv(report), encoding="utf-8")
    print(json.dumps(report.to_doc()["rows"]))
    print(json.dumps({"weighted_objective": report.weighted_objective}))
    return 0


def cmd_whatif(args) -> int:
    instance = load_saved_instance(args.instance)
    delta = int(args.days)
    result = whatif_days(instance, delta, _resolve_catalog(args.weights), _two_phase_config(args))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "whatif.json").write_bytes(canonical_json_bytes(result.to_doc()))
        (out / "whatif.csv").write_text(result.to_csv(), encoding="utf-8")
    print(result.to_csv())
    return 0


def cmd_export(args) -> int:
    instance = load_saved_instance(args.instance)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wrote = {}
    if args.model:
        path = out_dir / f"model.{args.model}"
        write_model_file(build_full_model(instance, _resolve_weights(args.weights)), path, args.model)
        wrote["model"] = str(path)
    if args.schedule:
        schedule = load_schedule(args.schedule, instance)
        report = evaluate_schedule(instance, schedule, _resolve_weights(args.weights))
        (out_dir / "final_schedule.csv").write_text(schedule_csv(instance, schedule), encoding="utf-8")
        (out_dir / "final_schedule.json").write_bytes(canonical_json_bytes(schedule.to_doc(instance)))
        (out_dir / "report.csv").write_text(report_csv(report), encoding="utf-8")
        (out_dir / "report.json").write_bytes(canonical_json_bytes(report.to_doc()))
        wrote["schedule"] = str(out_dir / "final_schedule.csv")
    if args.matrix:
        (out_dir / "overlap_matrix.csv").write_text(matrix_csv(overlap_matrix(instance)), encoding="utf-8")
        wrote["matrix"] = str(out_dir / "overlap_matrix.csv")
    if not wrote:
        return _fail("nothing-to-export", "pass --model, --schedule, and/or --matrix")
    print(json.dumps(wrote))
    return 0


def cmd_generate(args) -> int:
    if args.scale == "tiny":
        instance = tiny_fixture()
    elif args.scale == "term":
        instance = term_scale_instance(seed=args.seed)
    else:
        return _fail("unknown-scale", f"--scale {args.scale!r} (use tiny or term)")
    save_instance(instance, args.out)
    print(json.dumps({"instance": str(args.out), "students": instance.num_students, "groups": instance.num_groups}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="examsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate raw data into an instance document")
    p.add_argument("--enrollments", required=True)
    p.add_argument("--sections", required=True)
    p.add_argument("--constraints")
    p.add_argument("--coordinated")
    p.add_argument("--grid-config")
    p.add_argument("--weights")
    p.add_argument("--grouping-report")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("group", help="build or edit course groups and export the review report")
    p.add_argument("--enrollments", required=True)
    p.add_argument("--sections", required=True)
    p.add_argument("--coordinated")
    p.add_argument("--edits", help="csv lines: section_key,target_group_label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("solve", help="single full-model solve")
    p.add_argument("--instance", required=True)
    p.add_argument("--weights")
    p.add_argument("--backend", default="builtin")
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("portfolio", help="weight-set x fixed-count sweep")
    p.add_argument("--instance", required=True)
    p.add_argument("--k", default="17..21", help="range like 17..21 or list like 17,19,21")
    p.add_argument("--weights", default="default", help="'default' or a catalog json file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--serial", action="store_true")
    p.add_argument("--max-parallel", type=int, default=4)
    p.add_argument("--backend", default="builtin")
    p.add_argument("--time-limit-phase1", type=float, default=600.0)
    p.add_argument("--time-limit-phase2", type=float, default=4 * 3600.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_portfolio)

    p = sub.add_parser("evaluate", help="inconvenience report for a schedule")
    p.add_argument("--instance", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--weights")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("whatif", help="compare against a longer or shorter exam period")
    p.add_argument("--instance", required=True)
    p.add_argument("--days", required=True, help="+1 or -1")
    p.add_argument("--weights", default="default")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", default="builtin")
    p.add_argument("--k-fixed", dest="k_fixed", type=int, default=19)
    p.add_argument("--time-limit-phase1", type=float, default=600.0)
    p.add_argument("--time-limit-phase2", type=float, default=4 * 3600.0)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("export", help="write model text, schedule documents, or the overlap matrix")
    p.add_argument("--instance", required=True)
    p.add_argument("--schedule")
    p.add_argument("--weights")
    p.add_argument("--model", choices=["lp", "mps"])
    p.add_argument("--matrix", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("generate", help="write a bundled synthetic instance document")
    p.add_argument("--scale", default="tiny", choices=["tiny", "term"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.code, str(exc))
    except FileNotFoundError as exc:
        return _fail("missing-file", str(exc))
    except Exception as exc:  # noqa: BLE001 - stable nonzero exit with a code
        return _fail("internal-error", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
