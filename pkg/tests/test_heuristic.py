import numpy as np
import pytest

from examsched.evaluate import evaluate_schedule, hard_violations
from examsched.heuristic import TwoPhaseConfig, run_two_phase, select_phase1_groups
from examsched.ingest import Weights
from examsched.solve import brute_force_optimal
from examsched.synth import tiny_fixture, tiny_instance

from test_evaluate import small_instance

FAST = TwoPhaseConfig(k_fixed=3, phase1_initial_limit=30, phase1_extension=10, phase1_hard_cap=60, phase2_limit=30)


class TestSelectPhase1Groups:
    def test_k_zero_no_pins_empty(self):
        instance = tiny_instance(0, allow_pins=False)
        assert select_phase1_groups(instance, 0) == []

    def test_k_equals_g_selects_all(self):
        instance = tiny_instance(1)
        assert select_phase1_groups(instance, instance.num_groups) == list(range(instance.num_groups))

    def test_rank_by_enrollment_with_id_tiebreak_and_pin_union(self):
        b = np.zeros((110, 4), dtype=bool)
        b[:50, 0] = True
        b[50:100, 1] = True
        b[100:110, 2] = True
        b[105:109, 3] = True
        instance = small_instance(b)
        instance.r[3, 2] = True  # pinned small group
        assert select_phase1_groups(instance, 2) == [0, 1, 3]

    def test_k_out_of_range_rejected(self):
        instance = tiny_instance(2)
        with pytest.raises(ValueError):
            select_phase1_groups(instance, instance.num_groups + 1)


class TestTwoPhase:
    def test_schedule_hard_feasible_and_bounded_by_oracle(self):
        for seed in range(12):
            instance = tiny_instance(seed)
            result = run_two_phase(instance, None, FAST)
            assert result.status == "ok", (seed, result.status)
            assert hard_violations(instance, result.schedule) == []
            _, oracle_obj = brute_force_optimal(instance)
            assert result.final_objective >= oracle_obj - 1e-12, seed
            assert result.gap_report["phase1_gap"] is not None
            assert result.gap_report["phase2_gap"] is not None

    def test_phase1_groups_fixed_faithfully(self):
        for seed in range(10):
            instance = tiny_instance(seed + 30)
            result = run_two_phase(instance, None, FAST)
            phase1_placement = result.phase1.best_assignment.assignment
            for g in result.phase1_groups:
                assert result.schedule.assignment[g] == phase1_placement[g], seed

    def test_k_equals_g_final_equals_phase1_evaluation(self):
        for seed in (0, 5, 9):
            instance = tiny_instance(seed)
            cfg = TwoPhaseConfig(
                k_fixed=instance.num_groups,
                phase1_initial_limit=30,
                phase1_extension=10,
                phase1_hard_cap=60,
                phase2_limit=30,
            )
            result = run_two_phase(instance, None, cfg)
            full_eval = evaluate_schedule(instance, result.phase1.best_assignment).weighted_objective
            assert result.final_objective == full_eval
            assert result.schedule.assignment == result.phase1.best_assignment.assignment

    def test_deterministic(self):
        instance = tiny_instance(14)
        a = run_two_phase(instance, None, FAST)
        b = run_two_phase(instance, None, FAST)
        assert a.schedule.assignment == b.schedule.assignment
        assert a.final_objective == b.final_objective

    def test_infeasible_pins_surface_as_infeasible(self):
        instance = small_instance(np.eye(2))
        instance.q[0, :] = True
        result = run_two_phase(instance, None, FAST)
        assert result.status == "infeasible"
        assert result.schedule is None

    def test_weights_flow_through(self):
        instance = tiny_instance(4)
        heavy = Weights(overlap=1000, b2b=1, pm_to_am=1, three_in_24=1, four_in_48=1, fac_overlap=1, fac_b2b=1)
        result = run_two_phase(instance, heavy, FAST)
        assert result.weights == heavy
        assert result.final_objective == evaluate_schedule(instance, result.schedule, heavy).weighted_objective

    def test_greedy_completion_dive_is_feasible(self):
        # the degraded-path helper: a single cheapest-first dive over the
        # fixed phase-2 model must yield a complete hard-feasible placement
        from examsched.model import FixSet, build_full_model
        from examsched.evaluate import Schedule
        from examsched.solve import SolveLimits, _BranchAndBound

        instance = tiny_instance(21)
        groups = select_phase1_groups(instance, 2)
        pins = {}
        for g in groups:
            slots = np.nonzero(instance.a & ~instance.q[g])[0]
            existing = np.nonzero(instance.r[g])[0]
            pins[g] = int(existing[0]) if existing.size else int(slots[0])
        model = build_full_model(instance, None, FixSet(tuple(pins.items())))
        dive = _BranchAndBound(model, SolveLimits(time_limit=10)).greedy_dive()
        assert dive is not None
        schedule = Schedule(dive)
        assert hard_violations(instance, schedule) == []
        for g, t in pins.items():
            assert schedule.assignment[g] == t

    def test_log_document_shape(self, tmp_path):
        result = run_two_phase(tiny_fixture(), None, FAST)
        path = tmp_path / "log.json"
        result.write_log(path)
        import json

        doc = json.loads(path.read_text())
        assert doc["kind"] == "two_phase_log"
        assert doc["config"]["k_fixed"] == FAST.k_fixed
        assert doc["phase1"]["status"] in ("optimal", "feasible-limit")
        assert "incumbents" in doc["phase1"]
        assert doc["gap_report"]["phase2_gap"] is not None
