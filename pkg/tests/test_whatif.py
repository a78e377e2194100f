import numpy as np
import pytest

from examsched.evaluate import REPORT_ROW_LABELS
from examsched.heuristic import TwoPhaseConfig
from examsched.portfolio import WeightSetCatalog
from examsched.ingest import Weights
from examsched.solve import brute_force_optimal
from examsched.synth import tiny_fixture, tiny_instance
from examsched.whatif import rebuild_for_days, whatif_days

FAST = TwoPhaseConfig(k_fixed=4, phase1_initial_limit=20, phase1_extension=10, phase1_hard_cap=40, phase2_limit=20)
ONE_SET = WeightSetCatalog(entries=(("survey", Weights()),), survey_tag="survey")


class TestRebuild:
    def test_add_day_keeps_existing_slot_ids(self):
        instance = tiny_fixture()
        change = rebuild_for_days(instance, +1)
        assert change.instance is not None
        bigger = change.instance
        for slot in instance.grid.slots:
            other = bigger.grid.slots[slot.id]
            assert (other.day_index, other.seq_in_day) == (slot.day_index, slot.seq_in_day)
        assert bigger.num_slots > instance.num_slots

    def test_remove_day_drops_pinned_slot_infeasible(self):
        instance = tiny_fixture()
        last_slot = instance.num_slots - 1
        instance.r[0, last_slot] = True
        change = rebuild_for_days(instance, -1)
        assert change.instance is None
        assert "pinned" in change.reason

    def test_remove_below_one_day_infeasible(self):
        grid_1day = tiny_instance(0)
        while len(grid_1day.grid.config.days) != 1:
            grid_1day = tiny_instance(np.random.default_rng().integers(10_000))
        change = rebuild_for_days(grid_1day, -1)
        assert change.instance is None

    def test_blocks_and_availability_carried_over(self):
        instance = tiny_fixture()
        instance.q[1, 2] = True
        instance.a[3] = False
        change = rebuild_for_days(instance, +1)
        assert change.instance.q[1, 2]
        assert not change.instance.a[3]

    def test_oracle_optimum_never_worse_with_extra_day(self):
        # feasible-set inclusion: every base schedule remains feasible (ids
        # survive) so the optimum cannot increase
        for seed in (0, 3, 8, 12):
            instance = tiny_instance(seed, max_groups=4, max_slots=4, max_students=8)
            _, base_obj = brute_force_optimal(instance)
            change = rebuild_for_days(instance, +1)
            _, wider_obj = brute_force_optimal(change.instance)
            assert wider_obj <= base_obj + 1e-12, seed


class TestWhatIfTable:
    def test_table_has_the_eight_metric_rows(self):
        result = whatif_days(tiny_fixture(), +1, ONE_SET, FAST)
        doc = result.to_doc()
        assert doc["metric_rows"] == list(REPORT_ROW_LABELS)
        base, mod = result.per_weight_set["survey"]
        assert base.feasible and mod.feasible
        assert set(base.rows) == set(REPORT_ROW_LABELS)
        assert set(mod.rows) == set(REPORT_ROW_LABELS)
        csv_text = result.to_csv()
        for label in REPORT_ROW_LABELS:
            assert label in csv_text

    def test_column_labels_name_day_counts(self):
        instance = tiny_fixture()
        result = whatif_days(instance, +1, ONE_SET, FAST)
        base, mod = result.per_weight_set["survey"]
        days = len(instance.grid.config.days)
        assert base.label == f"{days} exam days (current)"
        assert mod.label == f"{days + 1} exam days"

    def test_infeasible_shrink_reported_as_column(self):
        instance = tiny_fixture()
        instance.r[0, instance.num_slots - 1] = True
        result = whatif_days(instance, -1, ONE_SET, FAST)
        base, mod = result.per_weight_set["survey"]
        assert base.feasible
        assert not mod.feasible
        assert "infeasible" in result.to_csv()

    def test_every_weight_set_gets_columns(self):
        result = whatif_days(tiny_fixture(), +1, config=FAST)
        assert len(result.per_weight_set) == 4

    def test_bad_delta_rejected(self):
        with pytest.raises(ValueError):
            whatif_days(tiny_fixture(), 2, ONE_SET, FAST)
