"""Final exam timetabling: grid building, instance ingest, inconvenience
evaluation, the assignment binary program, exact and heuristic solving,
schedule portfolios, and an interactive review service."""

from .evaluate import InconvenienceReport, Schedule, evaluate_schedule, hard_violations, overlap_matrix
from .grouping import CourseGroup, GroupingResult, Section, apply_group_edits, build_groups
from .heuristic import TwoPhaseConfig, TwoPhaseResult, run_two_phase, select_phase1_groups
from .ingest import Instance, Weights, load_instance, load_saved_instance, save_instance, validate_instance
from .model import FixSet, MilpModel, build_full_model, build_phase1_model, export_model
from .portfolio import WeightSetCatalog, default_catalog, run_portfolio, write_portfolio
from .solve import SolveLimits, SolveOutcome, brute_force_optimal, solve_model
from .timegrid import ExamPeriodConfig, PatternSets, TimeGrid, TimeSlot, build_grid, pattern_sets
from .whatif import rebuild_for_days, whatif_days

__version__ = "0.1.0"
