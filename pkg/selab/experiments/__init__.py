"""
Experiment orchestration and report emission.
"""

from .metrics import CLEAN, PHASES, REFINED, CellMetrics, MetricsReport, SeedRow, degree_bucket, sign_test
from .report import emit_report, emit_sweep
from .runner import (
    STRATEGY_VARIANTS,
    load_data,
    run_account_sweep,
    run_agent_ablation,
    run_experiment,
    run_height_sweep,
    run_seed,
    run_strategy_ablation,
    select_targets,
)

__all__ = [
    "CLEAN",
    "PHASES",
    "REFINED",
    "CellMetrics",
    "MetricsReport",
    "SeedRow",
    "degree_bucket",
    "sign_test",
    "emit_report",
    "emit_sweep",
    "STRATEGY_VARIANTS",
    "load_data",
    "run_account_sweep",
    "run_agent_ablation",
    "run_experiment",
    "run_height_sweep",
    "run_seed",
    "run_strategy_ablation",
    "select_targets",
]
