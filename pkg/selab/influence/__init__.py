"""
Network influence, its monotonicity check and malicious account categorization.
"""

from .categorize import AGENTS, AccountGroups, categorize, rank_users, slice_bounds
from .metric import InfluenceTable, compute_influence, influence, influence_single_layer
from .monotonicity import (
    MonotonicityReport,
    density_bound,
    transform,
    transform_derivative,
    verify_influence_monotonicity,
)

__all__ = [
    "AGENTS",
    "AccountGroups",
    "categorize",
    "rank_users",
    "slice_bounds",
    "InfluenceTable",
    "compute_influence",
    "influence",
    "influence_single_layer",
    "MonotonicityReport",
    "density_bound",
    "transform",
    "transform_derivative",
    "verify_influence_monotonicity",
]
