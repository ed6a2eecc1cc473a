"""
Core infrastructure: configuration, exceptions, logging and seeding.
"""

from .config_service import (
    DEFAULT_ADJUSTING_PARAMETER,
    AgentToggles,
    AttackHyperparams,
    Budgets,
    DatasetFiles,
    DetectorHyperparams,
    ExperimentConfig,
    LabSettings,
    StrategyToggles,
    SyntheticSpec,
    get_settings,
    load_experiment_config,
    parse_experiment_config,
)
from .exceptions import (
    AgentExhaustedError,
    AttackError,
    BlackBoxViolationError,
    ConfigurationError,
    DanglingEndpointError,
    DegenerateLabelsError,
    DetectorError,
    DimensionMismatchError,
    DuplicateEdgeError,
    EmptyGraphError,
    EmptySubsetError,
    EntropyError,
    GraphError,
    InfeasibleBudgetError,
    InfluenceError,
    InvalidAdjustingParameterError,
    LabException,
    MonotonicRegimeError,
    PhaseError,
    ReportError,
    RootNodeError,
    SyntheticSpecError,
    TreeInvariantError,
    UndefinedCosineError,
    UnknownTargetError,
    UnknownVertexError,
)
from .logger_manager import configure_logging, get_logger, log_execution_time, log_phase
from .seeding import derive_seed, phase_rng

__all__ = [
    # Configuration
    "DEFAULT_ADJUSTING_PARAMETER",
    "AgentToggles",
    "AttackHyperparams",
    "Budgets",
    "DatasetFiles",
    "DetectorHyperparams",
    "ExperimentConfig",
    "LabSettings",
    "StrategyToggles",
    "SyntheticSpec",
    "get_settings",
    "load_experiment_config",
    "parse_experiment_config",
    # Exceptions
    "AgentExhaustedError",
    "AttackError",
    "BlackBoxViolationError",
    "ConfigurationError",
    "DanglingEndpointError",
    "DegenerateLabelsError",
    "DetectorError",
    "DimensionMismatchError",
    "DuplicateEdgeError",
    "EmptyGraphError",
    "EmptySubsetError",
    "EntropyError",
    "GraphError",
    "InfeasibleBudgetError",
    "InfluenceError",
    "InvalidAdjustingParameterError",
    "LabException",
    "MonotonicRegimeError",
    "PhaseError",
    "ReportError",
    "RootNodeError",
    "SyntheticSpecError",
    "TreeInvariantError",
    "UndefinedCosineError",
    "UnknownTargetError",
    "UnknownVertexError",
    # Logging
    "configure_logging",
    "get_logger",
    "log_execution_time",
    "log_phase",
    # Seeding
    "derive_seed",
    "phase_rng",
]
