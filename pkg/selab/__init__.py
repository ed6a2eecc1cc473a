"""
selab: structural-entropy adversarial attacks on user-post graph detectors.

Builds low-entropy encoding trees over bipartite user-post graphs, ranks
users by an entropy-derived influence score, and trains cooperating
Q-learning agents that add engagement edges to flip a black-box fake post
detector, together with Random/DICE baselines and adversarial refinement.
"""

from selab.core.config_service import ExperimentConfig, load_experiment_config
from selab.core.exceptions import LabException
from selab.experiments.metrics import MetricsReport
from selab.experiments.report import emit_report
from selab.experiments.runner import run_experiment

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "LabException",
    "MetricsReport",
    "emit_report",
    "load_experiment_config",
    "run_experiment",
    "__version__",
]
