"""
Configuration service: process settings from the environment and experiment
configuration documents.
"""

import json
import logging
import math
import os
from selab._compat import StrEnum
from functools import lru_cache
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_ADJUSTING_PARAMETER = 2.0 / math.e


class EnvironmentEnum(StrEnum):
    DEVELOPMENT = "development"
    TEST = "test"
    PRODUCTION = "production"


class LabSettings(BaseSettings):
    """Process-level settings read from SELAB_* environment variables"""

    environment: EnvironmentEnum = Field(
        default=EnvironmentEnum(os.getenv("SELAB_ENVIRONMENT", EnvironmentEnum.DEVELOPMENT.value)),
        validation_alias="SELAB_ENVIRONMENT",
    )
    log_level: str = Field(default="INFO", validation_alias="SELAB_LOG_LEVEL")
    json_logs: bool = Field(default=True, validation_alias="SELAB_JSON_LOGS")
    progress: bool = Field(default=False, validation_alias="SELAB_PROGRESS")

    model_config = SettingsConfigDict(
        env_prefix="SELAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level")
    def validate_log_level(cls, v):
        allowed = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if str(v).upper() not in allowed:
            raise ValueError(f"Log level must be one of {allowed}")
        return str(v).upper()


@lru_cache(maxsize=1)
def get_settings() -> LabSettings:
    """Get current settings (cached singleton)"""
    settings = LabSettings()
    logger.debug(f"Settings loaded for environment: {settings.environment}")
    return settings


# ---------------------------------------------------------------------------
# Experiment configuration models
# ---------------------------------------------------------------------------
class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SyntheticSpec(_Frozen):
    """Planted-community generator settings"""

    communities: int = Field(default=2, ge=1, description="Number of planted communities")
    users_per_community: int = Field(default=100, ge=1)
    posts_per_community: int = Field(default=20, ge=1)
    p_intra: float = Field(default=0.15, ge=0.0, le=1.0, description="Edge probability inside a community")
    p_inter: float = Field(default=0.01, ge=0.0, le=1.0, description="Edge probability across communities")
    feature_dim: int = Field(default=8, ge=2)
    noise: float = Field(default=0.35, ge=0.0, description="Std of the Gaussian feature noise")
    fake_fraction: float = Field(default=0.3, ge=0.0, le=1.0)
    homophily: float = Field(
        default=0.8,
        ge=0.0,
        le=1.0,
        description="Engagement boost (1 + h) when a user's leaning matches the post label, (1 - h) otherwise",
    )
    label_signal: float = Field(default=1.0, ge=0.0, description="Length of the fake axis in user features")
    post_signal: float = Field(default=0.5, ge=0.0, description="Length of the fake axis in post features")
    fake_user_fraction: float = Field(default=0.3, ge=0.0, le=1.0, description="Share of fake-leaning users")

    @property
    def user_count(self) -> int:
        return self.communities * self.users_per_community

    @property
    def post_count(self) -> int:
        return self.communities * self.posts_per_community


class Budgets(_Frozen):
    """Malicious account budgets per group"""

    bots: int = Field(default=20, ge=0)
    cyborgs: int = Field(default=10, ge=0)
    workers: int = Field(default=4, ge=0)

    @property
    def total(self) -> int:
        return self.bots + self.cyborgs + self.workers

    @classmethod
    def parse(cls, text: str) -> "Budgets":
        """Parse a ``bots,cyborgs,workers`` triple."""
        try:
            bots, cyborgs, workers = (int(part) for part in text.split(","))
        except ValueError as e:
            raise ConfigurationError(f"budgets must look like '100,50,20', got '{text}'") from e
        return cls(bots=bots, cyborgs=cyborgs, workers=workers)


class DetectorHyperparams(_Frozen):
    """Message-passing detector hyperparameters"""

    hidden: int = Field(default=16, ge=1)
    learning_rate: float = Field(default=0.05, gt=0.0)
    epochs: int = Field(default=300, ge=0)
    weight_decay: float = Field(default=1e-4, ge=0.0)
    optimizer: Literal["sgd", "adam"] = "adam"
    refine_epochs: int = Field(default=100, ge=0, description="Epochs of adversarial refinement")


class AttackHyperparams(_Frozen):
    """Multi-agent Q-learning hyperparameters"""

    episodes: int = Field(default=30, ge=0)
    t_max: Optional[int] = Field(default=None, ge=0, description="Defaults to the total budget")
    t_up: int = Field(default=10, ge=1)
    gamma: float = Field(default=0.95, ge=0.0, lt=1.0)
    learning_rate: float = Field(default=0.1, gt=0.0, le=1.0)
    epsilon_start: float = Field(default=1.0, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=0.05, ge=0.0, le=1.0)
    epsilon_decay_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    root_fallback: float = Field(default=0.01, gt=0.0, description="Sampling weight with root-only ancestry")
    argmax_aggregation: bool = False
    early_stop_eval: bool = True


class StrategyToggles(_Frozen):
    """Enabled attack strategies"""

    direct: bool = True
    indirect: bool = True
    feedback: bool = True

    @model_validator(mode="after")
    def check_any(self):
        if not (self.direct or self.indirect or self.feedback):
            raise ValueError("at least one attack strategy must be enabled")
        return self


class AgentToggles(_Frozen):
    """Enabled agents (single-agent variants disable two of them)"""

    bot: bool = True
    cyborg: bool = True
    worker: bool = True

    @model_validator(mode="after")
    def check_any(self):
        if not (self.bot or self.cyborg or self.worker):
            raise ValueError("at least one agent must be enabled")
        return self


class DatasetFiles(_Frozen):
    """CSV dataset contract"""

    edges_csv: Path
    labels_csv: Path
    features_csv: Path


class ExperimentConfig(_Frozen):
    """A complete experiment definition"""

    name: str = "default"
    synthetic: Optional[SyntheticSpec] = Field(default_factory=SyntheticSpec)
    graph_path: Optional[Path] = Field(default=None, description="Serialized graph JSON")
    dataset: Optional[DatasetFiles] = None
    weighted: bool = True
    height: int = Field(default=3, ge=2, description="Encoding tree height K")
    k: Optional[int] = Field(default=None, ge=1, description="Community level; defaults to K - 1")
    c: float = Field(default=DEFAULT_ADJUSTING_PARAMETER, gt=0.0)
    influence_mode: Literal["tree", "single_layer"] = "tree"
    tolerance: float = Field(default=1e-9, gt=0.0)
    budgets: Budgets = Field(default_factory=Budgets)
    detector: DetectorHyperparams = Field(default_factory=DetectorHyperparams)
    attack: AttackHyperparams = Field(default_factory=AttackHyperparams)
    strategies: StrategyToggles = Field(default_factory=StrategyToggles)
    agents: AgentToggles = Field(default_factory=AgentToggles)
    target_label: Literal["fake", "real"] = "fake"
    target_split: Literal["heldout", "test", "all"] = "heldout"
    baselines: List[Literal["random", "dice"]] = Field(default_factory=lambda: ["random", "dice"])
    defend: bool = True
    seeds: List[int] = Field(default_factory=lambda: [0])
    output_dir: Path = Path("runs/default")

    @field_validator("seeds")
    def validate_seeds(cls, v):
        if not v:
            raise ValueError("at least one seed is required")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be distinct")
        return v

    @model_validator(mode="after")
    def check_consistency(self):
        if self.k is not None and self.k >= self.height:
            raise ValueError(f"k must be < K, got k={self.k}, K={self.height}")
        sources = [self.graph_path is not None, self.dataset is not None]
        if sum(sources) > 1:
            raise ValueError("choose at most one of graph_path and dataset")
        if not any(sources) and self.synthetic is None:
            raise ValueError("a data source is required: synthetic, graph_path or dataset")
        if self.synthetic is not None and not any(sources):
            if self.budgets.total > self.synthetic.user_count:
                raise ValueError(
                    f"budgets total {self.budgets.total} exceeds {self.synthetic.user_count} users"
                )
        return self

    @property
    def community_level(self) -> int:
        return self.k if self.k is not None else self.height - 1

    @property
    def t_max(self) -> int:
        return self.attack.t_max if self.attack.t_max is not None else self.budgets.total

    @property
    def uses_synthetic(self) -> bool:
        return self.graph_path is None and self.dataset is None


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Load and validate an experiment configuration JSON document."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    return parse_experiment_config(raw)


def parse_experiment_config(raw: dict) -> ExperimentConfig:
    """Validate a raw configuration mapping."""
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(
            "invalid experiment configuration",
            {"errors": json.loads(e.json(include_url=False))},
        ) from e
    logger.info(f"Experiment configuration '{config.name}' loaded with {len(config.seeds)} seed(s)")
    return config
