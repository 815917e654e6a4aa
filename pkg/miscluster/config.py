"""Configuration management"""
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

JOBS_ENV_VAR = "MISCLUSTER_JOBS"
DEFAULT_MISSING_TOKENS = ("?", "")
DEFAULT_ALGORITHMS = ("mis", "mis-auto", "kmodes")


def default_jobs() -> int:
    """Parallelism degree from the environment, else the available cores"""
    raw = os.getenv(JOBS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{JOBS_ENV_VAR} must be an integer, got {raw!r}")
        if value == 0:
            raise ValueError(f"{JOBS_ENV_VAR} must be non-zero")
        return value
    return os.cpu_count() or 1


class IngestOptions(BaseModel):
    """How a delimited file is turned into a CategoricalDataset"""

    model_config = ConfigDict(frozen=True)

    delimiter: str = ","
    header: bool = False
    class_column: Optional[int] = None
    drop_columns: List[int] = Field(default_factory=list)
    missing_tokens: List[str] = Field(default_factory=lambda: list(DEFAULT_MISSING_TOKENS))
    attribute_names: Optional[List[str]] = None
    strip_whitespace: bool = True
    encoding: str = "utf-8"

    @field_validator("delimiter")
    @classmethod
    def _single_character(cls, value: str) -> str:
        if len(value) != 1:
            raise ValueError(f"delimiter must be a single character, got {value!r}")
        return value


class EngineConfig(BaseModel):
    """MIS clustering mode and stopping knobs"""

    model_config = ConfigDict(frozen=True)

    mode: Literal["fixed-k", "auto"] = "auto"
    k: Optional[int] = None
    min_cluster_fraction: float = Field(0.0, ge=0.0, lt=1.0)
    auto_stop_ratio: float = Field(0.9, gt=0.0)
    n_jobs: int = 1

    @model_validator(mode="after")
    def _check_mode(self) -> "EngineConfig":
        if self.mode == "fixed-k":
            if self.k is None or self.k < 2:
                raise ValueError("fixed-k mode requires k >= 2")
        elif self.k is not None:
            raise ValueError("k is only meaningful in fixed-k mode")
        if self.n_jobs == 0:
            raise ValueError("n_jobs must be non-zero")
        return self

    @classmethod
    def fixed_k(cls, k: int, **kwargs) -> "EngineConfig":
        return cls(mode="fixed-k", k=k, **kwargs)

    @classmethod
    def auto(cls, **kwargs) -> "EngineConfig":
        return cls(mode="auto", **kwargs)

    def describe(self) -> str:
        return f"fixed-k(k={self.k})" if self.mode == "fixed-k" else f"auto(theta={self.auto_stop_ratio})"


class ReportOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    top_n: int = Field(5, ge=1)
    max_categories: Optional[int] = Field(None, ge=1)
    format: Literal["text", "jsonl"] = "text"


class KModesOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_init: int = Field(16, ge=1)
    max_iter: int = Field(100, ge=1)
    seed: int = 0


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, after config file and flags are merged"""

    command: Optional[str] = None
    input: Optional[Path] = None
    out: Optional[Path] = None
    result: Optional[Path] = None
    labels_from: Optional[Path] = None
    manifest: Optional[Path] = None
    data_dir: Optional[Path] = None
    spec: Optional[Path] = None
    dataset: Optional[str] = None
    algorithms: List[str] = Field(default_factory=lambda: list(DEFAULT_ALGORITHMS))
    seed: int = 0
    explain: bool = False
    jobs: Optional[int] = None
    log_level: str = "WARNING"

    ingest: IngestOptions = Field(default_factory=IngestOptions)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    report: ReportOptions = Field(default_factory=ReportOptions)
    kmodes: KModesOptions = Field(default_factory=KModesOptions)

    @field_validator("algorithms")
    @classmethod
    def _known_algorithms(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in DEFAULT_ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithm(s): {', '.join(unknown)}")
        return value

    @property
    def n_jobs(self) -> int:
        return self.jobs if self.jobs is not None else default_jobs()

    def engine_config(self) -> EngineConfig:
        return self.engine.model_copy(update={"n_jobs": self.n_jobs})


class Config:
    """Dotted-key view over a YAML configuration document"""

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = config_path
        self.data: Dict[str, Any] = {}

    @classmethod
    def load(cls, config_path: Path) -> "Config":
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Config not found at {config_path}")

        config = cls(config_path)
        with open(config_path) as f:
            loaded = yaml.safe_load(f)
        if loaded is not None and not isinstance(loaded, dict):
            raise ValueError(f"Config at {config_path} must be a mapping")
        config.data = loaded or {}
        return config

    def save(self):
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, "w") as f:
            yaml.dump(self.data, f, default_flow_style=False, sort_keys=False)

    def get(self, key: str, default=None):
        keys = key.split(".")
        value = self.data
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
        return value if value is not None else default

    def set(self, key: str, value):
        keys = key.split(".")
        data = self.data
        for k in keys[:-1]:
            if not isinstance(data.get(k), dict):
                data[k] = {}
            data = data[k]
        data[keys[-1]] = value

    def to_run_config(self) -> RunConfig:
        return RunConfig.model_validate(self.data)


def write_default_config(config_path: Path) -> Config:
    """Write a config file that spells out every default"""
    config = Config(Path(config_path))
    config.data = RunConfig().model_dump(mode="json", exclude={"command"})
    config.save()
    return config
