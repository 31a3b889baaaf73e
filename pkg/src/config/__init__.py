"""Run configuration: YAML documents validated by pydantic models."""

import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from rich.console import Console
from rich.logging import RichHandler

from ..bath import DEFAULT_TOLERANCE, Bath, OhmicBath, TabulatedBath
from ..dd import PulseSequence, build_sequence
from ..errors import ConfigError
from ..models import CorrelationMode, PreparationKind, SequenceType
from ..spin import PreparedState

logger = logging.getLogger(__name__)

load_dotenv()

OUTPUT_DIR_ENV = "SBC_OUTPUT_DIR"
THREADS_ENV = "SBC_THREADS"


def default_output_dir() -> Path:
    return Path(os.getenv(OUTPUT_DIR_ENV, "output"))


def default_threads() -> int:
    try:
        return max(1, int(os.getenv(THREADS_ENV, "1")))
    except ValueError:
        logger.warning(f"{THREADS_ENV} is not an integer, using 1 worker")
        return 1


@dataclass
class LogConfig:
    """Logging configuration."""

    level: str = "INFO"
    file: Optional[str] = None
    format: str = "%(message)s"


def setup_logging(config: LogConfig) -> None:
    """Console logging through rich, plus an optional plain file log."""
    handlers: List[logging.Handler] = [RichHandler(console=Console(stderr=True), show_path=False)]
    if config.file:
        Path(config.file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(config.file)
        file_handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
        handlers.append(file_handler)
    logging.basicConfig(level=config.level.upper(), format=config.format, datefmt="[%X]", handlers=handlers, force=True)


def _existing_file(path: Optional[Path]) -> Optional[Path]:
    if path is not None and not Path(path).is_file():
        raise ValueError(f"file does not exist: {path}")
    return path


ExistingFile = Annotated[Optional[Path], AfterValidator(_existing_file)]


class BathSettings(BaseModel):
    """Ohmic parameters, or a tabulated spectrum file."""

    model_config = ConfigDict(extra="forbid")

    G: float = Field(0.001, ge=0)
    omega_c: float = Field(10.0, gt=0)
    beta: Union[float, Literal["inf"]] = "inf"
    spectrum_file: ExistingFile = None
    cutoff_scale: Optional[float] = Field(None, gt=0)
    tolerance: float = Field(DEFAULT_TOLERANCE, gt=0)

    @field_validator("beta")
    @classmethod
    def _positive_beta(cls, v):
        if v == "inf":
            return v
        if math.isnan(v) or v <= 0:
            raise ValueError("beta must be positive or 'inf'")
        return "inf" if math.isinf(v) else v

    @property
    def beta_value(self) -> float:
        return float("inf") if self.beta == "inf" else float(self.beta)

    def build(self) -> Bath:
        if self.spectrum_file is not None:
            scale = self.cutoff_scale if self.cutoff_scale is not None else self.omega_c
            return TabulatedBath.from_file(self.spectrum_file, scale, self.beta_value, self.tolerance)
        return OhmicBath(self.G, self.omega_c, self.beta_value)


class SystemSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    N: int = Field(2000, ge=1)
    omega0: float = 0.1
    preparation: PreparationKind = PreparationKind.PROJECTIVE
    amplitude_file: ExistingFile = None

    @model_validator(mode="after")
    def _amplitudes_are_projective(self):
        if self.amplitude_file is not None and self.preparation is not PreparationKind.PROJECTIVE:
            raise ValueError("amplitude_file applies to projective preparations only")
        return self

    def state(self) -> PreparedState:
        if self.preparation is PreparationKind.UNITARY:
            return PreparedState.rotated(self.N)
        if self.amplitude_file is not None:
            return PreparedState.from_file(self.amplitude_file, self.N)
        return PreparedState.coherent(self.N)


class EvolutionSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_max: float = Field(0.5, gt=0)
    n_points: int = Field(2000, ge=2)
    grid: Literal["linear", "log"] = "linear"
    t_min: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _log_start(self):
        if self.t_min is not None and self.t_min >= self.t_max:
            raise ValueError("t_min must be smaller than t_max")
        return self

    def times(self) -> np.ndarray:
        """Linear grids start at 0; log grids start at t_min (default t_max * 1e-4)."""
        if self.grid == "linear":
            return np.linspace(0.0, self.t_max, self.n_points)
        start = self.t_min if self.t_min is not None else self.t_max * 1e-4
        return np.geomspace(start, self.t_max, self.n_points)


class SequenceSettings(BaseModel):
    """``{type: bang_bang, n_pulses | interval}``, ``{type: udd, n_pulses}`` or ``{type: explicit, timings}``."""

    model_config = ConfigDict(extra="forbid")

    type: SequenceType
    n_pulses: Optional[int] = Field(None, ge=0)
    interval: Optional[float] = Field(None, gt=0)
    timings: Optional[List[float]] = None

    @model_validator(mode="after")
    def _complete(self):
        if self.type is SequenceType.EXPLICIT:
            if self.timings is None:
                raise ValueError("explicit sequence needs timings")
            if any(b <= a for a, b in zip(self.timings, self.timings[1:])):
                raise ValueError("pulse timings must be strictly increasing")
        elif self.type is SequenceType.BANG_BANG:
            if (self.n_pulses is None) == (self.interval is None):
                raise ValueError("bang_bang sequence needs exactly one of n_pulses or interval")
        elif self.n_pulses is None or self.n_pulses < 1:
            raise ValueError("udd sequence needs n_pulses >= 1")
        return self

    def build(self, total_time: float) -> PulseSequence:
        return build_sequence(self.type, total_time, self.n_pulses, self.interval, self.timings)


class ElementSettings(BaseModel):
    """A density-matrix element (m, n) to record alongside j_x."""

    model_config = ConfigDict(extra="forbid")

    m: float
    n: float

    @field_validator("m", "n")
    @classmethod
    def _half_integer(cls, v):
        if (2 * v) != int(2 * v):
            raise ValueError("must be an integer or half-integer")
        return v

    @property
    def twice(self):
        return int(2 * self.m), int(2 * self.n)


class OutputSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[Path] = None

    def resolve(self, name: str) -> Path:
        return self.path if self.path is not None else default_output_dir() / f"{name}.csv"


class RunConfig(BaseModel):
    """One evolution or pulsed-evolution run."""

    model_config = ConfigDict(extra="forbid")

    name: str = "run"
    bath: BathSettings = Field(default_factory=BathSettings)
    system: SystemSettings = Field(default_factory=SystemSettings)
    evolution: EvolutionSettings = Field(default_factory=EvolutionSettings)
    correlation_mode: CorrelationMode = CorrelationMode.EXACT
    sequence: Optional[SequenceSettings] = None
    element: Optional[ElementSettings] = None
    output: OutputSettings = Field(default_factory=OutputSettings)
    log: LogConfig = Field(default_factory=LogConfig)
    threads: int = Field(default_factory=default_threads, ge=1)

    @model_validator(mode="after")
    def _element_in_range(self):
        if self.element is not None:
            for label, v in (("m", self.element.m), ("n", self.element.n)):
                if abs(v) > self.system.N / 2 or (2 * v - self.system.N) % 2:
                    raise ValueError(f"element {label}={v:g} is not a valid m for N={self.system.N}")
        return self

    def describe(self) -> dict:
        """Parameters echoed into output metadata."""
        return self.model_dump(mode="json", exclude={"log", "output", "threads"})


def parse_config(data: dict, source: str = "<dict>") -> RunConfig:
    """Validate raw config data; pydantic diagnostics become a ConfigError naming the field."""
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as e:
        first = e.errors()[0]
        field_name = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(f"{source}: {first['msg']}", field=field_name) from e


class ConfigManager:
    """Load, validate and save a run configuration."""

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Args:
            config_path: Path to a YAML config file. If not provided,
                uses config/config.yaml or the template next to it.
        """
        self.config_path = Path(config_path) if config_path else self._find_config()
        self.run = RunConfig()
        self._load_config()

    def _find_config(self) -> Path:
        config_file = Path("config/config.yaml")
        if config_file.exists():
            return config_file
        template_file = Path("config/config.template.yaml")
        if template_file.exists():
            return template_file
        return config_file

    def _load_config(self) -> None:
        if not self.config_path.exists():
            logger.warning(f"Config file not found at {self.config_path}, using defaults")
            return
        try:
            with open(self.config_path, "r") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{self.config_path}: not valid YAML ({e})") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{self.config_path}: expected a mapping at the top level")
        self.run = parse_config(data, str(self.config_path))
        logger.info(f"Configuration loaded from {self.config_path}")

    @property
    def log(self) -> LogConfig:
        return self.run.log

    def save_config(self, path: Optional[Union[str, Path]] = None) -> Path:
        target = Path(path) if path else self.config_path
        data = self.run.model_dump(mode="json", exclude_none=True)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
        logger.info(f"Configuration saved to {target}")
        return target


__all__ = [
    "BathSettings",
    "ConfigManager",
    "ElementSettings",
    "EvolutionSettings",
    "LogConfig",
    "OutputSettings",
    "RunConfig",
    "SequenceSettings",
    "SystemSettings",
    "default_output_dir",
    "default_threads",
    "parse_config",
    "setup_logging",
]
