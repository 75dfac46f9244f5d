"""
Configuration module for expofit

Handles environment variables, configuration files, named profiles and the
numerical tolerances used by the minimax and separable least-squares engines.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator


class MinimaxConfig(BaseModel):
    """Fixed-rate minimax solver settings"""

    certificate_tol: float = 1e-9
    exhaustive_max_n: int = 64
    overflow_limit: float = 700.0

    @field_validator("certificate_tol", "overflow_limit")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("exhaustive_max_n")
    @classmethod
    def validate_exhaustive(cls, v: int) -> int:
        if v < 3:
            raise ValueError("exhaustive_max_n must be at least 3")
        return v


class SearchConfig(BaseModel):
    """Rate search settings for the global fitter"""

    tol: float = 1e-10
    value_tol: float = 1e-12
    max_halvings_toward_zero: int = 60
    agreement_rtol: float = 1e-6
    workers: int = 1


class QuartetConfig(BaseModel):
    """Root isolation settings for four-point problems"""

    eta_start: float = 1e-3
    max_halvings: int = 40
    bisect_width: float = 1e-6
    xtol: float = 1e-14


class TacConfig(BaseModel):
    """Grid refinement settings for separable least squares"""

    tol: float = 1e-7
    points: int = 10
    shrink: float = 4.0
    max_iter: int = 200
    workers: int = 1

    @field_validator("points")
    @classmethod
    def validate_points(cls, v: int) -> int:
        if v < 2:
            raise ValueError("a grid level needs at least 2 points per parameter")
        return v

    @field_validator("shrink")
    @classmethod
    def validate_shrink(cls, v: float) -> float:
        if v <= 1:
            raise ValueError("shrink factor must exceed 1")
        return v


class LoggingConfig(BaseModel):
    """Logging configuration"""

    level: str = "WARNING"
    file_logging: bool = False
    log_directory: str = ".expofit_logs"
    max_log_size: int = 10 * 1024 * 1024  # 10MB
    include_timestamps: bool = True
    log_fits: bool = True


class Settings(BaseModel):
    """Application settings merged from defaults, config file, environment and kwargs"""

    minimax: MinimaxConfig = Field(default_factory=MinimaxConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    quartet: QuartetConfig = Field(default_factory=QuartetConfig)
    tac: TacConfig = Field(default_factory=TacConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    default_seed: Optional[int] = None

    debug_mode: bool = False
    verbose_mode: bool = False
    rich_output: bool = True

    current_profile: str = "default"
    profiles: Dict[str, Dict[str, Any]] = Field(default_factory=dict)

    def __init__(self, config_file: Optional[Path] = None, **kwargs: Any):
        self._load_environment()
        config_data = self._load_config_file(config_file)
        config_data = self._load_environment_overrides(config_data)
        merged_data = {**config_data, **kwargs}
        super().__init__(**merged_data)

    @staticmethod
    def _load_environment() -> None:
        """Load environment variables from .env file"""
        env_file = Path(".env")
        if env_file.exists():
            load_dotenv(env_file)

    @staticmethod
    def _load_environment_overrides(config_data: Dict[str, Any]) -> Dict[str, Any]:
        """Apply EXPOFIT_* environment variables on top of file values"""
        seed = os.getenv("EXPOFIT_SEED")
        if seed:
            config_data["default_seed"] = int(seed)

        level = os.getenv("EXPOFIT_LOG_LEVEL")
        if level:
            config_data.setdefault("logging", {})["level"] = level.upper()

        workers = os.getenv("EXPOFIT_WORKERS")
        if workers:
            config_data.setdefault("search", {})["workers"] = int(workers)
            config_data.setdefault("tac", {})["workers"] = int(workers)

        debug = os.getenv("EXPOFIT_DEBUG")
        if debug:
            config_data["debug_mode"] = debug.lower() in ("1", "true", "yes")

        return config_data

    @staticmethod
    def _load_config_file(config_file: Optional[Path] = None) -> Dict[str, Any]:
        """Load configuration from JSON/YAML file"""
        if config_file is not None:
            config_files = [Path(config_file)]
        else:
            config_files = [
                Path("expofit_config.json"),
                Path("expofit_config.yaml"),
                Path("expofit_config.yml"),
                Path("config/expofit.json"),
                Path("config/expofit.yaml"),
                Path("config/expofit.yml"),
                Path(".expofit/config.json"),
                Path(".expofit/config.yaml"),
                Path(".expofit/config.yml"),
            ]

        for candidate in config_files:
            if candidate.exists():
                try:
                    with open(candidate, "r", encoding="utf-8") as f:
                        if candidate.suffix.lower() in [".yaml", ".yml"]:
                            return yaml.safe_load(f) or {}
                        return json.load(f)
                except (json.JSONDecodeError, yaml.YAMLError, IOError) as e:
                    print(f"Warning: Could not load config file {candidate}: {e}")

        return {}

    def save_config(self, config_file: Optional[Path] = None, format: str = "json") -> Path:
        """Save current configuration to file"""
        if config_file is None:
            if format.lower() in ["yaml", "yml"]:
                config_file = Path("expofit_config.yaml")
            else:
                config_file = Path("expofit_config.json")

        config_file.parent.mkdir(parents=True, exist_ok=True)
        config_dict = self.model_dump(exclude={"profiles"})

        with open(config_file, "w", encoding="utf-8") as f:
            if format.lower() in ["yaml", "yml"]:
                yaml.dump(config_dict, f, default_flow_style=False, indent=2)
            else:
                json.dump(config_dict, f, indent=2, default=str)
        return config_file

    def load_profile(self, profile_name: str) -> bool:
        """Apply a named profile's values over the current settings"""
        if profile_name not in self.profiles:
            return False

        for key, value in self.profiles[profile_name].items():
            if not hasattr(self, key):
                continue
            current = getattr(self, key)
            if isinstance(current, BaseModel) and isinstance(value, dict):
                setattr(self, key, current.model_copy(update=value))
            else:
                setattr(self, key, value)

        self.current_profile = profile_name
        return True

    def save_profile(self, profile_name: str) -> None:
        """Save current settings as a profile"""
        self.profiles[profile_name] = self.model_dump(exclude={"profiles", "current_profile"})

    def list_profiles(self) -> List[str]:
        return list(self.profiles.keys())

    def delete_profile(self, profile_name: str) -> bool:
        if profile_name in self.profiles:
            del self.profiles[profile_name]
            if self.current_profile == profile_name:
                self.current_profile = "default"
            return True
        return False

    def validate_configuration(self) -> List[str]:
        """Return a list of configuration issues (empty when consistent)"""
        issues = []

        if self.logging.level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            issues.append(f"Unknown logging level: {self.logging.level}")
        if self.search.workers < 1 or self.tac.workers < 1:
            issues.append("workers must be at least 1")
        if self.search.tol <= 0 or self.tac.tol <= 0:
            issues.append("tolerances must be positive")
        if self.quartet.eta_start <= 0 or self.quartet.eta_start >= 1:
            issues.append("quartet.eta_start must lie in (0, 1)")
        if self.default_seed is not None and self.default_seed < 0:
            issues.append("default_seed must be non-negative")

        return issues


settings = Settings()


def reload_settings(config_file: Optional[Path] = None, **kwargs: Any) -> Settings:
    """Rebuild the global settings in place so existing imports see the new values"""
    fresh = Settings(config_file=config_file, **kwargs)
    for name in Settings.model_fields:
        setattr(settings, name, getattr(fresh, name))
    return settings
