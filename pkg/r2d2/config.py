"""
Configuration management for the r2d2 pipeline.
Defaults come from R2D2_* environment variables (or .env) and are
overridden per invocation by CLI flags.
"""

from typing import Optional, Union

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


VALID_OPTIMIZERS = ["sgd", "nag", "adagrad", "adadelta"]


class Settings(BaseSettings):
    """Pipeline settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="R2D2_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # ========================================================================
    # ENCODING
    # ========================================================================
    width_policy: str = Field(default="auto")
    input_size: int = Field(default=64)
    png_compress_level: int = Field(default=0, ge=0, le=9)
    strict_dex: bool = Field(default=False)

    # ========================================================================
    # TRAINING
    # ========================================================================
    optimizer: str = Field(default="sgd")
    learning_rate: float = Field(default=0.01, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    rho: float = Field(default=0.95)
    eps: float = Field(default=1e-8)
    epochs: int = Field(default=30, ge=1)
    batch_size: int = Field(default=32, ge=1)
    seed: int = Field(default=42)
    train_workers: int = Field(default=1, ge=1)

    # ========================================================================
    # SCANNING / EVALUATION
    # ========================================================================
    threshold: float = Field(default=0.5)
    scan_workers: int = Field(default=4, ge=1)

    # ========================================================================
    # DISTANCE
    # ========================================================================
    levenshtein_cap: int = Field(default=65536, ge=1)
    levenshtein_band: Optional[int] = Field(default=None)

    # ========================================================================
    # OBSERVABILITY
    # ========================================================================
    structured_logging: bool = Field(default=False)
    log_level: str = Field(default="WARNING")
    metrics_file: Optional[str] = Field(default=None)

    @field_validator("optimizer")
    @classmethod
    def validate_optimizer(cls, v):
        """Ensure optimizer is supported."""
        if v.lower() not in VALID_OPTIMIZERS:
            raise ValueError(f"R2D2_OPTIMIZER must be one of: {VALID_OPTIMIZERS}")
        return v.lower()

    @field_validator("threshold")
    @classmethod
    def validate_threshold(cls, v):
        """Threshold is a probability."""
        if not 0.0 <= v <= 1.0:
            raise ValueError("threshold must be within [0, 1]")
        return v

    @field_validator("input_size")
    @classmethod
    def validate_input_size(cls, v):
        """Stem pooling and the 5x5 branch need a few pixels to work with."""
        if v < 8:
            raise ValueError("input_size must be at least 8")
        return v

    @field_validator("width_policy")
    @classmethod
    def validate_width_policy(cls, v):
        """Either 'auto' or a positive integer width."""
        v = str(v).strip().lower()
        if v == "auto":
            return v
        if not v.isdigit() or int(v) < 1:
            raise ValueError("width_policy must be 'auto' or a positive integer")
        return v

    @field_validator("rho")
    @classmethod
    def validate_rho(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("rho must be within (0, 1)")
        return v

    @field_validator("eps")
    @classmethod
    def validate_eps(cls, v):
        if v <= 0.0:
            raise ValueError("eps must be positive")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        v = v.upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level: {v}")
        return v

    def get_width(self) -> Union[str, int]:
        """Width policy as 'auto' or an int."""
        return "auto" if self.width_policy == "auto" else int(self.width_policy)


# Global settings instance
settings = Settings()
