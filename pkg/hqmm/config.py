"""Application configuration."""

import math

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="HQMM_",
        case_sensitive=False,
        extra="ignore",
    )
    app_name: str = "causal-hqmm"
    app_version: str = "1.0.0"
    log_level: str = "INFO"

    # Numerics
    tolerance: float = 1e-10  # Hermiticity / PSD / normalisation / unitality checks
    jacobi_max_sweeps: int = 100

    # Randomness (64-bit seed, embedded in equivalence reports)
    seed: int = 20240917

    # Entropy reporting: "nat" or "bit"
    log_base: str = "nat"

    # Default theta grid for qubit reports
    theta_grid_points: int = 33
    theta_grid_min: float = math.pi / 16
    theta_grid_max: float = 15 * math.pi / 16

    equivalence_trials: int = 100
    max_workers: int = 4

    # CSV output
    csv_digits: int = 17

    @field_validator("log_base")
    @classmethod
    def _log_base(cls, v: str) -> str:
        if v.lower() not in ("nat", "bit"):
            raise ValueError("log_base must be 'nat' or 'bit'")
        return v.lower()

    @field_validator("seed")
    @classmethod
    def _seed(cls, v: int) -> int:
        if not 0 <= v < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v

    @field_validator("tolerance")
    @classmethod
    def _tolerance(cls, v: float) -> float:
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("tolerance must be a positive finite number")
        return v


settings = Settings()
