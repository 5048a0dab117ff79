"""
Configuration settings for cylgreen using Pydantic Settings.
Loads solver defaults from environment variables with type validation.
"""

from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.config import constants as C

# Compute project root once (used for .env path)
_PROJECT_ROOT = Path(__file__).parent.parent.parent


class Settings(BaseSettings):
    """Solver settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=str(_PROJECT_ROOT / ".env"),  # Absolute path to .env
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Special functions
    max_order: int = Field(default=C.MAX_ORDER, ge=0, description="Largest Bessel order accepted")

    # Regime classification
    small_argument_coeff: float = Field(default=C.SMALL_ARGUMENT_COEFF, gt=0)
    large_imag_threshold: float = Field(default=C.LARGE_IMAG_THRESHOLD, gt=0)
    large_abs_offset: float = Field(default=C.LARGE_ABS_OFFSET, ge=0)
    moderate_threshold: float = Field(
        default=C.MODERATE_THRESHOLD, gt=1, description="T_m for moderate-argument rescaling"
    )

    # Summation
    n_max: int = Field(default=C.DEFAULT_N_MAX, ge=0, description="Highest azimuthal order")
    n_int: int = Field(default=C.DEFAULT_N_INT, ge=2, description="Total quadrature points")
    points_per_panel: int = Field(default=C.POINTS_PER_PANEL, ge=2)
    mode_tolerance: float = Field(default=C.MODE_TOLERANCE, gt=0)
    fold: bool = Field(default=True, description="Fold the +-n modal sum")
    fold_kz: bool = Field(default=True, description="Fold +-kz on symmetric paths")

    # Integration path
    detour_height_factor: float = Field(default=C.DETOUR_HEIGHT_FACTOR, gt=0)
    detour_re_fraction: float = Field(default=C.DETOUR_RE_FRACTION, ge=0)
    detour_span: float = Field(default=C.DETOUR_SPAN, gt=1)
    truncation_multiple: float = Field(default=C.TRUNCATION_MULTIPLE, gt=1)
    dsip_minor_fraction: float = Field(default=C.DSIP_MINOR_FRACTION, gt=0)
    switch_distance_factor: float = Field(default=C.SWITCH_DISTANCE_FACTOR, gt=0)
    tail_angle: float = Field(default=C.TAIL_ANGLE, ge=0, lt=0.785)
    tail_decay: float = Field(default=C.TAIL_DECAY, gt=0)
    tail_tolerance: float = Field(default=C.TAIL_TOLERANCE, gt=0)
    max_extension_panels: int = Field(default=C.MAX_EXTENSION_PANELS, ge=0)

    # Geometry and coefficient guards
    interface_tolerance: float = Field(default=C.INTERFACE_TOLERANCE, gt=0)
    coefficient_magnitude_limit: float = Field(default=C.COEFFICIENT_MAGNITUDE_LIMIT, gt=0)

    # Batch execution
    threads: int = Field(default=1, ge=1, description="Receiver worker count")

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        """Upper-case the level name so env values like 'debug' work."""
        return str(v).strip().upper()


# Global settings instance
settings = Settings()
