"""
Runtime settings loaded from environment variables using dotenv + pydantic.

Only execution knobs live here (concurrency, chunking, quadrature budgets,
validation sizes). Constants of the channel model are module constants.
"""

from __future__ import annotations

import os
from functools import lru_cache
from typing import List, Literal

from dotenv import load_dotenv
from pydantic import BaseModel, Field


class Settings(BaseModel):
    # General
    log_level: str = Field(default="INFO")

    # Performance
    max_concurrency: int = Field(default=4, ge=1)
    # Samples per Monte Carlo chunk; fixes the stream layout, so it must not
    # depend on the worker count.
    mc_chunk_size: int = Field(default=65536, ge=1)
    default_seed: int = Field(default=2017, ge=0)

    # Quadrature oracle
    quad_epsabs: float = Field(default=1e-10, gt=0)
    quad_limits: List[int] = Field(default_factory=lambda: [50, 200, 1000])

    # Monte Carlo ratio estimators
    min_conditioning_samples: int = Field(default=100, ge=1)

    # Self-check suite
    validate_grid_size: int = Field(default=200, ge=1)
    validate_mc_samples: int = Field(default=1_000_000, ge=0)
    validate_mc_configs: int = Field(default=20, ge=1)

    # Output
    output_format: Literal["csv", "json"] = Field(default="csv")


def _parse_int_list(value: str | None, default: List[int]) -> List[int]:
    if not value:
        return list(default)
    return [int(v.strip()) for v in value.split(",") if v.strip()]


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    # Load .env if present
    load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), ".env"))

    return Settings(
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        max_concurrency=int(os.getenv("MAX_CONCURRENCY", "4")),
        mc_chunk_size=int(os.getenv("MC_CHUNK_SIZE", "65536")),
        default_seed=int(os.getenv("DEFAULT_SEED", "2017")),
        quad_epsabs=float(os.getenv("QUAD_EPSABS", "1e-10")),
        quad_limits=_parse_int_list(os.getenv("QUAD_LIMITS"), [50, 200, 1000]),
        min_conditioning_samples=int(os.getenv("MIN_CONDITIONING_SAMPLES", "100")),
        validate_grid_size=int(os.getenv("VALIDATE_GRID_SIZE", "200")),
        validate_mc_samples=int(os.getenv("VALIDATE_MC_SAMPLES", "1000000")),
        validate_mc_configs=int(os.getenv("VALIDATE_MC_CONFIGS", "20")),
        output_format=os.getenv("OUTPUT_FORMAT", "csv"),
    )
