"""Configuration models for certification and enumeration runs."""

import os
from enum import StrEnum
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from toroidal_matchings.constants import (
    DEFAULT_PFAFFIAN_LIMIT,
    ENV_FILE,
    PFAFFIAN_LIMIT_ENV_VAR,
    THREADS_ENV_VAR,
    _resolve_guard,
)


class VerificationMode(StrEnum):
    VERIFY = "verify"
    FAST = "fast"


class HarnessConfig(BaseModel):
    """Configuration for a certification run."""

    guard: int = Field(default=48, ge=1, description="Largest m*n run exhaustively")
    threads: int = Field(default=1, ge=1, description="Worker processes")
    sample_size: Optional[int] = Field(
        default=None,
        ge=1,
        description="Sample this many matchings instead of enumerating all",
    )
    seed: int = Field(default=0, description="Seed for sampling and random cycles")
    interior_samples: int = Field(
        default=1000, ge=0, description="Random cycles for the interior checks"
    )
    pfaffian_limit: int = Field(
        default=DEFAULT_PFAFFIAN_LIMIT, ge=1, description="Largest m*n given exact Pfaffian checks"
    )
    mode: VerificationMode = VerificationMode.VERIFY
    timings: bool = Field(default=False, description="Report wall-clock per check")

    model_config = {"frozen": True}

    @classmethod
    def from_env(cls, **overrides: object) -> "HarnessConfig":
        """Build a config from `.env.local` and the process environment.

        Explicit keyword overrides win over the environment.
        """
        load_dotenv(ENV_FILE)
        values: dict[str, object] = {"guard": _resolve_guard()}
        threads = os.environ.get(THREADS_ENV_VAR)
        if threads:
            values["threads"] = int(threads)
        limit = os.environ.get(PFAFFIAN_LIMIT_ENV_VAR)
        if limit:
            values["pfaffian_limit"] = int(limit)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def exhaustive(self) -> bool:
        return self.sample_size is None
