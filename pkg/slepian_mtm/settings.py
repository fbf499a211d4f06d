"""
Runtime settings read from the environment (and a .env file when present)
"""

import logging
import os
from functools import lru_cache

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, Field, field_validator

ENV_FILE = find_dotenv(usecwd=True)
if ENV_FILE:
    load_dotenv(ENV_FILE)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings(BaseModel):
    threads: int = Field(..., ge=1, description="Upper bound on worker threads")
    log_level: str = Field("INFO", description="Logging level name")
    out_dir: str = Field("results", description="Default output directory")
    trial_block: int = Field(64, ge=1, description="Monte-Carlo trials per work unit")

    @field_validator("log_level")
    @classmethod
    def known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level {value!r}")
        return value

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            threads=int(os.getenv("SLEPIAN_MTM_THREADS", os.cpu_count() or 1)),
            log_level=os.getenv("SLEPIAN_MTM_LOG_LEVEL", "INFO"),
            out_dir=os.getenv("SLEPIAN_MTM_OUT", "results"),
            trial_block=int(os.getenv("SLEPIAN_MTM_TRIAL_BLOCK", 64)),
        )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Settings for this process; tests clear the cache after patching the environment"""
    return Settings.from_env()


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
