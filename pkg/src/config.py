"""
Runtime Settings
Process-wide defaults read from the environment (and an optional .env file)
"""

import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigError


@dataclass(frozen=True)
class Settings:
    """Defaults that are not part of any single experiment configuration"""
    log_level: str = "INFO"
    workers: int = 4
    default_seed: int = 0
    histogram_pairs: int = 0  # 0 means exhaustive

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> "Settings":
        """
        Build settings from CBE_* environment variables

        Args:
            dotenv_path: Optional .env file to load first (existing variables win)

        Returns:
            Settings instance
        """
        load_dotenv(dotenv_path=dotenv_path, override=False)
        try:
            settings = cls(
                log_level=os.getenv("CBE_LOG_LEVEL", cls.log_level).upper(),
                workers=int(os.getenv("CBE_WORKERS", cls.workers)),
                default_seed=int(os.getenv("CBE_DEFAULT_SEED", cls.default_seed)),
                histogram_pairs=int(os.getenv("CBE_HISTOGRAM_PAIRS", cls.histogram_pairs)),
            )
        except ValueError as e:
            raise ConfigError(f"Invalid CBE_* setting: {e}") from e

        if settings.workers < 1:
            raise ConfigError(f"CBE_WORKERS must be >= 1, got {settings.workers}")
        if settings.histogram_pairs < 0:
            raise ConfigError(f"CBE_HISTOGRAM_PAIRS must be >= 0, got {settings.histogram_pairs}")
        return settings
