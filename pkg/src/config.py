"""
stabkit - Runtime settings

Settings come from the environment, optionally seeded from a .env file.
CLI flags and create_app() overrides take precedence over these values.
"""

import os
from dataclasses import dataclass
from typing import Mapping, Optional

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    """Resolved runtime configuration."""
    seed: int = 0
    database_url: str = "sqlite:///stabkit.db"
    log_level: str = "WARNING"
    jobs: int = 1
    exhaustive_limit: int = 13
    host: str = "127.0.0.1"
    port: int = 5000


def load_settings(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Build Settings from environment variables.

    Args:
        environ: Mapping to read instead of os.environ. When omitted the
            process environment is used after loading a .env file.

    Returns:
        Settings: The resolved settings. Unset variables keep their defaults.
    """
    if environ is None:
        load_dotenv()
        environ = os.environ

    defaults = Settings()
    return Settings(
        seed=int(environ.get('STABKIT_SEED', defaults.seed)),
        database_url=environ.get('STABKIT_DATABASE_URL', defaults.database_url),
        log_level=environ.get('STABKIT_LOG_LEVEL', defaults.log_level).upper(),
        jobs=max(1, int(environ.get('STABKIT_JOBS', defaults.jobs))),
        exhaustive_limit=int(environ.get('STABKIT_EXHAUSTIVE_LIMIT', defaults.exhaustive_limit)),
        host=environ.get('STABKIT_HOST', defaults.host),
        port=int(environ.get('STABKIT_PORT', defaults.port)),
    )
