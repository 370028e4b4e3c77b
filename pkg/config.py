from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Runtime knobs; every key can be set as TREEPACK_<KEY> or in a dotenv file."""

    model_config = SettingsConfigDict(env_prefix="TREEPACK_", env_file=".env", extra="ignore")

    # Exhaustive enumeration guards
    guard_n_enumeration: int = 8
    guard_n_brute_force: int = 7
    guard_caterpillar_pairs: int = 50_000_000

    # Rejection packer: attempts before the exhaustive fallback = fallback_factor / p_lower
    fallback_factor: int = 50

    # Monte Carlo defaults
    epsilon: float = 0.1
    delta: float = 0.05
    workers: int = 1
    batch_size: int = 4096

    log_level: str = "INFO"


def load_settings(config_file: Optional[str] = None) -> Settings:
    """Build settings, reading `config_file` (dotenv format) instead of `.env` when given."""
    if config_file:
        return Settings(_env_file=config_file)
    return Settings()


settings = Settings()
