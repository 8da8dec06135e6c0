"""Configuration management."""
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings, read from the environment and an optional .env file."""

    model_config = SettingsConfigDict(
        env_prefix="EQUINET_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Runtime
    LOG_LEVEL: str = "INFO"
    LOG_TO_FILE: bool = True
    JOBS: int = 1
    OUT_DIR: Optional[Path] = Field(default=None, validation_alias="EQUINET_OUT")

    # Paths
    BASE_DIR: Path = Path(__file__).parent.parent.parent
    DATA_DIR: Path = BASE_DIR / "data"
    EXPERIMENTS_DIR: Path = DATA_DIR / "experiments"
    LOGS_DIR: Path = BASE_DIR / "logs"
    OUTPUT_DIR: Path = BASE_DIR / "output"

    # Data files
    CONFIG_FILE: Path = DATA_DIR / "config.json"

    def validate_runtime(self) -> bool:
        """Validate critical settings."""
        if self.LOG_LEVEL.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"LOG_LEVEL must be a logging level name, got {self.LOG_LEVEL!r}")
        if self.JOBS < 1:
            raise ValueError(f"JOBS must be >= 1, got {self.JOBS}")
        return True


settings = Settings()
