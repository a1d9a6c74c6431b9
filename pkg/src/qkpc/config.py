"""Application settings loaded from the environment and `.env.local`."""

import logging
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """
    Runtime configuration for qkpc.

    Values come from `QKPC_*` environment variables, falling back to
    `.env.local` in the working directory.
    """

    model_config = SettingsConfigDict(
        env_prefix="QKPC_",
        env_file=".env.local",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = Field("INFO", description="Root log level for the CLI")
    output_dir: Path | None = Field(
        None, description="Directory that relative --out paths are resolved against"
    )
    workers: int = Field(1, ge=1, description="Process workers for sweep cells")
    eve_includes_receiver_efficiency: bool = Field(
        True,
        description="Scale Eve's intercepted flux by eta for both encodings",
    )

    def resolve_output(self, path: Path) -> Path:
        """Resolve an output path against the configured output directory."""
        if path.is_absolute() or self.output_dir is None:
            return path
        return self.output_dir / path


@lru_cache
def get_settings() -> Settings:
    """Return the process-wide settings instance."""
    settings = Settings()
    logger.debug(f"Loaded settings: {settings.model_dump()}")
    return settings


def configure_logging(level: str | None = None) -> None:
    """Configure root logging on stderr."""
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
