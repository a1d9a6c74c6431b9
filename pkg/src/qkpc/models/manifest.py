"""Run manifest written next to every output table."""

from datetime import UTC, datetime
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from qkpc import __version__


class RunManifest(BaseModel):
    """Everything needed to regenerate an output file."""

    model_config = ConfigDict(frozen=True)

    command: str = Field(..., description="CLI subcommand")
    parameters: dict[str, Any] = Field(
        default_factory=dict, description="Resolved flags"
    )
    seed: int | None = Field(None, description="Master seed, if the command is random")
    version: str = Field(__version__, description="qkpc version")
    created_at: str = Field(
        default_factory=lambda: datetime.now(UTC).isoformat(),
        description="UTC creation timestamp (ISO 8601)",
    )

    def fingerprint(self) -> dict[str, Any]:
        """Manifest content that determines the output, i.e. without the timestamp."""
        return self.model_dump(exclude={"created_at"})
