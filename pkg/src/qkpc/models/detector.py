"""Pydantic models for time-multiplexed threshold detectors."""

import math
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator


class CountingMode(StrEnum):
    """How a pulse's arrivals are turned into registered clicks when sampling."""

    IDEAL = "ideal"  # every photon counted: Poisson counts
    INTERVAL = "interval"  # N fixed intervals, at most one click each
    DEAD_TIME = "dead-time"  # continuous time, dead window after each click


class DetectorModel(BaseModel):
    """Threshold single-photon detector read out over a long pulse."""

    model_config = ConfigDict(frozen=True)

    dead_time: float = Field(45e-9, gt=0, description="Dead time in seconds")
    pulse_width: float = Field(10e-6, gt=0, description="Pulse width in seconds")
    dark_rate: float = Field(70.0, ge=0, description="Dark-count rate in Hz")
    efficiency: float = Field(
        0.5, gt=0, le=1, description="Photon detection efficiency"
    )
    counting: CountingMode = Field(CountingMode.DEAD_TIME, description="Sampling model")

    @model_validator(mode="after")
    def _at_least_one_interval(self) -> "DetectorModel":
        if self.intervals_n < 1:
            raise ValueError("pulse_width must be at least one dead time")
        return self

    @computed_field
    @property
    def intervals_n(self) -> int:
        """Number of dead-time intervals that fit in one pulse."""
        # relative nudge so that 10 us / 40 ns lands on 250, not 249
        return math.floor(self.pulse_width / self.dead_time * (1.0 + 1e-12))

    @property
    def dark_counts_per_pulse(self) -> float:
        """Mean dark counts accumulated over one pulse."""
        return self.dark_rate * self.pulse_width

    def noise_clicks_per_pulse(self, background_photons: float) -> float:
        """Mean noise clicks per pulse: detected background photons plus dark counts."""
        return self.efficiency * background_photons + self.dark_counts_per_pulse


DEFAULT_DETECTOR = DetectorModel()
FAST_RESET_DETECTOR = DetectorModel(dead_time=40e-9)

DETECTOR_PRESETS: dict[str, DetectorModel] = {
    "default": DEFAULT_DETECTOR,
    "fast-reset": FAST_RESET_DETECTOR,
    "paper-appendix": FAST_RESET_DETECTOR,
}
