"""Pydantic models for link environments, encoder parameters and binary channels."""

import math
from enum import StrEnum
from typing import Annotated

from pydantic import BaseModel, ConfigDict, Field, model_validator

Rate = Annotated[
    float,
    Field(ge=0, allow_inf_nan=False, description="Mean detected events per pulse"),
]
Probability = Annotated[float, Field(ge=0, le=1, description="Probability")]

CHANNEL_ROW_TOLERANCE = 1e-9


class TieRule(StrEnum):
    """Decision for PM pulses where both detectors register equal counts."""

    ALWAYS_ZERO = "always-zero"
    ALWAYS_ONE = "always-one"
    RANDOM = "random"


class LinkEnvironment(BaseModel):
    """Free-space link seen by Bob, and the fraction of it tapped by Eve."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(
        1.0, gt=0, le=1, description="End-to-end efficiency including Bob's detector"
    )
    delta: Rate = Field(0.0, description="Mean noise clicks per pulse per detector")
    gamma: float = Field(
        ..., gt=0, le=1, description="Fraction of Bob's photon flux intercepted by Eve"
    )
    eve_includes_receiver_efficiency: bool = Field(
        True, description="Eve's flux is gamma * eta (True) or gamma (False)"
    )

    @property
    def eve_efficiency(self) -> float:
        """Effective channel efficiency of the eavesdropper."""
        if self.eve_includes_receiver_efficiency:
            return self.gamma * self.eta
        return self.gamma


class OokParams(BaseModel):
    """On-off keying encoder and PNR threshold decoder."""

    model_config = ConfigDict(frozen=True)

    mean_photons: float = Field(
        ..., ge=0, allow_inf_nan=False, description="|alpha|^2 at the channel input"
    )
    threshold_k: int = Field(1, ge=1, description="Counts >= k decode to bit 1")
    q0: float = Field(0.5, gt=0, lt=1, description="Prior probability of bit 0")


class PmParams(BaseModel):
    """Polarization-multiplexed encoder and majority-click decoder."""

    model_config = ConfigDict(frozen=True)

    mean_photons: float = Field(
        ..., ge=0, allow_inf_nan=False, description="|alpha|^2 of the bit-0 state"
    )
    theta: float = Field(
        ..., ge=0, le=math.pi, description="Polarization angle between states (rad)"
    )
    kappa: float = Field(1.0, ge=0, le=1, description="Photon ratio |beta|^2/|alpha|^2")
    q0: float = Field(0.5, gt=0, lt=1, description="Prior probability of bit 0")
    tie_rule: TieRule = Field(
        TieRule.ALWAYS_ONE, description="Decision on equal counts"
    )


class BinaryChannel(BaseModel):
    """Conditional output probabilities eps_xy = P(y | x) of a binary channel."""

    model_config = ConfigDict(frozen=True)

    eps00: Probability
    eps01: Probability
    eps10: Probability
    eps11: Probability

    @model_validator(mode="after")
    def _rows_sum_to_one(self) -> "BinaryChannel":
        rows = (("0", self.eps00 + self.eps01), ("1", self.eps10 + self.eps11))
        for name, row in rows:
            if abs(row - 1.0) > CHANNEL_ROW_TOLERANCE:
                raise ValueError(f"Row for input {name} sums to {row}, expected 1")
        return self

    @classmethod
    def from_correct(cls, eps00: float, eps10: float) -> "BinaryChannel":
        """Build a channel from P(0|0) and P(0|1), filling in the complements."""
        return cls(eps00=eps00, eps01=1.0 - eps00, eps10=eps10, eps11=1.0 - eps10)

    @property
    def qber(self) -> float:
        """Bit error rate at uniform input."""
        return (self.eps01 + self.eps10) / 2.0
